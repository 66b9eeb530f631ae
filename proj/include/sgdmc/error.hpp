#ifndef SGDMC_ERROR_HPP
#define SGDMC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace sgdmc {

/// Broad failure classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
  invalid_input,     // malformed objective or arguments
  assumption,        // coercivity, inconsistent optimization, step-size bound
  convergence,       // an iterative solve ran out of iterations
  singular_diffusion,
  internal,          // a check that must hold by construction failed: a bug, not bad input
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct InvalidInput : Error {
  explicit InvalidInput(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

struct DegenerateDerivative : Error {
  explicit DegenerateDerivative(const std::string& what) : Error(ErrorKind::assumption, what) {}
};

struct NonCoercive : Error {
  explicit NonCoercive(const std::string& what) : Error(ErrorKind::assumption, what) {}
};

struct AssumptionA5Violated : Error {
  explicit AssumptionA5Violated(const std::string& what) : Error(ErrorKind::assumption, what) {}
};

struct EmptyCriticalSet : Error {
  explicit EmptyCriticalSet(const std::string& what) : Error(ErrorKind::assumption, what) {}
};

/// eta is not below 1/K. Carries the bound so callers can report it.
class StepSizeTooLarge : public Error {
 public:
  StepSizeTooLarge(double eta, double eta_max)
      : Error(ErrorKind::assumption, "step size eta=" + std::to_string(eta) +
                                         " is not below eta0=1/K=" + std::to_string(eta_max)),
        eta_(eta),
        eta_max_(eta_max) {}
  double eta() const noexcept { return eta_; }
  double eta_max() const noexcept { return eta_max_; }

 private:
  double eta_;
  double eta_max_;
};

struct OutOfStateSpace : Error {
  explicit OutOfStateSpace(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

struct NoConvergence : Error {
  NoConvergence(const std::string& what, double residual)
      : Error(ErrorKind::convergence, what), residual(residual) {}
  double residual;
};

struct NonTermination : Error {
  explicit NonTermination(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

struct SingularDiffusion : Error {
  SingularDiffusion(const std::string& what, std::vector<double> points)
      : Error(ErrorKind::singular_diffusion, what), points(std::move(points)) {}
  std::vector<double> points;
};

struct GridMismatch : Error {
  explicit GridMismatch(const std::string& what) : Error(ErrorKind::invalid_input, what) {}
};

struct InvarianceCheckFailed : Error {
  explicit InvarianceCheckFailed(const std::string& what) : Error(ErrorKind::internal, what) {}
};

struct InternalError : Error {
  explicit InternalError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace sgdmc

#endif  // SGDMC_ERROR_HPP
