#ifndef SGDMC_SGDMC_HPP
#define SGDMC_SGDMC_HPP

#include "sgdmc/error.hpp"
#include "sgdmc/interval.hpp"
#include "sgdmc/polynomial.hpp"
#include "sgdmc/objective.hpp"
#include "sgdmc/absorbing.hpp"
#include "sgdmc/dynamics.hpp"
#include "sgdmc/grid.hpp"
#include "sgdmc/metrics.hpp"
#include "sgdmc/transfer.hpp"
#include "sgdmc/diffusion.hpp"
#include "sgdmc/analysis.hpp"
#include "sgdmc/io.hpp"

#endif  // SGDMC_SGDMC_HPP
