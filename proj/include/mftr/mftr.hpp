#ifndef MFTR_MFTR_HPP
#define MFTR_MFTR_HPP

#include "mftr/common.hpp"
#include "mftr/fit.hpp"
#include "mftr/laplace.hpp"
#include "mftr/metrics.hpp"
#include "mftr/mixture.hpp"
#include "mftr/model.hpp"
#include "mftr/quadrature.hpp"
#include "mftr/rng.hpp"
#include "mftr/sampling.hpp"
#include "mftr/special_functions.hpp"
#include "mftr/stats.hpp"

#endif
