#pragma once

// Umbrella header: distributionally robust risk measures parametrized by one,
// two, or three phi-divergences, with finite-dimensional dual solvers.

#define PHIRISK_VERSION "1.0.0"

#include "config.hpp"
#include "divergence.hpp"
#include "dual.hpp"
#include "elicitation.hpp"
#include "ellipsoid.hpp"
#include "experiments.hpp"
#include "finiteness.hpp"
#include "math.hpp"
#include "nominal.hpp"
#include "quadrature.hpp"
#include "risk.hpp"
#include "tailored.hpp"
