#pragma once

// Umbrella header for the numerical core (no harness).

#include "dampwave/diagnostics.hpp"
#include "dampwave/exponents.hpp"
#include "dampwave/grid.hpp"
#include "dampwave/model.hpp"
#include "dampwave/smooth_step.hpp"
#include "dampwave/solver.hpp"
#include "dampwave/testfn.hpp"
#include "dampwave/trace_io.hpp"
#include "dampwave/transform.hpp"
