#pragma once

// Generalized steepest descent toolkit: manifolds, objectives, the three
// iteration schemes (plain / momentum / stochastic), noise sources, trace
// analysis and the experiment runner.

#include "descent/analysis.hpp"
#include "descent/config.hpp"
#include "descent/experiment.hpp"
#include "descent/manifold.hpp"
#include "descent/noise.hpp"
#include "descent/objective.hpp"
#include "descent/optimize.hpp"
#include "descent/rng.hpp"
#include "descent/schedule.hpp"
#include "descent/trace.hpp"
#include "descent/trace_io.hpp"
