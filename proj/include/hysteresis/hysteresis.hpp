#pragma once

// Umbrella header.

#include "hysteresis/config.hpp"
#include "hysteresis/equilibrium.hpp"
#include "hysteresis/expr.hpp"
#include "hysteresis/integrator.hpp"
#include "hysteresis/io.hpp"
#include "hysteresis/loop.hpp"
#include "hysteresis/model.hpp"
#include "hysteresis/signal.hpp"
#include "hysteresis/verdict.hpp"
