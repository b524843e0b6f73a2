#pragma once

// Umbrella header.

#include "adafuse/cost_model.hpp"
#include "adafuse/error.hpp"
#include "adafuse/fusion.hpp"
#include "adafuse/io.hpp"
#include "adafuse/metrics.hpp"
#include "adafuse/parallel.hpp"
#include "adafuse/pruning.hpp"
#include "adafuse/rng.hpp"
#include "adafuse/simulator.hpp"
#include "adafuse/types.hpp"
#include "adafuse/utf8.hpp"
