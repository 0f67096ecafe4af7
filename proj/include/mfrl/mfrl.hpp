#pragma once

// Model-following adaptive control via online actor-critic projection
// learning, with two benchmark processes, sliding-mode and model-free
// adaptive baselines, and a reproducible experiment harness.

#include "mfrl/types.hpp"
#include "mfrl/packing.hpp"
#include "mfrl/learner.hpp"
#include "mfrl/probing.hpp"
#include "mfrl/plants.hpp"
#include "mfrl/episode.hpp"
#include "mfrl/baselines.hpp"
#include "mfrl/config.hpp"
#include "mfrl/experiment.hpp"
