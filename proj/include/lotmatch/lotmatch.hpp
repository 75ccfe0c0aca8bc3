#pragma once

// Umbrella header: constrained deferred acceptance with lottery tie-breaking,
// disclosure policies, exact equilibrium verification, outcome statistics, and the
// synthetic-session harness.

#include "lotmatch/aad.hpp"
#include "lotmatch/config.hpp"
#include "lotmatch/info.hpp"
#include "lotmatch/log.hpp"
#include "lotmatch/market.hpp"
#include "lotmatch/oracle.hpp"
#include "lotmatch/rational.hpp"
#include "lotmatch/rng.hpp"
#include "lotmatch/robustness.hpp"
#include "lotmatch/session.hpp"
#include "lotmatch/stats.hpp"
#include "lotmatch/strategy.hpp"
