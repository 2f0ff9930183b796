#pragma once

#include "types.hpp"
#include "problems.hpp"
#include "geometry.hpp"
#include "smoothing.hpp"
#include "schedules.hpp"
#include "sqn_core.hpp"
#include "metrics.hpp"
#include "vrg.hpp"
#include "vrsqn.hpp"
#include "config.hpp"
#include "harness.hpp"
