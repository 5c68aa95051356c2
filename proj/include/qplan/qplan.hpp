#pragma once

#include "qplan/types.hpp"
#include "qplan/gridworld.hpp"
#include "qplan/sensing.hpp"
#include "qplan/qplanner.hpp"
#include "qplan/baselines.hpp"
#include "qplan/smoothing.hpp"
#include "qplan/planner.hpp"
#include "qplan/mission.hpp"
#include "qplan/svg.hpp"
#include "qplan/bench.hpp"
#include "qplan/fixtures.hpp"
