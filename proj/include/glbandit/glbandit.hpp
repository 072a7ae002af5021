#pragma once

#include "glbandit/baselines.hpp"
#include "glbandit/concentration.hpp"
#include "glbandit/config.hpp"
#include "glbandit/environments.hpp"
#include "glbandit/errors.hpp"
#include "glbandit/estimators.hpp"
#include "glbandit/harness.hpp"
#include "glbandit/link.hpp"
#include "glbandit/linalg.hpp"
#include "glbandit/policies.hpp"
#include "glbandit/replay.hpp"
