#pragma once

#include "adapter.hpp"
#include "chainworld.hpp"
#include "entropy.hpp"
#include "environment.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "manifest.hpp"
#include "param_filler.hpp"
#include "predictor.hpp"
#include "relevance.hpp"
#include "tig.hpp"
#include "trajectory.hpp"
#include "value.hpp"
