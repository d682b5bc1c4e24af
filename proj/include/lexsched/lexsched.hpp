#pragma once

#include "lexsched/baselines.hpp"
#include "lexsched/bench.hpp"
#include "lexsched/bnb.hpp"
#include "lexsched/bounds.hpp"
#include "lexsched/core.hpp"
#include "lexsched/errors.hpp"
#include "lexsched/generators.hpp"
#include "lexsched/io.hpp"
#include "lexsched/rational.hpp"
#include "lexsched/recovery.hpp"
#include "lexsched/search_tree.hpp"
