#pragma once

#include "mlines/numbers.hpp"
#include "mlines/exact_poly.hpp"
#include "mlines/combinatorics.hpp"
#include "mlines/trees.hpp"
#include "mlines/tree_pairs.hpp"
#include "mlines/local_models.hpp"
#include "mlines/charts.hpp"
#include "mlines/vpp.hpp"
