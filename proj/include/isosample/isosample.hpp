#pragma once

#include "isosample/alias.hpp"
#include "isosample/combinations.hpp"
#include "isosample/counting.hpp"
#include "isosample/density.hpp"
#include "isosample/down_up.hpp"
#include "isosample/exact.hpp"
#include "isosample/graph.hpp"
#include "isosample/io.hpp"
#include "isosample/isotropic.hpp"
#include "isosample/linear_algebra.hpp"
#include "isosample/log_space.hpp"
#include "isosample/marginals.hpp"
#include "isosample/negative_dependence.hpp"
#include "isosample/random.hpp"
#include "isosample/subset.hpp"
#include "isosample/suite.hpp"
