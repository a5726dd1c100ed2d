#pragma once

#include "mf/errors.hpp"
#include "mf/euler.hpp"
#include "mf/flat_norm.hpp"
#include "mf/flow.hpp"
#include "mf/interaction.hpp"
#include "mf/io.hpp"
#include "mf/measure.hpp"
#include "mf/piecewise_linear.hpp"
#include "mf/runner.hpp"
#include "mf/semigroup.hpp"
#include "mf/simplex.hpp"
#include "mf/verify.hpp"
