#pragma once

#include "minvset/polynomial.hpp"
#include "minvset/roots.hpp"
#include "minvset/bivariate.hpp"
#include "minvset/field.hpp"
#include "minvset/geometry.hpp"
#include "minvset/integrate.hpp"
#include "minvset/marching.hpp"
#include "minvset/trace.hpp"
#include "minvset/trail.hpp"
#include "minvset/grid.hpp"
#include "minvset/minset.hpp"
#include "minvset/classify.hpp"
#include "minvset/cases.hpp"
#include "minvset/io.hpp"
