#pragma once

#include "dirmech/error.hpp"
#include "dirmech/specialfn.hpp"
#include "dirmech/rng.hpp"
#include "dirmech/randomness.hpp"
#include "dirmech/stats.hpp"
#include "dirmech/parallel.hpp"
#include "dirmech/copula.hpp"
#include "dirmech/psi.hpp"
#include "dirmech/rounding.hpp"
#include "dirmech/online.hpp"
#include "dirmech/scheduling.hpp"
#include "dirmech/certify.hpp"
#include "dirmech/io.hpp"
