#pragma once

#include "ek/arith.hpp"
#include "ek/density.hpp"
#include "ek/distribution.hpp"
#include "ek/errors.hpp"
#include "ek/framework.hpp"
#include "ek/model.hpp"
#include "ek/moment_report.hpp"
#include "ek/moments.hpp"
#include "ek/prime_cache.hpp"
#include "ek/rational.hpp"
#include "ek/sieve.hpp"
