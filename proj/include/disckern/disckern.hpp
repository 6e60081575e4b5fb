#pragma once

#include "disckern/bandwidth.hpp"
#include "disckern/cmp_kernel.hpp"
#include "disckern/error.hpp"
#include "disckern/estimator.hpp"
#include "disckern/kernel.hpp"
#include "disckern/numeric.hpp"
#include "disckern/parallel.hpp"
#include "disckern/pmf.hpp"
#include "disckern/simulation.hpp"
