#pragma once

// Umbrella header for the sparse canonical correlation analysis library.

#include "scca/covariance.hpp"
#include "scca/csv.hpp"
#include "scca/errors.hpp"
#include "scca/experiment.hpp"
#include "scca/greedy.hpp"
#include "scca/oracle.hpp"
#include "scca/parallel.hpp"
#include "scca/pattern.hpp"
#include "scca/random.hpp"
#include "scca/solver.hpp"
