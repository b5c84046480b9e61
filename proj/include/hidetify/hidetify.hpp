#ifndef HIDETIFY_HIDETIFY_HPP
#define HIDETIFY_HIDETIFY_HPP

#include "benchmark.hpp"
#include "chi_square.hpp"
#include "csv_io.hpp"
#include "data_matrix.hpp"
#include "detectors.hpp"
#include "errors.hpp"
#include "expectile.hpp"
#include "influence.hpp"
#include "lasso.hpp"
#include "parallel.hpp"
#include "ramm.hpp"
#include "random.hpp"
#include "simgen.hpp"

#endif
