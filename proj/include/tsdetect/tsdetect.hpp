#pragma once

// Umbrella header for the MIMO tabu-search detection toolkit.

#include "tsdetect/complexity.hpp"
#include "tsdetect/constellation.hpp"
#include "tsdetect/harness.hpp"
#include "tsdetect/matrix.hpp"
#include "tsdetect/model.hpp"
#include "tsdetect/ngts.hpp"
#include "tsdetect/ops.hpp"
#include "tsdetect/oracle.hpp"
#include "tsdetect/qr.hpp"
#include "tsdetect/rng.hpp"
#include "tsdetect/selftest.hpp"
#include "tsdetect/tabu.hpp"
#include "tsdetect/trace.hpp"
#include "tsdetect/ts.hpp"
