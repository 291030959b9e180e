#pragma once

// Umbrella header: thresholded co-movement statistics for return series,
// the covariance matrices they induce, and positive-semidefiniteness
// verification tools.

#include "gerber/errors.hpp"
#include "gerber/format.hpp"
#include "gerber/indicators.hpp"
#include "gerber/psd.hpp"
#include "gerber/report.hpp"
#include "gerber/returns.hpp"
#include "gerber/statistics.hpp"
