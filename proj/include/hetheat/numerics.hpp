#pragma once

#include <span>

namespace hetheat {

/// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace hetheat
