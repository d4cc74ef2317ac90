#pragma once

namespace bats::normal {

/// Standard normal cdf.
double cdf(double x);
/// Upper tail Q(x) = 1 - cdf(x), computed without cancellation.
double q(double x);
double pdf(double x);
/// Inverse cdf for p in (0, 1); relative error below 1e-14 across the range.
double quantile(double p);
/// Q^{-1}(p) = -quantile(p).
double q_inverse(double p);

}  // namespace bats::normal
