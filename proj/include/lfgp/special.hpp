#pragma once

namespace lfgp {

/// Regularized incomplete beta function I_x(a, b), continued-fraction
/// evaluation (modified Lentz). Accurate to ~1e-14 for moderate a, b.
double beta_cdf(double a, double b, double x);

/// Inverse of beta_cdf in x by bisection on [0, 1]; |I_x - p| driven below
/// 1e-10 interval width.
double beta_quantile(double a, double b, double p);

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (Acklam rational approximation polished with one
/// Newton step on erfc, ~1 ulp over (0, 1)).
double normal_quantile(double p);

} // namespace lfgp
