#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace statedpref {

//! Standard normal density.
template <typename Scalar>
Scalar normal_pdf(Scalar z)
{
  using std::exp;
  return exp(Scalar(-0.5) * z * z) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

namespace detail {

//! Mills ratio R(t) = (1 - Phi(t)) / phi(t) for t >= 8, Laplace continued fraction.
template <typename Scalar>
Scalar upper_mills_ratio(Scalar t)
{
  Scalar frac = t;
  for (int k = 60; k >= 1; --k)
    frac = t + Scalar(k) / frac;
  return Scalar(1) / frac;
}

inline constexpr double kTailCut = 8.0;

} // namespace detail

//! Standard normal CDF via erfc; relative accuracy holds deep into the lower tail.
template <typename Scalar>
Scalar normal_cdf(Scalar z)
{
  using std::erfc;
  if (z < -Scalar(detail::kTailCut))
    return normal_pdf(z) * detail::upper_mills_ratio(-z);
  return Scalar(0.5) * erfc(-z / std::numbers::sqrt2_v<Scalar>);
}

//! ln Phi(z), finite for every finite z.
template <typename Scalar>
Scalar log_normal_cdf(Scalar z)
{
  using std::log;
  if (z < -Scalar(detail::kTailCut)) {
    const Scalar log_pdf =
      Scalar(-0.5) * z * z - Scalar(0.5) * log(Scalar(2) * std::numbers::pi_v<Scalar>);
    return log_pdf + log(detail::upper_mills_ratio(-z));
  }
  if (z > Scalar(5))
    return std::log1p(-normal_cdf(-z));
  return log(normal_cdf(z));
}

//! phi(z) / Phi(z), the inverse Mills ratio, stable for very negative z.
template <typename Scalar>
Scalar inverse_mills(Scalar z)
{
  if (z < -Scalar(detail::kTailCut))
    return Scalar(1) / detail::upper_mills_ratio(-z);
  return normal_pdf(z) / normal_cdf(z);
}

//! Standard normal quantile: Acklam's rational approximation polished by
//! one Halley step against normal_cdf.
template <typename Scalar>
Scalar normal_quantile(Scalar p)
{
  using std::log;
  using std::sqrt;
  if (!(p > Scalar(0)))
    return p == Scalar(0) ? -std::numeric_limits<Scalar>::infinity()
                          : std::numeric_limits<Scalar>::quiet_NaN();
  if (!(p < Scalar(1)))
    return p == Scalar(1) ? std::numeric_limits<Scalar>::infinity()
                          : std::numeric_limits<Scalar>::quiet_NaN();

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  Scalar x;
  if (p < Scalar(p_low)) {
    const Scalar q = sqrt(Scalar(-2) * log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= Scalar(1 - p_low)) {
    const Scalar q = p - Scalar(0.5);
    const Scalar r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const Scalar q = sqrt(Scalar(-2) * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  // One Halley step; the residual is formed on the smaller tail.
  const Scalar err = x < 0 ? normal_cdf(x) - p : (Scalar(1) - p) - normal_cdf(-x);
  const Scalar u =
    err * std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>) * std::exp(Scalar(0.5) * x * x);
  return x - u / (Scalar(1) + Scalar(0.5) * x * u);
}

} // namespace statedpref
