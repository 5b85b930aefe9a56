#pragma once

#include "statedpref/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace statedpref {

enum class LinkKind
{
  logit,
};

//! Link applied to reported probabilities before they enter the first step.
//! Probabilities are clamped into [clamp_eps, 1 - clamp_eps] so that
//! reports of exactly 0 or 1 map to finite values.
struct LinkFunction
{
  LinkKind kind = LinkKind::logit;
  double clamp_eps = 0.01;
};

inline void validate(const LinkFunction& lf)
{
  if (!(lf.clamp_eps > 0.0 && lf.clamp_eps < 0.5))
    throw ConfigError("clamp_eps must lie in (0, 0.5), got " + std::to_string(lf.clamp_eps));
}

template <typename Scalar>
Scalar clamp_probability(Scalar p, const LinkFunction& lf = {})
{
  return std::clamp(p, Scalar(lf.clamp_eps), Scalar(1 - lf.clamp_eps));
}

//! Log-odds of a clamped probability.
template <typename Scalar>
Scalar link(Scalar p, const LinkFunction& lf = {})
{
  if (!std::isfinite(p) || p < Scalar(0) || p > Scalar(1))
    throw ValidationError("link: probability outside [0,1]: " + std::to_string(double(p)));
  const Scalar q = clamp_probability(p, lf);
  return std::log(q) - std::log1p(-q);
}

//! Logistic CDF, evaluated without overflow for large |z|.
template <typename Scalar>
Scalar inverse_link(Scalar z, const LinkFunction& = {})
{
  if (!std::isfinite(z))
    throw ValidationError("inverse_link: non-finite argument");
  if (z >= Scalar(0))
    return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

//! Range of link() once clamping is applied: [link(eps), link(1 - eps)].
inline double link_lower_bound(const LinkFunction& lf = {})
{
  return std::log(lf.clamp_eps) - std::log1p(-lf.clamp_eps);
}

inline double link_upper_bound(const LinkFunction& lf = {})
{
  return -link_lower_bound(lf);
}

} // namespace statedpref
