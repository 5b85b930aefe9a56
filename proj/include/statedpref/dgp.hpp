#pragma once

#include "statedpref/panel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace statedpref {

enum class Rounding
{
  first_decimal,
  none,
};

//! Law of the threshold U_i the actual index is compared against.
//!  - uniform:  U_i = Phi(nu), so m^r(x, eta) = Pr(Phi(nu) < index | eta)
//!  - logistic: U_i = logit(Phi(nu)), so m^r = Gamma(index) when nu is independent of eta
enum class ThresholdLaw
{
  uniform,
  logistic,
};

//! Constants of the simulation design. The latent vector is ordered
//! (X, eta1, eta2, nu); index coefficients are (intercept, X, eta1, X*eta1)
//! with a separate coefficient on eta2.
struct DgpConfig
{
  Eigen::Vector4d mean = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
  Eigen::Matrix4d cov = default_cov();
  Eigen::Vector4d actual_coef = Eigen::Vector4d(0.0, 1.0, 0.5, 0.1);
  double actual_eta2_coef = 1.0;
  Eigen::Vector4d stated_coef = Eigen::Vector4d(0.1, 0.8, 0.6, 0.3);
  double stated_eta2_coef = 1.0;
  double noise_scale = 0.05; //!< Var(eps_it) = noise_scale * exp(x_it)
  std::vector<double> scenario_grid = default_grid();
  int t_scenarios = 10;
  int n = 1000;
  Rounding rounding = Rounding::first_decimal;
  ThresholdLaw threshold = ThresholdLaw::uniform;

  static Eigen::Matrix4d default_cov();
  static std::vector<double> default_grid();
};

//! Throws ConfigError naming the first violated constraint.
void validate(const DgpConfig& cfg);

//! Lower-triangular L with L L' = a for symmetric PSD a. Zero pivots are
//! allowed (degenerate directions produce zero columns).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>
psd_cholesky(const Eigen::MatrixBase<Derived>& a)
{
  using Scalar = typename Derived::Scalar;
  using Matrix =
    Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, Derived::ColsAtCompileTime>;
  const Eigen::Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  const Scalar tol = Scalar(1e-12) * std::max(Scalar(1), a.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar pivot = a(j, j) - l.row(j).head(j).squaredNorm();
    if (pivot <= tol)
      continue;
    const Scalar root = std::sqrt(pivot);
    l(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / root;
  }
  return l;
}

double actual_index(const DgpConfig& cfg, double x, double eta1, double eta2);
double stated_index(const DgpConfig& cfg, double x, double eta1, double eta2);

//! Objective demand m^r(x, eta): probability of choosing 1 for type eta when
//! x is set exogenously, integrating nu over its law conditional on eta.
double actual_demand(const DgpConfig& cfg, double x, double eta1, double eta2);

//! Stated demand m(x, eta) = Gamma(stated index).
double stated_demand(const DgpConfig& cfg, double x, double eta1, double eta2);

struct LatentDraw
{
  PersonId person_id = 0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double u = 0.0; //!< Phi(nu), the resolved uncertainty
};

struct LatentTruth
{
  std::vector<LatentDraw> persons;
};

struct SimulatedData
{
  PseudoPanel panel;
  LatentTruth latent;
};

//! Draws a pseudo-panel of cfg.n persons with scenarios 0..T. Bit-identical
//! for identical (cfg, seed).
SimulatedData simulate_dataset(const DgpConfig& cfg, std::uint64_t seed);

//! Monte Carlo average structural function mu^r(x).
double oracle_asf(const DgpConfig& cfg, double x, long long n_draws, std::uint64_t seed);

//! mu^r(x1) - mu^r(x0) with common random numbers.
double oracle_treatment_effect(const DgpConfig& cfg, double x1, double x0, long long n_draws,
                               std::uint64_t seed);

//! E_eta[ m(x1, eta) - m(x0, eta) ].
double oracle_stated_te(const DgpConfig& cfg, double x1, double x0, long long n_draws,
                        std::uint64_t seed);

//! E_eta[ (m^r(x, eta) - m(x, eta))^2 ], both demands at the same eta.
double oracle_msb(const DgpConfig& cfg, double x, long long n_draws, std::uint64_t seed);

//! Default-style configuration restricted to a single heterogeneity
//! dimension: eta2 has zero variance and zero index coefficients.
DgpConfig restrict_to_one_dimension(DgpConfig cfg);

} // namespace statedpref
