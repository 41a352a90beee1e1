#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Core>

#include "rgem/data_matrix.hpp"
#include "rgem/spd.hpp"

namespace rgem {

/// Weights, means and covariances of a K-component Gaussian mixture.
struct MixtureParams {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<SpdMatrixd> covariances;

  Eigen::Index num_clusters() const { return weights.size(); }
  Eigen::Index dim() const { return means.empty() ? 0 : means.front().size(); }

  /// Throws unless weights sum to 1, shapes agree and every covariance is definite.
  void validate() const;

  /// Clusters reordered so that new cluster j is old cluster perm[j].
  MixtureParams permuted(const std::vector<int>& perm) const;
};

/// Per-cluster shrinkage targets T_k, scales theta_k and penalties eta_k.
struct RegularizationState {
  std::vector<SpdMatrixd> targets;
  Eigen::VectorXd scales;
  Eigen::VectorXd penalties;

  Eigen::Index num_clusters() const { return scales.size(); }

  /// T_k = scales_k * I_m, penalties zero.
  static RegularizationState identity_targets(const Eigen::VectorXd& scales, Eigen::Index dim);

  /// Resets T_k = scale * I_m for one cluster.
  void set_identity_target(Eigen::Index k, double scale, Eigen::Index dim);

  RegularizationState permuted(const std::vector<int>& perm) const;
};

/// log N(x; mu, sigma).
template <typename Scalar, typename DerivedX, typename DerivedMu>
Scalar log_component_density(const Eigen::MatrixBase<DerivedX>& x,
                             const Eigen::MatrixBase<DerivedMu>& mu,
                             const SpdMatrix<Scalar>& sigma) {
  if (x.size() != mu.size() || x.size() != sigma.dim())
    throw DimensionError("log_component_density: dimension mismatch");
  const Scalar m = static_cast<Scalar>(sigma.dim());
  const Scalar log_two_pi = std::log(Scalar(2) * std::numbers::pi_v<Scalar>);
  return -Scalar(0.5) * m * log_two_pi - Scalar(0.5) * log_det(sigma) -
         Scalar(0.5) * quadratic_form(sigma, (x - mu).eval());
}

/// KL-type divergence 0.5 * (tr(sigma^{-1} T) - log|sigma^{-1} T| - m).
template <typename Scalar>
Scalar kl_penalty(const SpdMatrix<Scalar>& sigma, const SpdMatrix<Scalar>& target) {
  if (sigma.dim() != target.dim()) throw DimensionError("kl_penalty: dimension mismatch");
  const Scalar trace = trace_solve(sigma, target.matrix());
  const Scalar log_ratio = log_det(target) - log_det(sigma);
  const Scalar value =
      Scalar(0.5) * (trace - log_ratio - static_cast<Scalar>(sigma.dim()));
  // Rounding can push an exact zero slightly negative.
  return value < Scalar(0) ? Scalar(0) : value;
}

/// n x K matrix of log(pi_k) + log N(x_i; mu_k, Sigma_k).
Eigen::MatrixXd weighted_log_densities(const DataMatrix& x, const MixtureParams& params);

/// Row-wise log-sum-exp with max shift.
Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& values);

double log_likelihood(const DataMatrix& x, const MixtureParams& params);

/// sum_k eta_k * kl_penalty(Sigma_k, T_k); clusters with eta_k == 0 contribute exactly 0.
double total_penalty(const MixtureParams& params, const RegularizationState& reg);

double penalized_log_likelihood(const DataMatrix& x, const MixtureParams& params,
                                const RegularizationState& reg);

}  // namespace rgem
