#include "rgem/model.hpp"

#include <algorithm>
#include <limits>

namespace rgem {

void MixtureParams::validate() const {
  const auto k = num_clusters();
  if (k == 0) throw DimensionError("MixtureParams: no clusters");
  if (static_cast<Eigen::Index>(means.size()) != k ||
      static_cast<Eigen::Index>(covariances.size()) != k)
    throw DimensionError("MixtureParams: inconsistent cluster count");
  if ((weights.array() < 0.0).any() || (weights.array() > 1.0).any())
    throw DomainError("MixtureParams: weight outside [0, 1]");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw DomainError("MixtureParams: weights do not sum to 1");
  const auto m = dim();
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    if (means[idx].size() != m || covariances[idx].dim() != m)
      throw DimensionError("MixtureParams: dimension mismatch in cluster " + std::to_string(j));
    if (!covariances[idx].definite())
      throw IndefiniteError("MixtureParams: covariance " + std::to_string(j) + " is not definite");
  }
}

MixtureParams MixtureParams::permuted(const std::vector<int>& perm) const {
  MixtureParams out;
  out.weights.resize(num_clusters());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    const auto src = static_cast<std::size_t>(perm[j]);
    out.weights(static_cast<Eigen::Index>(j)) = weights(perm[j]);
    out.means.push_back(means[src]);
    out.covariances.push_back(covariances[src]);
  }
  return out;
}

RegularizationState RegularizationState::identity_targets(const Eigen::VectorXd& scales,
                                                          Eigen::Index dim) {
  RegularizationState reg;
  reg.scales = scales;
  reg.penalties = Eigen::VectorXd::Zero(scales.size());
  for (Eigen::Index k = 0; k < scales.size(); ++k) {
    if (!(scales(k) > 0.0)) throw DomainError("identity target scale must be positive");
    reg.targets.push_back(SpdMatrixd::identity(dim, scales(k)));
  }
  return reg;
}

void RegularizationState::set_identity_target(Eigen::Index k, double scale, Eigen::Index dim) {
  if (!(scale > 0.0)) throw DomainError("identity target scale must be positive");
  scales(k) = scale;
  targets[static_cast<std::size_t>(k)] = SpdMatrixd::identity(dim, scale);
}

RegularizationState RegularizationState::permuted(const std::vector<int>& perm) const {
  RegularizationState out;
  out.scales.resize(num_clusters());
  out.penalties.resize(num_clusters());
  for (std::size_t j = 0; j < perm.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.scales(jj) = scales(perm[j]);
    out.penalties(jj) = penalties(perm[j]);
    out.targets.push_back(targets[static_cast<std::size_t>(perm[j])]);
  }
  return out;
}

Eigen::MatrixXd weighted_log_densities(const DataMatrix& x, const MixtureParams& params) {
  const auto n = x.n();
  const auto k = params.num_clusters();
  if (x.m() != params.dim()) throw DimensionError("data and mixture dimensions differ");
  const double log_two_pi = std::log(2.0 * std::numbers::pi);
  const double base = -0.5 * static_cast<double>(x.m()) * log_two_pi;
  Eigen::MatrixXd out(n, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto idx = static_cast<std::size_t>(j);
    const auto& sigma = params.covariances[idx];
    const Eigen::MatrixXd centered = x.values().rowwise() - params.means[idx].transpose();
    const Eigen::VectorXd maha = quadratic_forms(sigma, centered);
    const double log_weight = params.weights(j) > 0.0
                                  ? std::log(params.weights(j))
                                  : -std::numeric_limits<double>::infinity();
    out.col(j).array() = log_weight + base - 0.5 * log_det(sigma) - 0.5 * maha.array();
  }
  return out;
}

Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& values) {
  Eigen::VectorXd out(values.rows());
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    const double shift = values.row(i).maxCoeff();
    if (!std::isfinite(shift)) {
      out(i) = shift;
      continue;
    }
    out(i) = shift + std::log((values.row(i).array() - shift).exp().sum());
  }
  return out;
}

double log_likelihood(const DataMatrix& x, const MixtureParams& params) {
  return log_sum_exp_rows(weighted_log_densities(x, params)).sum();
}

double total_penalty(const MixtureParams& params, const RegularizationState& reg) {
  if (reg.num_clusters() != params.num_clusters())
    throw DimensionError("regularization and mixture cluster counts differ");
  double total = 0.0;
  for (Eigen::Index k = 0; k < params.num_clusters(); ++k) {
    const double eta = reg.penalties(k);
    if (eta == 0.0) continue;
    const auto idx = static_cast<std::size_t>(k);
    total += eta * kl_penalty(params.covariances[idx], reg.targets[idx]);
  }
  return total;
}

double penalized_log_likelihood(const DataMatrix& x, const MixtureParams& params,
                                const RegularizationState& reg) {
  return log_likelihood(x, params) - total_penalty(params, reg);
}

}  // namespace rgem
