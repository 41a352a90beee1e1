#include "rgem/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "rgem/errors.hpp"
#include "rgem/spd.hpp"

namespace rgem {

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 int clusters) {
  if (truth.size() != predicted.size())
    throw DimensionError("confusion_matrix: label vectors differ in length");
  if (clusters < 1) throw DomainError("confusion_matrix: clusters must be >= 1");
  ConfusionMatrix c = ConfusionMatrix::Zero(clusters, clusters);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= clusters || predicted[i] < 0 || predicted[i] >= clusters)
      throw DomainError("confusion_matrix: label outside [0, K)");
    ++c(truth[i], predicted[i]);
  }
  return c;
}

Matching best_matching_bruteforce(const ConfusionMatrix& c) {
  const auto k = static_cast<int>(c.rows());
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  Matching best;
  best.matched = -1;
  do {
    long long total = 0;
    for (int r = 0; r < k; ++r) total += c(r, perm[static_cast<std::size_t>(r)]);
    if (total > best.matched) {
      best.matched = total;
      best.perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

Matching best_matching_hungarian(const ConfusionMatrix& c) {
  // Minimizes cost = -count with potentials; rows and columns 1-based, 0 is a sentinel.
  const auto k = static_cast<std::size_t>(c.rows());
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<long long> u(k + 1, 0), v(k + 1, 0);
  std::vector<std::size_t> match_col(k + 1, 0), way(k + 1, 0);
  for (std::size_t row = 1; row <= k; ++row) {
    match_col[0] = row;
    std::size_t col0 = 0;
    std::vector<long long> min_v(k + 1, inf);
    std::vector<bool> used(k + 1, false);
    do {
      used[col0] = true;
      const std::size_t row0 = match_col[col0];
      long long delta = inf;
      std::size_t col1 = 0;
      for (std::size_t col = 1; col <= k; ++col) {
        if (used[col]) continue;
        const long long cost = -c(static_cast<Eigen::Index>(row0 - 1), static_cast<Eigen::Index>(col - 1));
        const long long reduced = cost - u[row0] - v[col];
        if (reduced < min_v[col]) {
          min_v[col] = reduced;
          way[col] = col0;
        }
        if (min_v[col] < delta) {
          delta = min_v[col];
          col1 = col;
        }
      }
      for (std::size_t col = 0; col <= k; ++col) {
        if (used[col]) {
          u[match_col[col]] += delta;
          v[col] -= delta;
        } else {
          min_v[col] -= delta;
        }
      }
      col0 = col1;
    } while (match_col[col0] != 0);
    do {
      const std::size_t col1 = way[col0];
      match_col[col0] = match_col[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  Matching out;
  out.perm.assign(k, 0);
  for (std::size_t col = 1; col <= k; ++col) {
    const std::size_t row = match_col[col] - 1;
    out.perm[row] = static_cast<int>(col - 1);
    out.matched += c(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col - 1));
  }
  return out;
}

AccuracyResult clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted,
                                   int clusters) {
  if (truth.empty()) throw DimensionError("clustering_accuracy: no labels");
  const ConfusionMatrix c = confusion_matrix(truth, predicted, clusters);
  const Matching m = clusters <= 8 ? best_matching_bruteforce(c) : best_matching_hungarian(c);
  return {static_cast<double>(m.matched) / static_cast<double>(truth.size()), m.perm};
}

ClusterConditioning conditioning(const Eigen::MatrixXd& sigma) {
  const auto ext = eig_extremes(sigma);
  ClusterConditioning out{ext.min_eig, ext.max_eig, std::numeric_limits<double>::infinity()};
  if (ext.min_eig > 0.0) out.condition_number = ext.max_eig / ext.min_eig;
  return out;
}

std::vector<ClusterConditioning> conditioning_report(const MixtureParams& params) {
  std::vector<ClusterConditioning> out;
  out.reserve(params.covariances.size());
  for (const auto& sigma : params.covariances) out.push_back(conditioning(sigma.matrix()));
  return out;
}

}  // namespace rgem
