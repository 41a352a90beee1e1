#include "rgem/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "rgem/errors.hpp"
#include "rgem/rng.hpp"

namespace rgem {
namespace {

std::size_t count_distinct_rows(const Eigen::MatrixXd& x) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto less = [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      if (x(a, c) != x(b, c)) return x(a, c) < x(b, c);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  std::size_t distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

// Squared distances from every row to every centroid (n x K).
Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids) {
  Eigen::MatrixXd d(x.rows(), centroids.rows());
  for (Eigen::Index k = 0; k < centroids.rows(); ++k) {
    d.col(k) = (x.rowwise() - centroids.row(k)).rowwise().squaredNorm();
  }
  return d;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& x, int clusters, Rng& rng) {
  const auto n = x.rows();
  Eigen::MatrixXd centroids(clusters, x.cols());
  centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n))));
  Eigen::VectorXd closest = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int k = 1; k < clusters; ++k) {
    Eigen::Index pick;
    if (closest.sum() > 0.0) {
      pick = static_cast<Eigen::Index>(rng.categorical(closest));
    } else {
      pick = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    }
    centroids.row(k) = x.row(pick);
    closest = closest.cwiseMin((x.rowwise() - centroids.row(k)).rowwise().squaredNorm());
  }
  return centroids;
}

struct Assignment {
  std::vector<int> labels;
  Eigen::VectorXd distances;  // squared distance to the assigned centroid
  double inertia = 0.0;
};

Assignment assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids) {
  const Eigen::MatrixXd d = squared_distances(x, centroids);
  Assignment a;
  a.labels.resize(static_cast<std::size_t>(x.rows()));
  a.distances.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best;
    a.distances(i) = d.row(i).minCoeff(&best);
    a.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  a.inertia = a.distances.sum();
  return a;
}

HardClustering lloyd(const Eigen::MatrixXd& x, const KMeansConfig& cfg, double tol_abs, Rng& rng) {
  const int k_count = cfg.clusters;
  HardClustering out;
  out.centroids = kmeans_plus_plus(x, k_count, rng);
  Assignment a = assign(x, out.centroids);
  out.inertia_history.push_back(a.inertia);

  for (int iter = 1; iter <= cfg.max_iter; ++iter) {
    out.iterations = iter;
    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(k_count, x.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k_count);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const int l = a.labels[static_cast<std::size_t>(i)];
      updated.row(l) += x.row(i);
      counts(l) += 1.0;
    }
    // Empty clusters take the point farthest from its current centroid.
    Eigen::VectorXd distances = a.distances;
    for (int k = 0; k < k_count; ++k) {
      if (counts(k) > 0.0) {
        updated.row(k) /= counts(k);
        continue;
      }
      Eigen::Index far;
      distances.maxCoeff(&far);
      updated.row(k) = x.row(far);
      distances(far) = 0.0;
    }
    const double shift = (updated - out.centroids).squaredNorm();
    out.centroids = std::move(updated);
    Assignment next = assign(x, out.centroids);
    out.inertia_history.push_back(next.inertia);
    const bool same_labels = next.labels == a.labels;
    a = std::move(next);
    if (same_labels || shift <= tol_abs) break;
  }
  out.labels = std::move(a.labels);
  out.inertia = a.inertia;
  return out;
}

}  // namespace

void KMeansConfig::validate() const {
  if (clusters < 1) throw ConfigError("kmeans: clusters must be >= 1");
  if (n_init < 1) throw ConfigError("kmeans: n_init must be >= 1");
  if (max_iter < 1) throw ConfigError("kmeans: max_iter must be >= 1");
  if (tol < 0.0) throw ConfigError("kmeans: tol must be >= 0");
}

HardClustering kmeans_fit(const DataMatrix& data, const KMeansConfig& cfg) {
  cfg.validate();
  const Eigen::MatrixXd& x = data.values();
  if (x.rows() < cfg.clusters) throw DegenerateDataError("kmeans: fewer rows than clusters");
  if (count_distinct_rows(x) < static_cast<std::size_t>(cfg.clusters))
    throw DegenerateDataError("kmeans: fewer distinct rows than clusters");

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const double mean_variance =
      (x.rowwise() - mean).colwise().squaredNorm().mean() / static_cast<double>(x.rows());
  const double tol_abs = cfg.tol * mean_variance;

  HardClustering best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < cfg.n_init; ++r) {
    Rng rng(derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)}));
    HardClustering run = lloyd(x, cfg, tol_abs, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best;
}

ClusterIndexSets index_sets(const std::vector<int>& labels, int clusters) {
  ClusterIndexSets sets(static_cast<std::size_t>(clusters));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= clusters) throw DomainError("label outside [0, K)");
    sets[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
  }
  return sets;
}

Eigen::MatrixXd sample_covariance(const DataMatrix& x, const std::vector<Eigen::Index>& rows) {
  if (rows.empty()) throw DegenerateDataError("sample_covariance: no rows");
  Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(x.m());
  for (auto i : rows) mean += x.row(i);
  mean /= static_cast<double>(rows.size());
  Eigen::MatrixXd centered(static_cast<Eigen::Index>(rows.size()), x.m());
  for (std::size_t r = 0; r < rows.size(); ++r)
    centered.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]) - mean;
  return centered.transpose() * centered / static_cast<double>(rows.size());
}

MixtureInit init_from_kmeans(const DataMatrix& x, const HardClustering& hc, double ridge) {
  if (static_cast<Eigen::Index>(hc.labels.size()) != x.n())
    throw DimensionError("init_from_kmeans: label count does not match data");
  const int k_count = hc.num_clusters();
  const auto m = x.m();
  MixtureInit init;
  init.labels = hc.labels;
  init.index_sets = index_sets(hc.labels, k_count);
  init.params.weights.resize(k_count);
  Eigen::VectorXd scales(k_count);
  for (int k = 0; k < k_count; ++k) {
    const auto& rows = init.index_sets[static_cast<std::size_t>(k)];
    if (rows.size() < 2)
      throw DegenerateDataError("init_from_kmeans: cluster " + std::to_string(k) +
                                " has fewer than 2 points");
    init.params.weights(k) = static_cast<double>(rows.size()) / static_cast<double>(x.n());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
    for (auto i : rows) mean += x.row(i).transpose();
    mean /= static_cast<double>(rows.size());
    init.params.means.push_back(std::move(mean));

    SpdMatrixd sigma(sample_covariance(x, rows));
    if (!sigma.definite()) {
      sigma = SpdMatrixd(sigma.matrix() + ridge * Eigen::MatrixXd::Identity(m, m));
      if (!sigma.definite())
        throw DegenerateDataError("init_from_kmeans: covariance of cluster " + std::to_string(k) +
                                  " stays indefinite after ridge");
    }
    scales(k) = sigma.matrix().trace() / static_cast<double>(m);
    init.params.covariances.push_back(std::move(sigma));
  }
  init.reg = RegularizationState::identity_targets(scales, m);
  return init;
}

}  // namespace rgem
