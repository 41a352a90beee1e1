#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rgem/data_matrix.hpp"
#include "rgem/model.hpp"

namespace rgem {

struct KMeansConfig {
  int clusters = 2;
  int n_init = 10;
  int max_iter = 200;
  /// Stop when the summed squared centroid shift is <= tol * mean feature variance.
  double tol = 1e-4;
  std::uint64_t seed = 0;
  /// Ridge added to indefinite initial covariances in init_from_kmeans.
  double ridge = 1e-4;

  void validate() const;
};

struct HardClustering {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // K x m
  double inertia = 0.0;
  int iterations = 0;
  /// Inertia after every assignment step of the retained restart.
  std::vector<double> inertia_history;

  int num_clusters() const { return static_cast<int>(centroids.rows()); }
};

/// Best of cfg.n_init k-means++ seeded Lloyd runs, by inertia.
HardClustering kmeans_fit(const DataMatrix& x, const KMeansConfig& cfg);

/// Index sets D_k, one per cluster, in ascending row order.
using ClusterIndexSets = std::vector<std::vector<Eigen::Index>>;

ClusterIndexSets index_sets(const std::vector<int>& labels, int clusters);

struct MixtureInit {
  MixtureParams params;
  RegularizationState reg;
  ClusterIndexSets index_sets;
  std::vector<int> labels;
};

/// Moments of each hard cluster; targets T_k = (tr(Sigma_k)/m) I, eta_k = 0.
MixtureInit init_from_kmeans(const DataMatrix& x, const HardClustering& hc, double ridge = 1e-4);

/// Maximum-likelihood (1/n) covariance of the given rows about their mean.
Eigen::MatrixXd sample_covariance(const DataMatrix& x, const std::vector<Eigen::Index>& rows);

}  // namespace rgem
