#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "rgem/data_matrix.hpp"

namespace rgem {

struct CvConfig {
  int folds = 5;
  /// Ascending candidate penalties. Empty means default_grid(|D|) per call.
  std::vector<double> grid;
  /// Drop eta = 0 from the candidates (an unpenalized covariance can be singular).
  bool positive_only = false;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CvReport {
  double chosen_eta = 0.0;
  std::size_t chosen_index = 0;
  std::vector<double> candidates;
  /// Err(eta_j) summed over folds; +inf for candidates that failed to factorize.
  std::vector<double> total_error;
  /// per_fold_error[l][j].
  std::vector<std::vector<double>> per_fold_error;
  std::size_t rejected_candidates = 0;
};

/// {0} together with cluster_size * 10^g for g = -3, -2.5, ..., 3.
std::vector<double> default_grid(std::size_t cluster_size);

/// Splits indices into `folds` near-equal disjoint parts after a seeded shuffle.
std::vector<std::vector<Eigen::Index>> make_folds(std::vector<Eigen::Index> indices, int folds,
                                                  std::uint64_t seed);

/// L-fold cross-validation of the shrinkage penalty for one cluster.
///
/// For every fold the validation scatter S_val and the training scatter are
/// formed around their own fold means. Each candidate eta blends the training
/// scatter with the target theta * I as
///   (n_tr / (eta + n_tr)) * Sigma + (eta / (eta + n_tr)) * theta * I
/// and accumulates tr(Sigma_eta^{-1} S_val) + log|Sigma_eta| into Err(eta).
/// The smallest finite Err wins; ties go to the larger eta.
CvReport select_eta(const DataMatrix& x, const std::vector<Eigen::Index>& cluster_rows,
                    double scale, const CvConfig& cfg);

}  // namespace rgem
