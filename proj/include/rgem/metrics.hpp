#pragma once

#include <vector>

#include <Eigen/Core>

#include "rgem/model.hpp"

namespace rgem {

/// K x K counts; rows are true classes, columns predicted clusters.
using ConfusionMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

ConfusionMatrix confusion_matrix(const std::vector<int>& truth, const std::vector<int>& predicted,
                                 int clusters);

/// Column permutation maximizing the diagonal: perm[k] is the predicted
/// cluster matched to true class k.
struct Matching {
  std::vector<int> perm;
  long long matched = 0;
};

/// Exhaustive search over K! permutations; lexicographically smallest argmax.
Matching best_matching_bruteforce(const ConfusionMatrix& c);

/// Hungarian (Kuhn-Munkres) optimal assignment, O(K^3).
Matching best_matching_hungarian(const ConfusionMatrix& c);

struct AccuracyResult {
  double accuracy = 0.0;
  std::vector<int> perm;
};

/// Fraction of points labelled correctly after the best relabelling of
/// predicted clusters. Brute force for K <= 8, Hungarian above.
AccuracyResult clustering_accuracy(const std::vector<int>& truth, const std::vector<int>& predicted,
                                   int clusters);

struct ClusterConditioning {
  double min_eig = 0.0;
  double max_eig = 0.0;
  double condition_number = 0.0;  // +inf when min_eig <= 0
};

ClusterConditioning conditioning(const Eigen::MatrixXd& sigma);

std::vector<ClusterConditioning> conditioning_report(const MixtureParams& params);

}  // namespace rgem
