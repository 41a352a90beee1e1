#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rgem/cv.hpp"
#include "rgem/data_matrix.hpp"
#include "rgem/kmeans.hpp"
#include "rgem/metrics.hpp"
#include "rgem/model.hpp"

namespace rgem {

enum class EmVariant { classical, regularized };

struct EmConfig {
  EmVariant variant = EmVariant::regularized;
  int max_iter = 40;
  /// Ridge added to every classical covariance update.
  double epsilon = 1e-4;
  /// Iterations between scale/target/penalty refreshes (regularized only).
  int refresh_period = 10;
  /// Early stop on |delta l| / |l| < rel_tol; 0 runs all max_iter iterations.
  double rel_tol = 1e-6;
  /// Responsibility mass below n * floor marks a cluster empty; default 1 / (2n).
  std::optional<double> min_weight_floor;
  /// Keep an emptied cluster's previous moments instead of throwing EmptyClusterError.
  bool repair_empty_clusters = true;

  void validate() const;
};

/// n x K posterior membership probabilities; rows sum to one.
using Responsibilities = Eigen::MatrixXd;

struct EStepResult {
  Responsibilities resp;
  double log_likelihood = 0.0;
};

EStepResult e_step_with_likelihood(const DataMatrix& x, const MixtureParams& params);

Responsibilities e_step(const DataMatrix& x, const MixtureParams& params);

/// argmax_k p_ik per row, ties to the lowest k.
std::vector<int> hard_labels(const Responsibilities& resp);

/// One-hot responsibilities of a hard labelling.
Responsibilities one_hot(const std::vector<int>& labels, int clusters);

/// beta_k = n pi_k / (eta_k + n pi_k).
Eigen::VectorXd shrinkage_coefficients(const Eigen::VectorXd& weights, Eigen::Index n,
                                       const Eigen::VectorXd& penalties);

/// pi, mu and Sigma = weighted scatter + epsilon * I.
MixtureParams m_step_classical(const DataMatrix& x, const Responsibilities& resp, double epsilon,
                               double min_weight_floor = 0.0);

/// pi, mu and Sigma = beta * weighted scatter + (1 - beta) * T.
MixtureParams m_step_regularized(const DataMatrix& x, const Responsibilities& resp,
                                 const RegularizationState& reg, double min_weight_floor = 0.0);

/// Chooses eta for one cluster from its hard index set and scale.
/// `refresh` counts selection rounds within one fit, starting at 0.
using EtaSelector = std::function<double(const DataMatrix& x, const std::vector<Eigen::Index>& rows,
                                         double scale, int cluster, int refresh)>;

/// Cross-validated selector; folds are reshuffled per (cluster, refresh).
/// A cluster too small to cross-validate gets the largest candidate.
EtaSelector make_cv_selector(const CvConfig& cfg);

struct IterationSnapshot {
  int iteration = 0;
  bool refreshed = false;
  bool repaired = false;
  const MixtureParams& params;
  const RegularizationState& reg;
  const Eigen::VectorXd& betas;
  double penalized_ll = 0.0;
};

using IterationObserver = std::function<void(const IterationSnapshot&)>;

struct EmFitResult {
  MixtureParams params;
  Responsibilities resp;
  std::vector<int> hard_labels;
  int iterations_run = 0;
  /// Penalized log-likelihood after the M-step of each iteration.
  std::vector<double> penalized_ll_trace;
  /// True where the iteration started with a scale/target/penalty refresh.
  std::vector<bool> refresh_marks;
  RegularizationState reg;
  Eigen::VectorXd betas;
  std::vector<ClusterConditioning> conditioning;
  std::vector<int> repaired_iterations;
};

/// Runs EM from the hard K-means clustering in `init`.
///
/// The first iteration performs an M-step on the one-hot K-means
/// responsibilities. For the regularized variant, the penalties are chosen by
/// `selector` before iteration 1 and, every refresh_period iterations, the
/// hard index sets, scales theta_k = tr(Sigma_k)/m and targets theta_k * I
/// are recomputed before the penalties are selected again. An empty selector
/// freezes the penalties at init.reg.penalties.
EmFitResult fit(const DataMatrix& x, const EmConfig& cfg, const MixtureInit& init,
                const EtaSelector& selector = {}, const IterationObserver& observer = {});

/// Cluster assignment of new points under fitted parameters.
std::vector<int> predict(const DataMatrix& x, const MixtureParams& params);

}  // namespace rgem
