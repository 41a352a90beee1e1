#include "rgem/em.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "rgem/errors.hpp"
#include "rgem/rng.hpp"

namespace rgem {
namespace {

struct WeightedMoments {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> scatters;
  std::vector<bool> empty;
};

WeightedMoments weighted_moments(const DataMatrix& x, const Responsibilities& resp,
                                 double min_weight_floor) {
  const auto n = x.n();
  const auto k_count = resp.cols();
  if (resp.rows() != n) throw DimensionError("m_step: responsibilities have wrong row count");
  WeightedMoments out;
  out.weights.resize(k_count);
  out.empty.assign(static_cast<std::size_t>(k_count), false);
  const double mass_floor = static_cast<double>(n) * min_weight_floor;
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double mass = resp.col(k).sum();
    out.weights(k) = mass / static_cast<double>(n);
    if (!(mass > 0.0) || mass < mass_floor) {
      out.empty[static_cast<std::size_t>(k)] = true;
      out.means.emplace_back();
      out.scatters.emplace_back();
      continue;
    }
    const Eigen::VectorXd w = resp.col(k) / mass;
    Eigen::VectorXd mean = x.values().transpose() * w;
    const Eigen::MatrixXd centered = x.values().rowwise() - mean.transpose();
    out.scatters.push_back(centered.transpose() * w.asDiagonal() * centered);
    out.means.push_back(std::move(mean));
  }
  return out;
}

enum class Shrink { ridge, target };

struct MStepOutcome {
  MixtureParams params;
  Eigen::VectorXd betas;
  bool repaired = false;
};

MStepOutcome m_step_impl(const DataMatrix& x, const Responsibilities& resp, Shrink mode,
                         double epsilon, const RegularizationState* reg, double min_weight_floor,
                         const MixtureParams* fallback) {
  WeightedMoments mom = weighted_moments(x, resp, min_weight_floor);
  const auto k_count = resp.cols();
  const auto m = x.m();
  MStepOutcome out;
  out.betas = Eigen::VectorXd::Ones(k_count);
  if (mode == Shrink::target) {
    if (!reg || reg->num_clusters() != k_count)
      throw DimensionError("m_step_regularized: regularization state has wrong cluster count");
    out.betas = shrinkage_coefficients(mom.weights, x.n(), reg->penalties);
  }

  for (Eigen::Index k = 0; k < k_count; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    if (mom.empty[idx]) {
      if (!fallback)
        throw EmptyClusterError(idx, "cluster " + std::to_string(k) + " lost its responsibility mass");
      out.repaired = true;
      out.params.means.push_back(fallback->means[idx]);
      out.params.covariances.push_back(fallback->covariances[idx]);
      mom.weights(k) = min_weight_floor;
      continue;
    }
    Eigen::MatrixXd sigma;
    if (mode == Shrink::ridge) {
      sigma = mom.scatters[idx];
      sigma.diagonal().array() += epsilon;
    } else {
      sigma = out.betas(k) * mom.scatters[idx] + (1.0 - out.betas(k)) * reg->targets[idx].matrix();
    }
    if (sigma.rows() != m) throw DimensionError("m_step: dimension mismatch");
    out.params.means.push_back(std::move(mom.means[idx]));
    out.params.covariances.emplace_back(sigma);
  }
  if (out.repaired) mom.weights /= mom.weights.sum();
  out.params.weights = std::move(mom.weights);
  return out;
}

}  // namespace

void EmConfig::validate() const {
  if (max_iter < 1) throw ConfigError("em: max_iter must be >= 1");
  if (variant == EmVariant::classical && !(epsilon >= 0.0))
    throw ConfigError("em: epsilon must be >= 0");
  if (refresh_period < 1) throw ConfigError("em: refresh_period must be >= 1");
  if (!(rel_tol >= 0.0)) throw ConfigError("em: rel_tol must be >= 0");
  if (min_weight_floor && !(*min_weight_floor >= 0.0))
    throw ConfigError("em: min_weight_floor must be >= 0");
}

EStepResult e_step_with_likelihood(const DataMatrix& x, const MixtureParams& params) {
  const Eigen::MatrixXd log_dens = weighted_log_densities(x, params);
  const Eigen::VectorXd lse = log_sum_exp_rows(log_dens);
  EStepResult out;
  out.resp = (log_dens.colwise() - lse).array().exp();
  out.resp.array().colwise() /= out.resp.rowwise().sum().array();
  out.log_likelihood = lse.sum();
  return out;
}

Responsibilities e_step(const DataMatrix& x, const MixtureParams& params) {
  return e_step_with_likelihood(x, params).resp;
}

std::vector<int> hard_labels(const Responsibilities& resp) {
  std::vector<int> labels(static_cast<std::size_t>(resp.rows()), 0);
  for (Eigen::Index i = 0; i < resp.rows(); ++i) {
    int best = 0;
    for (Eigen::Index k = 1; k < resp.cols(); ++k) {
      if (resp(i, k) > resp(i, best)) best = static_cast<int>(k);
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

Responsibilities one_hot(const std::vector<int>& labels, int clusters) {
  Responsibilities p = Responsibilities::Zero(static_cast<Eigen::Index>(labels.size()), clusters);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= clusters) throw DomainError("one_hot: label outside [0, K)");
    p(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return p;
}

Eigen::VectorXd shrinkage_coefficients(const Eigen::VectorXd& weights, Eigen::Index n,
                                       const Eigen::VectorXd& penalties) {
  const Eigen::ArrayXd mass = weights.array() * static_cast<double>(n);
  return (mass / (penalties.array() + mass)).matrix();
}

MixtureParams m_step_classical(const DataMatrix& x, const Responsibilities& resp, double epsilon,
                               double min_weight_floor) {
  return m_step_impl(x, resp, Shrink::ridge, epsilon, nullptr, min_weight_floor, nullptr).params;
}

MixtureParams m_step_regularized(const DataMatrix& x, const Responsibilities& resp,
                                 const RegularizationState& reg, double min_weight_floor) {
  return m_step_impl(x, resp, Shrink::target, 0.0, &reg, min_weight_floor, nullptr).params;
}

EtaSelector make_cv_selector(const CvConfig& cfg) {
  cfg.validate();
  return [cfg](const DataMatrix& x, const std::vector<Eigen::Index>& rows, double scale,
               int cluster, int refresh) {
    CvConfig local = cfg;
    local.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(cluster),
                                        static_cast<std::uint64_t>(refresh)});
    try {
      return select_eta(x, rows, scale, local).chosen_eta;
    } catch (const InsufficientDataError&) {
      // Too few points to cross-validate: shrink fully toward the target.
      if (!local.grid.empty()) return local.grid.back();
      return default_grid(std::max<std::size_t>(rows.size(), 1)).back();
    }
  };
}

EmFitResult fit(const DataMatrix& x, const EmConfig& cfg, const MixtureInit& init,
                const EtaSelector& selector, const IterationObserver& observer) {
  cfg.validate();
  const auto n = x.n();
  const auto m = x.m();
  const int k_count = static_cast<int>(init.params.num_clusters());
  if (static_cast<Eigen::Index>(init.labels.size()) != n || init.params.dim() != m)
    throw DimensionError("fit: init does not match data");
  const bool regularized = cfg.variant == EmVariant::regularized;
  const double floor = cfg.min_weight_floor.value_or(0.5 / static_cast<double>(n));

  EmFitResult result;
  result.params = init.params;
  result.reg = init.reg;
  if (result.reg.num_clusters() != k_count)
    throw DimensionError("fit: regularization state has wrong cluster count");
  Responsibilities resp = one_hot(init.labels, k_count);
  int refresh_count = 0;
  double previous_ll = 0.0;

  for (int t = 1; t <= cfg.max_iter; ++t) {
    bool refreshed = false;
    if (regularized && (t - 1) % cfg.refresh_period == 0) {
      ClusterIndexSets sets = init.index_sets;
      if (t > 1) {
        sets = index_sets(hard_labels(resp), k_count);
        for (int k = 0; k < k_count; ++k) {
          const double scale =
              result.params.covariances[static_cast<std::size_t>(k)].matrix().trace() /
              static_cast<double>(m);
          result.reg.set_identity_target(k, scale, m);
        }
        refreshed = true;
      }
      if (selector) {
        for (int k = 0; k < k_count; ++k) {
          try {
            result.reg.penalties(k) = selector(x, sets[static_cast<std::size_t>(k)],
                                               result.reg.scales(k), k, refresh_count);
          } catch (const InsufficientDataError&) {
            // Too few points to cross-validate: keep the previous penalty.
          } catch (const AllCandidatesIndefiniteError&) {
          }
        }
      }
      ++refresh_count;
    }

    MStepOutcome step = m_step_impl(x, resp, regularized ? Shrink::target : Shrink::ridge,
                                    cfg.epsilon, &result.reg, floor,
                                    cfg.repair_empty_clusters ? &result.params : nullptr);
    result.params = std::move(step.params);
    result.betas = std::move(step.betas);
    if (step.repaired) result.repaired_iterations.push_back(t);

    EStepResult e = e_step_with_likelihood(x, result.params);
    resp = std::move(e.resp);
    const double ll =
        regularized ? e.log_likelihood - total_penalty(result.params, result.reg) : e.log_likelihood;
    result.penalized_ll_trace.push_back(ll);
    result.refresh_marks.push_back(refreshed);
    result.iterations_run = t;
    if (observer) {
      observer(IterationSnapshot{t, refreshed, step.repaired, result.params, result.reg,
                                 result.betas, ll});
    }
    if (t > 1 && !refreshed && cfg.rel_tol > 0.0 &&
        std::abs(ll - previous_ll) < cfg.rel_tol * std::abs(ll)) {
      break;
    }
    previous_ll = ll;
  }

  result.hard_labels = hard_labels(resp);
  result.resp = std::move(resp);
  result.conditioning = conditioning_report(result.params);
  return result;
}

std::vector<int> predict(const DataMatrix& x, const MixtureParams& params) {
  return hard_labels(e_step(x, params));
}

}  // namespace rgem
