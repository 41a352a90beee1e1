#include "rgem/cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rgem/errors.hpp"
#include "rgem/rng.hpp"
#include "rgem/spd.hpp"

namespace rgem {
namespace {

struct Scatter {
  Eigen::MatrixXd matrix;
  std::size_t count = 0;
};

Scatter centered_scatter(const DataMatrix& x, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd block(static_cast<Eigen::Index>(rows.size()), x.m());
  for (std::size_t r = 0; r < rows.size(); ++r)
    block.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  block.rowwise() -= block.colwise().mean();
  return {block.transpose() * block / static_cast<double>(rows.size()), rows.size()};
}

}  // namespace

void CvConfig::validate() const {
  if (folds < 2) throw ConfigError("cv: folds must be >= 2");
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (!(grid[j] >= 0.0) || !std::isfinite(grid[j]))
      throw ConfigError("cv: grid values must be finite and >= 0");
    if (j > 0 && !(grid[j] > grid[j - 1])) throw ConfigError("cv: grid must be strictly ascending");
  }
}

std::vector<double> default_grid(std::size_t cluster_size) {
  if (cluster_size == 0) throw DomainError("default_grid: cluster size must be >= 1");
  std::vector<double> grid{0.0};
  const double size = static_cast<double>(cluster_size);
  for (int half_steps = -6; half_steps <= 6; ++half_steps) {
    grid.push_back(size * std::pow(10.0, 0.5 * half_steps));
  }
  return grid;
}

std::vector<std::vector<Eigen::Index>> make_folds(std::vector<Eigen::Index> indices, int folds,
                                                  std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(std::span<Eigen::Index>(indices));
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(folds));
  const std::size_t n = indices.size();
  const auto l_count = static_cast<std::size_t>(folds);
  for (std::size_t l = 0; l < l_count; ++l) {
    const std::size_t begin = l * n / l_count;
    const std::size_t end = (l + 1) * n / l_count;
    out[l].assign(indices.begin() + static_cast<std::ptrdiff_t>(begin),
                  indices.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

CvReport select_eta(const DataMatrix& x, const std::vector<Eigen::Index>& cluster_rows,
                    double scale, const CvConfig& cfg) {
  cfg.validate();
  if (!(scale > 0.0)) throw DomainError("select_eta: scale must be positive");
  if (cluster_rows.size() < static_cast<std::size_t>(cfg.folds))
    throw InsufficientDataError("select_eta: cluster has fewer points than folds");

  CvReport report;
  report.candidates = cfg.grid.empty() ? default_grid(cluster_rows.size()) : cfg.grid;
  if (cfg.positive_only) std::erase(report.candidates, 0.0);
  if (report.candidates.empty()) throw ConfigError("cv: no candidate penalties");
  const std::size_t j_count = report.candidates.size();
  const auto m = x.m();

  const auto folds = make_folds(cluster_rows, cfg.folds, cfg.seed);
  for (const auto& fold : folds) {
    if (fold.size() < 2) throw InsufficientDataError("select_eta: a fold has fewer than 2 points");
  }

  report.total_error.assign(j_count, 0.0);
  const Eigen::MatrixXd target = scale * Eigen::MatrixXd::Identity(m, m);
  for (std::size_t l = 0; l < folds.size(); ++l) {
    std::vector<Eigen::Index> train;
    for (std::size_t o = 0; o < folds.size(); ++o) {
      if (o != l) train.insert(train.end(), folds[o].begin(), folds[o].end());
    }
    const Scatter validation = centered_scatter(x, folds[l]);
    const Scatter training = centered_scatter(x, train);
    const double n_tr = static_cast<double>(training.count);

    std::vector<double> fold_error(j_count);
    for (std::size_t j = 0; j < j_count; ++j) {
      const double eta = report.candidates[j];
      const SpdMatrixd blended((n_tr / (eta + n_tr)) * training.matrix +
                               (eta / (eta + n_tr)) * target);
      if (!blended.definite()) {
        fold_error[j] = std::numeric_limits<double>::infinity();
      } else {
        fold_error[j] = trace_solve(blended, validation.matrix) + log_det(blended);
      }
      report.total_error[j] += fold_error[j];
    }
    report.per_fold_error.push_back(std::move(fold_error));
  }

  bool found = false;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < j_count; ++j) {
    const double err = report.total_error[j];
    if (!std::isfinite(err)) {
      ++report.rejected_candidates;
      continue;
    }
    if (!found || err <= best) {
      best = err;
      report.chosen_index = j;
      found = true;
    }
  }
  if (!found) throw AllCandidatesIndefiniteError("select_eta: no candidate produced a definite estimate");
  report.chosen_eta = report.candidates[report.chosen_index];
  return report;
}

}  // namespace rgem
