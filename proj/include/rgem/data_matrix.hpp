#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace rgem {

using Labels = std::vector<int>;

/// n observations in R^m stored one per row, with optional ground truth.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Eigen::MatrixXd values, std::optional<Labels> labels = std::nullopt);

  Eigen::Index n() const { return values_.rows(); }
  Eigen::Index m() const { return values_.cols(); }

  const Eigen::MatrixXd& values() const { return values_; }
  auto row(Eigen::Index i) const { return values_.row(i); }

  bool has_labels() const { return labels_.has_value(); }
  const Labels& labels() const;
  /// 1 + largest label; 0 without labels.
  int num_classes() const;

  /// Rows at `indices`, in that order, labels carried along.
  DataMatrix select(const std::vector<Eigen::Index>& indices) const;

 private:
  Eigen::MatrixXd values_;
  std::optional<Labels> labels_;
};

}  // namespace rgem
