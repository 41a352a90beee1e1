#include "rgem/data_matrix.hpp"

#include <algorithm>

#include "rgem/errors.hpp"

namespace rgem {

DataMatrix::DataMatrix(Eigen::MatrixXd values, std::optional<Labels> labels)
    : values_(std::move(values)), labels_(std::move(labels)) {
  if (!values_.allFinite()) throw DomainError("DataMatrix: values contain NaN or Inf");
  if (labels_) {
    if (static_cast<Eigen::Index>(labels_->size()) != values_.rows())
      throw DimensionError("DataMatrix: label count does not match row count");
    if (std::any_of(labels_->begin(), labels_->end(), [](int l) { return l < 0; }))
      throw DomainError("DataMatrix: negative label");
  }
}

const Labels& DataMatrix::labels() const {
  if (!labels_) throw SchemaError("DataMatrix: no labels attached");
  return *labels_;
}

int DataMatrix::num_classes() const {
  if (!labels_ || labels_->empty()) return 0;
  return *std::max_element(labels_->begin(), labels_->end()) + 1;
}

DataMatrix DataMatrix::select(const std::vector<Eigen::Index>& indices) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), m());
  std::optional<Labels> out_labels;
  if (labels_) out_labels.emplace(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = values_.row(indices[r]);
    if (labels_) (*out_labels)[r] = (*labels_)[static_cast<std::size_t>(indices[r])];
  }
  return DataMatrix(std::move(out), std::move(out_labels));
}

}  // namespace rgem
