#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "rgem/data_matrix.hpp"
#include "rgem/spd.hpp"

namespace rgem {

/// Toeplitz covariance with entries rho^|i-j|.
SpdMatrixd ar1_covariance(double rho, Eigen::Index dim);

struct SyntheticSpec {
  int clusters = 3;
  /// Empty means uniform priors.
  std::vector<double> priors;
  double mean_radius = 2.0;
  /// One AR(1) coefficient per cluster.
  std::vector<double> rho{0.8, 0.5, 0.2};
  Eigen::Index n = 500;
  Eigen::Index m = 10;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<double> effective_priors() const;
};

struct SyntheticData {
  DataMatrix data;
  std::vector<Eigen::VectorXd> means;
};

/// Mixture sample: means uniform on the radius sphere, x = mu + L z.
SyntheticData generate_gmm(const SyntheticSpec& spec);

enum class ImputePolicy { drop_row, median };

struct CsvSchema {
  /// Column name or integer index (negative counts from the end). Empty: no labels.
  std::string label_column;
  /// Columns (names or indices) discarded before conversion, e.g. row IDs.
  std::vector<std::string> drop_columns;
  std::string missing_token = "?";
  ImputePolicy impute = ImputePolicy::median;
  /// Unset: a first row that does not parse as numbers is treated as a header.
  std::optional<bool> header;
  char delimiter = ',';
};

struct IngestionReport {
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
  std::size_t values_imputed = 0;
  std::vector<std::string> column_names;
  /// class_names[l] is the raw token mapped to label l.
  std::vector<std::string> class_names;
};

struct LoadedCsv {
  DataMatrix data;
  IngestionReport report;
};

LoadedCsv load_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// load_csv on in-memory text.
LoadedCsv parse_csv(const std::string& text, const CsvSchema& schema);

/// Writes values with labels as the last column, header x0..x{m-1},label.
void write_csv(const std::filesystem::path& path, const DataMatrix& data);

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;        // m x d, orthonormal columns
  Eigen::VectorXd eigenvalues;  // all m (or min(n-1, m)) sample-covariance eigenvalues, descending
  double retained_ratio = 0.0;
  Eigen::Index components = 0;

  DataMatrix transform(const DataMatrix& x) const;
  Eigen::MatrixXd reconstruct(const Eigen::MatrixXd& scores) const;
  void save(const std::filesystem::path& path) const;
};

/// Smallest d with cumulative explained variance >= threshold.
PcaModel pca_fit(const DataMatrix& x, double variance_threshold);

struct PcaResult {
  PcaModel model;
  DataMatrix projected;
};

PcaResult pca_fit_transform(const DataMatrix& x, double variance_threshold);

struct TrainTest {
  DataMatrix train;
  DataMatrix test;
  std::vector<Eigen::Index> train_rows;
  std::vector<Eigen::Index> test_rows;
};

/// Stratified split with floor(fraction * n) training rows.
TrainTest split_train_test(const DataMatrix& x, double train_fraction, std::uint64_t seed);

/// Stratified subsample keeping floor(keep_fraction * n) rows.
DataMatrix subsample(const DataMatrix& train, double keep_fraction, std::uint64_t seed);

}  // namespace rgem
