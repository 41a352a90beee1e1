#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rgem/cv.hpp"
#include "rgem/data.hpp"
#include "rgem/em.hpp"
#include "rgem/kmeans.hpp"

namespace rgem {

enum class ExperimentKind { synthetic_dim_sweep, real_accuracy, real_starvation, single_fit };
enum class Method { kmeans, gem, rgem };

std::string to_string(Method method);
Method parse_method(const std::string& name);
std::string to_string(ExperimentKind kind);

enum class PcaFit { full, train };

struct DatasetConfig {
  std::filesystem::path path;
  std::string tag;
  CsvSchema schema;
  /// Retained-variance threshold; 0 disables the reduction.
  double pca_variance = 0.95;
  PcaFit pca_fit = PcaFit::full;
};

struct ExperimentConfig {
  std::optional<ExperimentKind> kind;
  std::vector<Method> methods{Method::kmeans, Method::gem, Method::rgem};
  KMeansConfig kmeans;
  EmConfig gem;
  EmConfig rgem;
  CvConfig cv;
  SyntheticSpec synthetic;
  std::optional<DatasetConfig> dataset;
  std::vector<Eigen::Index> dims{10, 40, 70, 100};
  std::vector<double> keep_fractions{1.0, 0.7, 0.4, 0.1};
  int repetitions = 1;
  double train_fraction = 0.7;
  int resplit_every = 10;
  std::uint64_t base_seed = 0;
  /// false writes wall_ms = 0 so repeated runs give byte-identical files.
  bool record_wall_time = true;
  std::filesystem::path output = "results.csv";

  ExperimentConfig();
  void validate(ExperimentKind as) const;
};

/// Flat INI-style text: [experiment], [synthetic], [dataset], [kmeans], [gem], [rgem].
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

struct ExperimentRecord {
  Method method = Method::kmeans;
  std::string dataset;
  Eigen::Index m = 0;
  Eigen::Index n_train = 0;
  double keep_fraction = 1.0;
  int run = 0;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  int iterations = 0;
  double wall_ms = 0.0;
  double min_cond = 0.0;
  double max_cond = 0.0;
  std::vector<double> etas;
  bool failed = false;
  std::string error;
  /// Position on the experiment's grid (dimension or keep-fraction index).
  int grid_index = 0;
};

/// Seed of run `run` at grid point `grid`: derive_seed(base, {grid, run}).
std::uint64_t run_seed(std::uint64_t base, int grid, int run);

/// Train/test split used by run `run` of a real-data experiment: run / resplit_every.
int split_index_for_run(int run, int resplit_every);
/// Seed of split `split_index`: derive_seed(base, {0x5eed5, split_index}).
std::uint64_t split_seed(std::uint64_t base, int split_index);

std::vector<ExperimentRecord> run_synthetic_sweep(const ExperimentConfig& cfg);
std::vector<ExperimentRecord> run_real_accuracy(const ExperimentConfig& cfg);
std::vector<ExperimentRecord> run_real_starvation(const ExperimentConfig& cfg);

/// Loads the configured dataset and applies the full-data PCA when configured.
struct PreparedDataset {
  DataMatrix data;
  IngestionReport report;
  std::optional<PcaModel> pca;
};
PreparedDataset prepare_dataset(const DatasetConfig& cfg);

/// Outcome of fitting one method on a training set and labelling an evaluation set.
struct MethodRun {
  std::vector<int> eval_labels;
  int iterations = 0;
  double wall_ms = 0.0;
  std::vector<ClusterConditioning> conditioning;
  std::vector<double> etas;
  std::optional<EmFitResult> em;
  HardClustering kmeans;
};

/// Fits every method in `methods` from one shared K-means initialization.
/// `eval` may alias `train`; evaluation labels come from the nearest centroid
/// (kmeans) or a single E-step + argmax (EM variants).
std::vector<MethodRun> run_methods(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                                   const DataMatrix& train, const DataMatrix& eval, int clusters,
                                   std::uint64_t seed);

struct SummaryRow {
  Method method = Method::kmeans;
  std::string dataset;
  Eigen::Index m = 0;
  double keep_fraction = 1.0;
  std::size_t count = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double median = 0.0;
  double stddev = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records);

std::string format_records_csv(const std::vector<ExperimentRecord>& records);
std::string format_summary_csv(const std::vector<SummaryRow>& rows);

/// Companion summary path: results.csv -> results.summary.csv.
std::filesystem::path summary_path(const std::filesystem::path& path);

/// Writes the records file and its summary companion.
void emit_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path);

}  // namespace rgem
