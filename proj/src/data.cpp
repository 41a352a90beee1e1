#include "rgem/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "rgem/errors.hpp"
#include "rgem/rng.hpp"

namespace rgem {

SpdMatrixd ar1_covariance(double rho, Eigen::Index dim) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("ar1_covariance: |rho| must be < 1");
  if (dim < 1) throw DomainError("ar1_covariance: dimension must be >= 1");
  Eigen::MatrixXd a(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      a(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
    }
  }
  return SpdMatrixd(a);
}

void SyntheticSpec::validate() const {
  if (clusters < 1) throw ConfigError("synthetic: clusters must be >= 1");
  if (n < 1 || m < 1) throw ConfigError("synthetic: n and m must be >= 1");
  if (!(mean_radius >= 0.0)) throw ConfigError("synthetic: mean_radius must be >= 0");
  if (static_cast<int>(rho.size()) != clusters)
    throw ConfigError("synthetic: need one rho per cluster");
  for (double r : rho) {
    if (!(std::abs(r) < 1.0)) throw DomainError("synthetic: |rho| must be < 1");
  }
  if (!priors.empty()) {
    if (static_cast<int>(priors.size()) != clusters)
      throw ConfigError("synthetic: need one prior per cluster");
    double total = 0.0;
    for (double p : priors) {
      if (!(p >= 0.0)) throw ConfigError("synthetic: priors must be >= 0");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ConfigError("synthetic: priors must sum to 1");
  }
}

std::vector<double> SyntheticSpec::effective_priors() const {
  if (!priors.empty()) return priors;
  return std::vector<double>(static_cast<std::size_t>(clusters), 1.0 / clusters);
}

SyntheticData generate_gmm(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  SyntheticData out;
  std::vector<Eigen::MatrixXd> factors;
  for (int k = 0; k < spec.clusters; ++k) {
    Eigen::VectorXd direction(spec.m);
    double norm = 0.0;
    do {
      for (Eigen::Index j = 0; j < spec.m; ++j) direction(j) = rng.normal();
      norm = direction.norm();
    } while (norm == 0.0);
    out.means.push_back(direction * (spec.mean_radius / norm));
    factors.push_back(cholesky(ar1_covariance(spec.rho[static_cast<std::size_t>(k)], spec.m)));
  }

  const auto priors = spec.effective_priors();
  Eigen::MatrixXd values(spec.n, spec.m);
  Labels labels(static_cast<std::size_t>(spec.n));
  Eigen::VectorXd z(spec.m);
  for (Eigen::Index i = 0; i < spec.n; ++i) {
    const auto k = rng.categorical(priors);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(k);
    for (Eigen::Index j = 0; j < spec.m; ++j) z(j) = rng.normal();
    values.row(i) = (out.means[k] + factors[k].triangularView<Eigen::Lower>() * z).transpose();
  }
  out.data = DataMatrix(std::move(values), std::move(labels));
  return out;
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  if (e - b >= 2 && s[b] == '"' && s[e - 1] == '"') {
    ++b;
    --e;
  }
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delimiter, start);
    fields.push_back(trim(std::string_view(line).substr(start, pos - start)));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::optional<double> parse_number(const std::string& token) {
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return value;
}

std::optional<long> parse_index(const std::string& token) {
  long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::size_t resolve_column(const std::string& spec, const std::vector<std::string>& names,
                           std::size_t columns) {
  if (auto idx = parse_index(spec)) {
    const long resolved = *idx < 0 ? static_cast<long>(columns) + *idx : *idx;
    if (resolved < 0 || resolved >= static_cast<long>(columns))
      throw SchemaError("column index " + spec + " out of range");
    return static_cast<std::size_t>(resolved);
  }
  const auto it = std::find(names.begin(), names.end(), spec);
  if (it == names.end()) throw SchemaError("column '" + spec + "' not found");
  return static_cast<std::size_t>(it - names.begin());
}

double median(std::vector<double> values) {
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

LoadedCsv parse_csv(const std::string& text, const CsvSchema& schema) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (trim(line).empty()) continue;
      rows.emplace_back(line_no, split_line(line, schema.delimiter));
    }
  }
  if (rows.empty()) throw ParseError(0, "no data rows");

  const std::size_t columns = rows.front().second.size();
  const bool label_by_name = !schema.label_column.empty() && !parse_index(schema.label_column);
  bool has_header = false;
  if (schema.header) {
    has_header = *schema.header;
  } else if (label_by_name) {
    has_header = true;
  } else {
    std::optional<std::size_t> label_idx;
    if (!schema.label_column.empty()) label_idx = resolve_column(schema.label_column, {}, columns);
    const auto& first = rows.front().second;
    for (std::size_t c = 0; c < first.size(); ++c) {
      if (label_idx && c == *label_idx) continue;
      if (first[c] != schema.missing_token && !parse_number(first[c])) has_header = true;
    }
  }

  IngestionReport report;
  if (has_header) {
    report.column_names = rows.front().second;
    rows.erase(rows.begin());
  } else {
    for (std::size_t c = 0; c < columns; ++c) report.column_names.push_back(std::to_string(c));
  }

  std::vector<bool> keep(columns, true);
  for (const auto& d : schema.drop_columns) keep[resolve_column(d, report.column_names, columns)] = false;
  std::optional<std::size_t> label_idx;
  if (!schema.label_column.empty()) {
    label_idx = resolve_column(schema.label_column, report.column_names, columns);
    keep[*label_idx] = false;
  }
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < columns; ++c) {
    if (keep[c]) feature_cols.push_back(c);
  }
  if (feature_cols.empty()) throw SchemaError("no feature columns left");

  const double missing = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::vector<double>> parsed;
  Labels labels;
  std::map<std::string, int> class_ids;
  report.rows_read = rows.size();
  for (const auto& [line_no, fields] : rows) {
    if (fields.size() != columns)
      throw ParseError(line_no, "expected " + std::to_string(columns) + " fields, got " +
                                    std::to_string(fields.size()));
    std::vector<double> values;
    bool has_missing = false;
    for (std::size_t c : feature_cols) {
      if (fields[c] == schema.missing_token) {
        values.push_back(missing);
        has_missing = true;
        continue;
      }
      auto v = parse_number(fields[c]);
      if (!v || !std::isfinite(*v))
        throw ParseError(line_no, "non-numeric value '" + fields[c] + "' in column " +
                                      report.column_names[c]);
      values.push_back(*v);
    }
    if (label_idx && fields[*label_idx] == schema.missing_token) {
      ++report.rows_dropped;
      continue;
    }
    if (has_missing && schema.impute == ImputePolicy::drop_row) {
      ++report.rows_dropped;
      continue;
    }
    if (label_idx) {
      const std::string& token = fields[*label_idx];
      auto [it, inserted] = class_ids.emplace(token, static_cast<int>(class_ids.size()));
      if (inserted) report.class_names.push_back(token);
      labels.push_back(it->second);
    }
    parsed.push_back(std::move(values));
  }
  if (parsed.empty()) throw ParseError(0, "every row was dropped");

  const auto n = static_cast<Eigen::Index>(parsed.size());
  const auto m = static_cast<Eigen::Index>(feature_cols.size());
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) x(i, j) = parsed[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  for (Eigen::Index j = 0; j < m; ++j) {
    std::vector<double> present;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!std::isnan(x(i, j))) present.push_back(x(i, j));
    }
    if (static_cast<Eigen::Index>(present.size()) == n) continue;
    if (present.empty()) throw SchemaError("column " + std::to_string(j) + " has no values");
    const double fill = median(std::move(present));
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::isnan(x(i, j))) {
        x(i, j) = fill;
        ++report.values_imputed;
      }
    }
  }

  std::optional<Labels> maybe_labels;
  if (label_idx) maybe_labels = std::move(labels);
  return {DataMatrix(std::move(x), std::move(maybe_labels)), std::move(report)};
}

LoadedCsv load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_csv(buffer.str(), schema);
}

void write_csv(const std::filesystem::path& path, const DataMatrix& data) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index j = 0; j < data.m(); ++j) out << (j ? "," : "") << 'x' << j;
  if (data.has_labels()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.m(); ++j) out << (j ? "," : "") << data.values()(i, j);
    if (data.has_labels()) out << ',' << data.labels()[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

DataMatrix PcaModel::transform(const DataMatrix& x) const {
  if (x.m() != mean.size()) throw DimensionError("pca: dimension mismatch");
  Eigen::MatrixXd scores = (x.values().rowwise() - mean.transpose()) * basis;
  if (x.has_labels()) return DataMatrix(std::move(scores), x.labels());
  return DataMatrix(std::move(scores));
}

Eigen::MatrixXd PcaModel::reconstruct(const Eigen::MatrixXd& scores) const {
  return (scores * basis.transpose()).rowwise() + mean.transpose();
}

void PcaModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  out << "# pca model\n";
  out << "dim " << mean.size() << "\ncomponents " << components << "\nretained_ratio "
      << retained_ratio << '\n';
  out << "mean";
  for (Eigen::Index j = 0; j < mean.size(); ++j) out << ' ' << mean(j);
  out << "\neigenvalues";
  for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) out << ' ' << eigenvalues(j);
  out << '\n';
  for (Eigen::Index c = 0; c < basis.cols(); ++c) {
    out << "basis " << c;
    for (Eigen::Index j = 0; j < basis.rows(); ++j) out << ' ' << basis(j, c);
    out << '\n';
  }
  if (!out) throw Error("write failed for " + path.string());
}

PcaModel pca_fit(const DataMatrix& x, double variance_threshold) {
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw DomainError("pca: threshold must be in (0, 1]");
  if (x.n() < 2) throw DegenerateDataError("pca: need at least 2 rows");
  PcaModel model;
  model.mean = x.values().colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.values().rowwise() - model.mean.transpose();
  const double denom = static_cast<double>(x.n() - 1);

  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  if (x.n() > x.m()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(centered.transpose() * centered / denom);
    values = solver.eigenvalues().reverse();
    vectors = solver.eigenvectors().rowwise().reverse();
  } else {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    values = svd.singularValues().array().square() / denom;
    vectors = svd.matrixV();
  }
  values = values.cwiseMax(0.0);
  const double total = values.sum();
  if (!(total > 0.0)) throw DegenerateDataError("pca: data has zero variance");

  double cumulative = 0.0;
  Eigen::Index d = 0;
  while (d < values.size()) {
    cumulative += values(d);
    ++d;
    if (cumulative / total >= variance_threshold - 1e-12) break;
  }
  model.components = d;
  model.retained_ratio = cumulative / total;
  model.eigenvalues = values;
  model.basis = vectors.leftCols(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index arg;
    model.basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (model.basis(arg, c) < 0.0) model.basis.col(c) *= -1.0;
  }
  return model;
}

PcaResult pca_fit_transform(const DataMatrix& x, double variance_threshold) {
  PcaModel model = pca_fit(x, variance_threshold);
  DataMatrix projected = model.transform(x);
  return {std::move(model), std::move(projected)};
}

namespace {

// Row indices per class (a single group without labels).
std::vector<std::vector<Eigen::Index>> strata(const DataMatrix& x) {
  const int groups = x.has_labels() ? std::max(1, x.num_classes()) : 1;
  std::vector<std::vector<Eigen::Index>> out(static_cast<std::size_t>(groups));
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    const int g = x.has_labels() ? x.labels()[static_cast<std::size_t>(i)] : 0;
    out[static_cast<std::size_t>(g)].push_back(i);
  }
  return out;
}

// Largest-remainder allocation of floor(fraction * n) rows over the strata.
std::vector<std::size_t> allocate(const std::vector<std::vector<Eigen::Index>>& groups,
                                  double fraction, std::size_t n) {
  const auto total = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> quota(groups.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double exact = fraction * static_cast<double>(groups[g].size());
    quota[g] = std::min(groups[g].size(), static_cast<std::size_t>(std::floor(exact + 1e-9)));
    assigned += quota[g];
    remainders.emplace_back(exact - static_cast<double>(quota[g]), g);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [rem, g] : remainders) {
    if (assigned >= total) break;
    if (quota[g] < groups[g].size()) {
      ++quota[g];
      ++assigned;
    }
  }
  return quota;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> stratified_pick(
    const DataMatrix& x, double fraction, std::uint64_t seed) {
  auto groups = strata(x);
  const auto quota = allocate(groups, fraction, static_cast<std::size_t>(x.n()));
  Rng rng(seed);
  std::vector<Eigen::Index> picked, rest;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    rng.shuffle(std::span<Eigen::Index>(groups[g]));
    picked.insert(picked.end(), groups[g].begin(), groups[g].begin() + static_cast<std::ptrdiff_t>(quota[g]));
    rest.insert(rest.end(), groups[g].begin() + static_cast<std::ptrdiff_t>(quota[g]), groups[g].end());
  }
  std::sort(picked.begin(), picked.end());
  std::sort(rest.begin(), rest.end());
  return {std::move(picked), std::move(rest)};
}

}  // namespace

TrainTest split_train_test(const DataMatrix& x, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DomainError("split_train_test: fraction must be in (0, 1)");
  auto [train_rows, test_rows] = stratified_pick(x, train_fraction, seed);
  TrainTest out{x.select(train_rows), x.select(test_rows), std::move(train_rows), std::move(test_rows)};
  return out;
}

DataMatrix subsample(const DataMatrix& train, double keep_fraction, std::uint64_t seed) {
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw DomainError("subsample: keep fraction must be in (0, 1]");
  if (keep_fraction == 1.0) return train;
  const auto groups = strata(train);
  const auto quota = allocate(groups, keep_fraction, static_cast<std::size_t>(train.n()));
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (!groups[g].empty() && quota[g] < 2)
      throw InsufficientDataError("subsample: class " + std::to_string(g) +
                                  " would keep fewer than 2 rows");
  }
  return train.select(stratified_pick(train, keep_fraction, seed).first);
}

}  // namespace rgem
