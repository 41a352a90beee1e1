#include "rgem/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rgem/errors.hpp"
#include "rgem/metrics.hpp"
#include "rgem/rng.hpp"

namespace rgem {

std::string to_string(Method method) {
  switch (method) {
    case Method::kmeans: return "kmeans";
    case Method::gem: return "gem";
    case Method::rgem: return "rgem";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "kmeans") return Method::kmeans;
  if (name == "gem") return Method::gem;
  if (name == "rgem") return Method::rgem;
  throw ConfigError("unknown method '" + name + "'");
}

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::synthetic_dim_sweep: return "synthetic_dim_sweep";
    case ExperimentKind::real_accuracy: return "real_accuracy";
    case ExperimentKind::real_starvation: return "real_starvation";
    case ExperimentKind::single_fit: return "single_fit";
  }
  return "unknown";
}

namespace {

ExperimentKind parse_kind(const std::string& name) {
  if (name == "sweep-dim") return ExperimentKind::synthetic_dim_sweep;
  if (name == "real-acc") return ExperimentKind::real_accuracy;
  if (name == "real-starve") return ExperimentKind::real_starvation;
  if (name == "fit") return ExperimentKind::single_fit;
  for (auto k : {ExperimentKind::synthetic_dim_sweep, ExperimentKind::real_accuracy,
                 ExperimentKind::real_starvation, ExperimentKind::single_fit}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown experiment kind '" + name + "'");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected a number, got '" + text + "'");
  }
}

long long to_integer(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("'" + key + "': expected an integer, got '" + text + "'");
  }
}

bool to_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError("'" + key + "': expected true/false, got '" + text + "'");
}

std::vector<double> to_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) out.push_back(to_double(key, item));
  return out;
}

class Section {
 public:
  Section(const boost::property_tree::ptree* tree, std::string name)
      : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> get(const std::string& key) {
    if (!tree_) return std::nullopt;
    used_.push_back(key);
    auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return *v;
  }
  std::string qualified(const std::string& key) const { return name_ + "." + key; }

  void read(const std::string& key, double& out) {
    if (auto v = get(key)) out = to_double(qualified(key), *v);
  }
  void read(const std::string& key, int& out) {
    if (auto v = get(key)) out = static_cast<int>(to_integer(qualified(key), *v));
  }
  void read(const std::string& key, Eigen::Index& out) {
    if (auto v = get(key)) out = static_cast<Eigen::Index>(to_integer(qualified(key), *v));
  }
  void read(const std::string& key, bool& out) {
    if (auto v = get(key)) out = to_bool(qualified(key), *v);
  }
  void read(const std::string& key, std::string& out) {
    if (auto v = get(key)) out = *v;
  }

  /// Rejects keys the parser did not ask for.
  void check_unknown() const {
    if (!tree_) return;
    for (const auto& [key, value] : *tree_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end())
        throw ConfigError("unknown key '" + qualified(key) + "'");
    }
  }

 private:
  const boost::property_tree::ptree* tree_;
  std::string name_;
  std::vector<std::string> used_;
};

void read_em(Section& s, EmConfig& em) {
  s.read("max_iter", em.max_iter);
  s.read("epsilon", em.epsilon);
  s.read("refresh_period", em.refresh_period);
  s.read("rel_tol", em.rel_tol);
  s.read("repair_empty_clusters", em.repair_empty_clusters);
  if (auto v = s.get("min_weight_floor")) em.min_weight_floor = to_double(s.qualified("min_weight_floor"), *v);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::vector<int> nearest_centroid(const DataMatrix& x, const Eigen::MatrixXd& centroids) {
  std::vector<int> labels(static_cast<std::size_t>(x.n()));
  for (Eigen::Index i = 0; i < x.n(); ++i) {
    Eigen::Index best;
    (centroids.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  gem.variant = EmVariant::classical;
  rgem.variant = EmVariant::regularized;
  cv.positive_only = true;
}

void ExperimentConfig::validate(ExperimentKind as) const {
  // A single fit may reuse any experiment's data settings.
  if (kind && *kind != as && as != ExperimentKind::single_fit)
    throw ConfigError("config is for '" + to_string(*kind) + "', not '" + to_string(as) + "'");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (methods.empty()) throw ConfigError("no methods selected");
  kmeans.validate();
  gem.validate();
  rgem.validate();
  cv.validate();
  if (as == ExperimentKind::synthetic_dim_sweep) {
    if (dims.empty()) throw ConfigError("dimension grid is empty");
    for (auto m : dims) {
      if (m < 1) throw ConfigError("dimensions must be >= 1");
    }
    synthetic.validate();
  }
  if (as == ExperimentKind::real_accuracy || as == ExperimentKind::real_starvation) {
    if (!dataset) throw ConfigError("missing [dataset] section");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
      throw ConfigError("train_fraction must be in (0, 1)");
    if (resplit_every < 1) throw ConfigError("resplit_every must be >= 1");
  }
  if (as == ExperimentKind::real_starvation) {
    if (keep_fractions.empty()) throw ConfigError("keep-fraction grid is empty");
    for (double f : keep_fractions) {
      if (!(f > 0.0 && f <= 1.0)) throw ConfigError("keep fractions must be in (0, 1]");
    }
  }
}

ExperimentConfig parse_config(const std::string& text) {
  boost::property_tree::ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& [name, child] : tree) {
    if (child.empty()) throw ConfigError("key '" + name + "' outside of a section");
    static const std::vector<std::string> known{"experiment", "synthetic", "dataset",
                                                "kmeans",     "gem",       "rgem"};
    if (std::find(known.begin(), known.end(), name) == known.end())
      throw ConfigError("unknown section [" + name + "]");
  }
  auto child = [&](const std::string& name) -> const boost::property_tree::ptree* {
    auto c = tree.get_child_optional(name);
    return c ? &*c : nullptr;
  };

  ExperimentConfig cfg;
  {
    Section s(child("experiment"), "experiment");
    if (auto v = s.get("kind")) cfg.kind = parse_kind(*v);
    if (auto v = s.get("methods")) {
      cfg.methods.clear();
      for (const auto& name : split_list(*v)) cfg.methods.push_back(parse_method(name));
    }
    s.read("repetitions", cfg.repetitions);
    if (auto v = s.get("dims")) {
      cfg.dims.clear();
      for (const auto& item : split_list(*v))
        cfg.dims.push_back(static_cast<Eigen::Index>(to_integer("experiment.dims", item)));
    }
    if (auto v = s.get("keep_fractions")) cfg.keep_fractions = to_doubles("experiment.keep_fractions", *v);
    s.read("train_fraction", cfg.train_fraction);
    s.read("resplit_every", cfg.resplit_every);
    if (auto v = s.get("seed")) cfg.base_seed = static_cast<std::uint64_t>(to_integer("experiment.seed", *v));
    s.read("record_wall_time", cfg.record_wall_time);
    if (auto v = s.get("output")) cfg.output = *v;
    s.check_unknown();
  }
  {
    Section s(child("synthetic"), "synthetic");
    s.read("clusters", cfg.synthetic.clusters);
    s.read("n", cfg.synthetic.n);
    s.read("m", cfg.synthetic.m);
    s.read("mean_radius", cfg.synthetic.mean_radius);
    if (auto v = s.get("rho")) cfg.synthetic.rho = to_doubles("synthetic.rho", *v);
    if (auto v = s.get("priors")) cfg.synthetic.priors = to_doubles("synthetic.priors", *v);
    s.check_unknown();
  }
  if (auto* d = child("dataset")) {
    Section s(d, "dataset");
    DatasetConfig ds;
    std::string path, impute = "median", header = "auto", pca_fit = "full";
    s.read("path", path);
    if (path.empty()) throw ConfigError("dataset.path is required");
    ds.path = path;
    ds.tag = ds.path.stem().string();
    s.read("tag", ds.tag);
    s.read("label_column", ds.schema.label_column);
    if (auto v = s.get("drop_columns")) ds.schema.drop_columns = split_list(*v);
    s.read("missing", ds.schema.missing_token);
    s.read("impute", impute);
    if (impute == "median") {
      ds.schema.impute = ImputePolicy::median;
    } else if (impute == "drop_row") {
      ds.schema.impute = ImputePolicy::drop_row;
    } else {
      throw ConfigError("dataset.impute must be median or drop_row");
    }
    s.read("header", header);
    if (header != "auto") ds.schema.header = to_bool("dataset.header", header);
    s.read("pca_variance", ds.pca_variance);
    s.read("pca_fit", pca_fit);
    if (pca_fit == "full") {
      ds.pca_fit = PcaFit::full;
    } else if (pca_fit == "train") {
      ds.pca_fit = PcaFit::train;
    } else {
      throw ConfigError("dataset.pca_fit must be full or train");
    }
    if (ds.pca_variance < 0.0 || ds.pca_variance > 1.0)
      throw ConfigError("dataset.pca_variance must be in [0, 1]");
    s.check_unknown();
    cfg.dataset = std::move(ds);
  }
  {
    Section s(child("kmeans"), "kmeans");
    s.read("clusters", cfg.kmeans.clusters);
    s.read("n_init", cfg.kmeans.n_init);
    s.read("max_iter", cfg.kmeans.max_iter);
    s.read("tol", cfg.kmeans.tol);
    s.read("ridge", cfg.kmeans.ridge);
    s.check_unknown();
  }
  {
    Section s(child("gem"), "gem");
    read_em(s, cfg.gem);
    s.check_unknown();
  }
  {
    Section s(child("rgem"), "rgem");
    read_em(s, cfg.rgem);
    s.read("folds", cfg.cv.folds);
    s.read("positive_only", cfg.cv.positive_only);
    if (auto v = s.get("grid")) cfg.cv.grid = to_doubles("rgem.grid", *v);
    s.check_unknown();
  }
  cfg.gem.variant = EmVariant::classical;
  cfg.rgem.variant = EmVariant::regularized;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::uint64_t run_seed(std::uint64_t base, int grid, int run) {
  return derive_seed(base, {static_cast<std::uint64_t>(grid), static_cast<std::uint64_t>(run)});
}

int split_index_for_run(int run, int resplit_every) { return run / resplit_every; }

std::uint64_t split_seed(std::uint64_t base, int split_index) {
  return derive_seed(base, {0x5eed5u, static_cast<std::uint64_t>(split_index)});
}

std::vector<MethodRun> run_methods(const ExperimentConfig& cfg, const std::vector<Method>& methods,
                                   const DataMatrix& train, const DataMatrix& eval, int clusters,
                                   std::uint64_t seed) {
  const bool eval_is_train = &train == &eval;
  KMeansConfig kcfg = cfg.kmeans;
  kcfg.clusters = clusters;
  kcfg.seed = derive_seed(seed, {1});
  const auto start = std::chrono::steady_clock::now();
  const HardClustering hc = kmeans_fit(train, kcfg);
  const double kmeans_ms = elapsed_ms(start);

  std::optional<MixtureInit> init;
  std::vector<MethodRun> out;
  for (Method method : methods) {
    MethodRun run;
    run.kmeans = hc;
    if (method == Method::kmeans) {
      run.eval_labels = eval_is_train ? hc.labels : nearest_centroid(eval, hc.centroids);
      run.iterations = hc.iterations;
      run.wall_ms = kmeans_ms;
      out.push_back(std::move(run));
      continue;
    }
    if (!init) init = init_from_kmeans(train, hc, cfg.kmeans.ridge);
    const auto em_start = std::chrono::steady_clock::now();
    EmFitResult result;
    if (method == Method::gem) {
      result = fit(train, cfg.gem, *init);
    } else {
      CvConfig cv = cfg.cv;
      cv.seed = derive_seed(seed, {2});
      result = fit(train, cfg.rgem, *init, make_cv_selector(cv));
      run.etas.assign(result.reg.penalties.data(),
                      result.reg.penalties.data() + result.reg.penalties.size());
    }
    run.wall_ms = kmeans_ms + elapsed_ms(em_start);
    run.eval_labels = eval_is_train ? result.hard_labels : predict(eval, result.params);
    run.iterations = result.iterations_run;
    run.conditioning = result.conditioning;
    run.em = std::move(result);
    out.push_back(std::move(run));
  }
  return out;
}

namespace {

ExperimentRecord make_record(Method method, const std::string& dataset, Eigen::Index m,
                             Eigen::Index n_train, double keep, int run, std::uint64_t seed,
                             int grid_index) {
  ExperimentRecord r;
  r.method = method;
  r.dataset = dataset;
  r.m = m;
  r.n_train = n_train;
  r.keep_fraction = keep;
  r.run = run;
  r.seed = seed;
  r.grid_index = grid_index;
  r.min_cond = std::numeric_limits<double>::quiet_NaN();
  r.max_cond = std::numeric_limits<double>::quiet_NaN();
  return r;
}

void fill_records(const ExperimentConfig& cfg, const DataMatrix& train, const DataMatrix& eval,
                  int clusters, std::uint64_t seed, std::vector<ExperimentRecord>& records,
                  const ExperimentRecord& proto) {
  std::vector<MethodRun> runs;
  std::string failure;
  try {
    runs = run_methods(cfg, cfg.methods, train, eval, clusters, seed);
  } catch (const Error& e) {
    failure = e.what();
  }
  // A failure in the shared K-means step fails every method of this run.
  if (!failure.empty()) {
    for (Method method : cfg.methods) {
      ExperimentRecord r = proto;
      r.method = method;
      r.failed = true;
      r.error = failure;
      r.accuracy = std::numeric_limits<double>::quiet_NaN();
      records.push_back(std::move(r));
    }
    return;
  }
  const int k = std::max(clusters, eval.num_classes());
  for (std::size_t j = 0; j < cfg.methods.size(); ++j) {
    ExperimentRecord r = proto;
    r.method = cfg.methods[j];
    const MethodRun& run = runs[j];
    r.accuracy = clustering_accuracy(eval.labels(), run.eval_labels, k).accuracy;
    r.iterations = run.iterations;
    r.wall_ms = cfg.record_wall_time ? run.wall_ms : 0.0;
    if (!run.conditioning.empty()) {
      r.min_cond = std::numeric_limits<double>::infinity();
      r.max_cond = 0.0;
      for (const auto& c : run.conditioning) {
        r.min_cond = std::min(r.min_cond, c.condition_number);
        r.max_cond = std::max(r.max_cond, c.condition_number);
      }
    }
    r.etas = run.etas;
    records.push_back(std::move(r));
  }
}

// run_methods fits every method at once; per-method failures are isolated here.
void fill_records_isolated(const ExperimentConfig& cfg, const DataMatrix& train,
                           const DataMatrix& eval, int clusters, std::uint64_t seed,
                           std::vector<ExperimentRecord>& records, const ExperimentRecord& proto) {
  std::vector<ExperimentRecord> batch;
  fill_records(cfg, train, eval, clusters, seed, batch, proto);
  if (batch.empty() || !batch.front().failed) {
    records.insert(records.end(), batch.begin(), batch.end());
    return;
  }
  // Retry method by method so that one numerical failure does not mask the others.
  for (Method method : cfg.methods) {
    ExperimentConfig single = cfg;
    single.methods = {method};
    fill_records(single, train, eval, clusters, seed, records, proto);
  }
}

void sort_records(std::vector<ExperimentRecord>& records, const std::vector<Method>& order) {
  auto rank = [&](Method m) {
    return std::find(order.begin(), order.end(), m) - order.begin();
  };
  std::stable_sort(records.begin(), records.end(), [&](const auto& a, const auto& b) {
    if (a.grid_index != b.grid_index) return a.grid_index < b.grid_index;
    if (a.run != b.run) return a.run < b.run;
    return rank(a.method) < rank(b.method);
  });
}

struct RealSplit {
  DataMatrix train;
  DataMatrix test;
};

// PCA (train-fit mode) is applied after splitting.
RealSplit make_split(const ExperimentConfig& cfg, const PreparedDataset& prepared, int split_index) {
  TrainTest tt = split_train_test(prepared.data, cfg.train_fraction,
                                  split_seed(cfg.base_seed, split_index));
  if (cfg.dataset->pca_fit == PcaFit::train && cfg.dataset->pca_variance > 0.0) {
    const PcaModel pca = pca_fit(tt.train, cfg.dataset->pca_variance);
    return {pca.transform(tt.train), pca.transform(tt.test)};
  }
  return {std::move(tt.train), std::move(tt.test)};
}

int class_count(const DataMatrix& x) {
  if (!x.has_labels()) throw SchemaError("dataset has no label column");
  return x.num_classes();
}

}  // namespace

std::vector<ExperimentRecord> run_synthetic_sweep(const ExperimentConfig& cfg) {
  cfg.validate(ExperimentKind::synthetic_dim_sweep);
  std::vector<ExperimentRecord> records;
  for (std::size_t g = 0; g < cfg.dims.size(); ++g) {
    for (int r = 0; r < cfg.repetitions; ++r) {
      const auto seed = run_seed(cfg.base_seed, static_cast<int>(g), r);
      SyntheticSpec spec = cfg.synthetic;
      spec.m = cfg.dims[g];
      spec.seed = derive_seed(seed, {0});
      const DataMatrix data = generate_gmm(spec).data;
      const ExperimentRecord proto = make_record(Method::kmeans, "synthetic", spec.m, spec.n, 1.0, r,
                                                 seed, static_cast<int>(g));
      fill_records_isolated(cfg, data, data, spec.clusters, seed, records, proto);
    }
  }
  sort_records(records, cfg.methods);
  return records;
}

PreparedDataset prepare_dataset(const DatasetConfig& cfg) {
  LoadedCsv loaded = load_csv(cfg.path, cfg.schema);
  PreparedDataset out{std::move(loaded.data), std::move(loaded.report), std::nullopt};
  if (cfg.pca_variance > 0.0 && cfg.pca_fit == PcaFit::full) {
    PcaResult pca = pca_fit_transform(out.data, cfg.pca_variance);
    out.data = std::move(pca.projected);
    out.pca = std::move(pca.model);
  }
  return out;
}

std::vector<ExperimentRecord> run_real_accuracy(const ExperimentConfig& cfg) {
  cfg.validate(ExperimentKind::real_accuracy);
  const PreparedDataset prepared = prepare_dataset(*cfg.dataset);
  const int clusters = class_count(prepared.data);
  std::vector<ExperimentRecord> records;
  std::optional<RealSplit> split;
  for (int r = 0; r < cfg.repetitions; ++r) {
    if (r % cfg.resplit_every == 0)
      split = make_split(cfg, prepared, split_index_for_run(r, cfg.resplit_every));
    const auto seed = run_seed(cfg.base_seed, 0, r);
    const ExperimentRecord proto = make_record(Method::kmeans, cfg.dataset->tag, split->train.m(),
                                               split->train.n(), 1.0, r, seed, 0);
    fill_records_isolated(cfg, split->train, split->test, clusters, seed, records, proto);
  }
  sort_records(records, cfg.methods);
  return records;
}

std::vector<ExperimentRecord> run_real_starvation(const ExperimentConfig& cfg) {
  cfg.validate(ExperimentKind::real_starvation);
  const PreparedDataset prepared = prepare_dataset(*cfg.dataset);
  const int clusters = class_count(prepared.data);
  std::vector<ExperimentRecord> records;
  for (std::size_t g = 0; g < cfg.keep_fractions.size(); ++g) {
    const double keep = cfg.keep_fractions[g];
    std::optional<RealSplit> split;
    for (int r = 0; r < cfg.repetitions; ++r) {
      if (r % cfg.resplit_every == 0)
        split = make_split(cfg, prepared, split_index_for_run(r, cfg.resplit_every));
      const auto seed = run_seed(cfg.base_seed, 0, r);
      ExperimentRecord proto = make_record(Method::kmeans, cfg.dataset->tag, split->train.m(), 0,
                                           keep, r, seed, static_cast<int>(g));
      DataMatrix train;
      try {
        train = subsample(split->train, keep, derive_seed(seed, {3, g}));
      } catch (const InsufficientDataError& e) {
        for (Method method : cfg.methods) {
          ExperimentRecord failed = proto;
          failed.method = method;
          failed.failed = true;
          failed.error = e.what();
          failed.accuracy = std::numeric_limits<double>::quiet_NaN();
          records.push_back(std::move(failed));
        }
        continue;
      }
      proto.n_train = train.n();
      fill_records_isolated(cfg, train, split->test, clusters, seed, records, proto);
    }
  }
  sort_records(records, cfg.methods);
  return records;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<double>> values;
  for (const auto& r : records) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& s) {
      return s.method == r.method && s.dataset == r.dataset && s.m == r.m &&
             s.keep_fraction == r.keep_fraction;
    });
    if (it == rows.end()) {
      SummaryRow s;
      s.method = r.method;
      s.dataset = r.dataset;
      s.m = r.m;
      s.keep_fraction = r.keep_fraction;
      rows.push_back(s);
      values.emplace_back();
      it = rows.end() - 1;
    }
    const auto idx = static_cast<std::size_t>(it - rows.begin());
    ++it->count;
    if (r.failed) {
      ++it->failures;
    } else {
      values[idx].push_back(r.accuracy);
    }
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& v = values[i];
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (v.empty()) {
      rows[i].mean = rows[i].median = rows[i].stddev = nan;
      continue;
    }
    double sum = 0.0;
    for (double a : v) sum += a;
    rows[i].mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double a : v) ss += (a - rows[i].mean) * (a - rows[i].mean);
    rows[i].stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t mid = v.size() / 2;
    rows[i].median = v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
  }
  return rows;
}

std::string format_records_csv(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  out << "method,dataset,m,n_train,keep_fraction,run,seed,accuracy,iterations,wall_ms,min_cond,"
         "max_cond,eta_list\n";
  for (const auto& r : records) {
    out << to_string(r.method) << ',' << r.dataset << ',' << r.m << ',' << r.n_train << ','
        << format_double(r.keep_fraction) << ',' << r.run << ',' << r.seed << ','
        << format_double(r.accuracy) << ',' << r.iterations << ',' << format_double(r.wall_ms)
        << ',' << format_double(r.min_cond) << ',' << format_double(r.max_cond) << ',';
    for (std::size_t k = 0; k < r.etas.size(); ++k) out << (k ? ";" : "") << format_double(r.etas[k]);
    out << '\n';
  }
  return out.str();
}

std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "method,dataset,m,keep_fraction,count,failures,mean,median,stddev\n";
  for (const auto& s : rows) {
    out << to_string(s.method) << ',' << s.dataset << ',' << s.m << ','
        << format_double(s.keep_fraction) << ',' << s.count << ',' << s.failures << ','
        << format_double(s.mean) << ',' << format_double(s.median) << ','
        << format_double(s.stddev) << '\n';
  }
  return out.str();
}

std::filesystem::path summary_path(const std::filesystem::path& path) {
  std::filesystem::path out = path;
  out.replace_extension();
  out += ".summary.csv";
  return out;
}

void emit_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw Error("emit_csv: no records");
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
    if (!out) throw Error("write failed for " + p.string());
  };
  write(path, format_records_csv(records));
  write(summary_path(path), format_summary_csv(summarize(records)));
}

}  // namespace rgem
