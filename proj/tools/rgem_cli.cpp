// Command-line front end: synthetic data generation, single fits and the
// three experiment sweeps.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rgem/data.hpp"
#include "rgem/errors.hpp"
#include "rgem/experiment.hpp"
#include "rgem/rng.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 1, kDataError = 2, kNumericalError = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string method = "rgem";
};

rgem::ExperimentConfig resolve(const Options& opt) {
  rgem::ExperimentConfig cfg = opt.config.empty() ? rgem::ExperimentConfig{} : rgem::load_config(opt.config);
  if (opt.seed) cfg.base_seed = *opt.seed;
  if (!opt.out.empty()) cfg.output = opt.out;
  return cfg;
}

void print_summary(const std::vector<rgem::ExperimentRecord>& records) {
  for (const auto& s : rgem::summarize(records)) {
    std::printf("%-7s %-12s m=%-4ld keep=%-5.2f runs=%-4zu failed=%-3zu mean=%.4f median=%.4f sd=%.4f\n",
                rgem::to_string(s.method).c_str(), s.dataset.c_str(), static_cast<long>(s.m),
                s.keep_fraction, s.count, s.failures, s.mean, s.median, s.stddev);
  }
}

int cmd_generate(const Options& opt) {
  rgem::ExperimentConfig cfg = resolve(opt);
  rgem::SyntheticSpec spec = cfg.synthetic;
  spec.seed = cfg.base_seed;
  const auto generated = rgem::generate_gmm(spec);
  rgem::write_csv(cfg.output, generated.data);
  std::printf("wrote %ld x %ld samples to %s\n", static_cast<long>(generated.data.n()),
              static_cast<long>(generated.data.m()), cfg.output.string().c_str());
  return kOk;
}

int cmd_fit(const Options& opt) {
  rgem::ExperimentConfig cfg = resolve(opt);
  cfg.validate(rgem::ExperimentKind::single_fit);
  const rgem::Method method = rgem::parse_method(opt.method);

  rgem::DataMatrix data;
  std::string tag = "synthetic";
  int clusters = cfg.synthetic.clusters;
  if (cfg.dataset) {
    auto prepared = rgem::prepare_dataset(*cfg.dataset);
    data = std::move(prepared.data);
    tag = cfg.dataset->tag;
    clusters = data.has_labels() ? data.num_classes() : cfg.kmeans.clusters;
    if (prepared.pca) {
      std::printf("pca: %ld components retain %.4f of the variance\n",
                  static_cast<long>(prepared.pca->components), prepared.pca->retained_ratio);
    }
  } else {
    rgem::SyntheticSpec spec = cfg.synthetic;
    spec.seed = rgem::derive_seed(cfg.base_seed, {0});
    data = rgem::generate_gmm(spec).data;
  }
  std::printf("dataset %s: n=%ld m=%ld K=%d\n", tag.c_str(), static_cast<long>(data.n()),
              static_cast<long>(data.m()), clusters);

  const auto runs = rgem::run_methods(cfg, {method}, data, data, clusters, cfg.base_seed);
  const auto& run = runs.front();
  std::printf("method %s: iterations=%d wall_ms=%.1f\n", opt.method.c_str(), run.iterations, run.wall_ms);
  if (data.has_labels()) {
    const int k = std::max(clusters, data.num_classes());
    std::printf("accuracy %.4f\n", rgem::clustering_accuracy(data.labels(), run.eval_labels, k).accuracy);
  }
  if (run.em) {
    const auto& em = *run.em;
    std::printf("final penalized log-likelihood %.6f\n", em.penalized_ll_trace.back());
    for (Eigen::Index k = 0; k < em.params.num_clusters(); ++k) {
      const auto& c = em.conditioning[static_cast<std::size_t>(k)];
      std::printf("cluster %ld: weight=%.4f min_eig=%.4g max_eig=%.4g cond=%.4g", static_cast<long>(k),
                  em.params.weights(k), c.min_eig, c.max_eig, c.condition_number);
      if (method == rgem::Method::rgem)
        std::printf(" eta=%.4g beta=%.4f scale=%.4g", em.reg.penalties(k), em.betas(k), em.reg.scales(k));
      std::printf("\n");
    }
  } else {
    std::printf("inertia %.6f\n", run.kmeans.inertia);
  }
  return kOk;
}

int cmd_sweep(const Options& opt, rgem::ExperimentKind kind) {
  rgem::ExperimentConfig cfg = resolve(opt);
  std::vector<rgem::ExperimentRecord> records;
  switch (kind) {
    case rgem::ExperimentKind::synthetic_dim_sweep: records = rgem::run_synthetic_sweep(cfg); break;
    case rgem::ExperimentKind::real_accuracy: records = rgem::run_real_accuracy(cfg); break;
    case rgem::ExperimentKind::real_starvation: records = rgem::run_real_starvation(cfg); break;
    default: break;
  }
  rgem::emit_csv(records, cfg.output);
  print_summary(records);
  std::printf("wrote %zu records to %s\n", records.size(), cfg.output.string().c_str());
  return kOk;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("--config", opt.config, "Experiment configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opt.seed, "Base seed (overrides the config)");
  cmd->add_option("--out", opt.out, "Output CSV path (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized EM clustering experiments"};
  app.require_subcommand(1);
  Options opt;

  auto* generate = app.add_subcommand("generate", "Write a synthetic Gaussian mixture sample to CSV");
  auto* fit = app.add_subcommand("fit", "Fit one method on one dataset and print diagnostics");
  auto* sweep = app.add_subcommand("sweep-dim", "Accuracy versus dimension on synthetic data");
  auto* real_acc = app.add_subcommand("real-acc", "Held-out accuracy on a real dataset");
  auto* real_starve = app.add_subcommand("real-starve", "Accuracy versus training-set fraction");
  for (auto* cmd : {generate, fit, sweep, real_acc, real_starve}) add_common(cmd, opt);
  fit->add_option("--method", opt.method, "kmeans, gem or rgem")
      ->check(CLI::IsMember({"kmeans", "gem", "rgem"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*generate) return cmd_generate(opt);
    if (*fit) return cmd_fit(opt);
    if (*sweep) return cmd_sweep(opt, rgem::ExperimentKind::synthetic_dim_sweep);
    if (*real_acc) return cmd_sweep(opt, rgem::ExperimentKind::real_accuracy);
    if (*real_starve) return cmd_sweep(opt, rgem::ExperimentKind::real_starvation);
  } catch (const rgem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const rgem::IndefiniteError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const rgem::EmptyClusterError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const rgem::AllCandidatesIndefiniteError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const rgem::Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return kOk;
}
