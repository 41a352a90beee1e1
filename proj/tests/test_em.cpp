#include <doctest.h>

#include <cmath>

#include "rgem/data.hpp"
#include "rgem/em.hpp"
#include "rgem/kmeans.hpp"
#include "test_support.hpp"

using rgem::SpdMatrixd;

namespace {

rgem::DataMatrix column(std::initializer_list<double> values) {
  Eigen::MatrixXd x(values.size(), 1);
  Eigen::Index i = 0;
  for (double v : values) x(i++, 0) = v;
  return rgem::DataMatrix(x);
}

rgem::MixtureParams one_d(double w0, double mu0, double mu1) {
  rgem::MixtureParams p;
  p.weights = Eigen::Vector2d(w0, 1.0 - w0);
  p.means = {Eigen::VectorXd::Constant(1, mu0), Eigen::VectorXd::Constant(1, mu1)};
  p.covariances = {SpdMatrixd::identity(1), SpdMatrixd::identity(1)};
  return p;
}

struct Problem {
  rgem::DataMatrix x;
  rgem::MixtureInit init;
};

Problem synthetic_problem(std::uint64_t seed, Eigen::Index n, Eigen::Index m) {
  rgem::SyntheticSpec spec;
  spec.n = n;
  spec.m = m;
  spec.seed = seed;
  auto data = rgem::generate_gmm(spec);
  rgem::KMeansConfig km;
  km.clusters = 3;
  km.n_init = 3;
  km.seed = seed;
  const auto hc = rgem::kmeans_fit(data.data, km);
  return {data.data, rgem::init_from_kmeans(data.data, hc)};
}

}  // namespace

TEST_CASE("e_step: identical components split evenly") {
  const auto p = one_d(0.5, 0.3, 0.3);
  const auto r = rgem::e_step(column({-4, 0, 0.3, 9}), p);
  CHECK(r.isApproxToConstant(0.5));
}

TEST_CASE("e_step: degenerate prior") {
  const auto p = one_d(1.0 - 1e-300, -1, 1);
  const auto r = rgem::e_step(column({0.0, 1.0, 3.0}), p);
  for (Eigen::Index i = 0; i < r.rows(); ++i) CHECK(r(i, 0) == doctest::Approx(1.0));
}

TEST_CASE("e_step: 1-D logistic posterior") {
  const auto p = one_d(0.5, -1, 1);
  // log-odds of cluster 1 = x * (mu_1 - mu_0) / sigma^2 = 2x.
  const auto r = rgem::e_step(column({0.5, 1.0}), p);
  CHECK(r(0, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(r(1, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  CHECK(r(1, 1) == doctest::Approx(0.8808).epsilon(1e-4));
}

TEST_CASE("m_step_classical: K=1 gives sample moments plus ridge") {
  const auto x = column({0, 1, 2});
  const auto p = rgem::m_step_classical(x, Eigen::MatrixXd::Ones(3, 1), 1e-4);
  CHECK(p.weights(0) == 1.0);
  CHECK(p.means[0](0) == doctest::Approx(1.0));
  CHECK(p.covariances[0].matrix()(0, 0) == doctest::Approx(2.0 / 3.0 + 1e-4));
}

TEST_CASE("m_step_classical: hard assignment gives per-cluster moments") {
  rgem::Rng rng(31);
  const rgem::DataMatrix x(rgem::test::random_normal(rng, 30, 3));
  std::vector<int> labels(30);
  for (int i = 0; i < 30; ++i) labels[i] = i % 3 == 0 ? 1 : 0;
  const auto p = rgem::m_step_classical(x, rgem::one_hot(labels, 2), 0.01);
  const auto sets = rgem::index_sets(labels, 2);
  for (int k = 0; k < 2; ++k) {
    Eigen::MatrixXd expected = rgem::sample_covariance(x, sets[k]);
    expected.diagonal().array() += 0.01;
    CHECK(p.covariances[k].matrix().isApprox(expected, 1e-12));
    CHECK(p.weights(k) == doctest::Approx(sets[k].size() / 30.0));
  }
}

TEST_CASE("m_step_regularized: eta=0 equals classical with epsilon=0 bitwise") {
  auto prob = synthetic_problem(4, 200, 6);
  const auto resp = rgem::e_step(prob.x, prob.init.params);
  auto reg = prob.init.reg;
  reg.penalties.setZero();
  const auto a = rgem::m_step_regularized(prob.x, resp, reg);
  const auto b = rgem::m_step_classical(prob.x, resp, 0.0);
  for (int k = 0; k < 3; ++k) {
    CHECK((a.covariances[k].matrix().array() == b.covariances[k].matrix().array()).all());
    CHECK((a.means[k].array() == b.means[k].array()).all());
  }
  CHECK((a.weights.array() == b.weights.array()).all());
}

TEST_CASE("m_step_regularized: eta=1e300 returns the target") {
  auto prob = synthetic_problem(5, 200, 6);
  const auto resp = rgem::e_step(prob.x, prob.init.params);
  auto reg = prob.init.reg;
  reg.penalties.setConstant(1e300);
  const auto p = rgem::m_step_regularized(prob.x, resp, reg);
  for (int k = 0; k < 3; ++k)
    CHECK((p.covariances[k].matrix() - reg.targets[k].matrix()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("m_step_regularized: eta = n pi gives beta = 1/2") {
  rgem::Rng rng(32);
  const rgem::DataMatrix x(rgem::test::random_normal(rng, 100, 4));
  auto reg = rgem::RegularizationState::identity_targets(Eigen::VectorXd::Constant(1, 3.0), 4);
  reg.penalties(0) = 100.0;
  const Eigen::MatrixXd resp = Eigen::MatrixXd::Ones(100, 1);
  const auto beta = rgem::shrinkage_coefficients(Eigen::VectorXd::Ones(1), 100, reg.penalties);
  CHECK(beta(0) == 0.5);
  const auto p = rgem::m_step_regularized(x, resp, reg);
  std::vector<Eigen::Index> all(100);
  for (Eigen::Index i = 0; i < 100; ++i) all[i] = i;
  const Eigen::MatrixXd expected =
      0.5 * rgem::sample_covariance(x, all) + 0.5 * 3.0 * Eigen::MatrixXd::Identity(4, 4);
  CHECK(p.covariances[0].matrix().isApprox(expected, 1e-12));
}

TEST_CASE("m_step: empty cluster raises") {
  const auto x = column({0, 1, 2, 3});
  Eigen::MatrixXd resp = Eigen::MatrixXd::Zero(4, 2);
  resp.col(0).setOnes();
  CHECK_THROWS_AS(rgem::m_step_classical(x, resp, 1e-4), rgem::EmptyClusterError);
}

TEST_CASE("fit: K=1 mean is the sample mean after one iteration") {
  rgem::Rng rng(33);
  const rgem::DataMatrix x(rgem::test::random_normal(rng, 80, 3));
  rgem::HardClustering hc;
  hc.labels.assign(80, 0);
  hc.centroids = Eigen::MatrixXd::Zero(1, 3);
  const auto init = rgem::init_from_kmeans(x, hc);
  rgem::EmConfig cfg;
  cfg.variant = rgem::EmVariant::classical;
  cfg.max_iter = 1;
  const auto res = rgem::fit(x, cfg, init);
  CHECK(res.params.means[0].isApprox(x.values().colwise().mean().transpose(), 1e-12));
}

TEST_CASE("fit: frozen eta=0 trace equals classical epsilon=0 trace") {
  auto prob = synthetic_problem(6, 300, 5);
  rgem::EmConfig reg_cfg;
  reg_cfg.variant = rgem::EmVariant::regularized;
  reg_cfg.rel_tol = 0.0;
  reg_cfg.max_iter = 25;
  rgem::EmConfig cls_cfg = reg_cfg;
  cls_cfg.variant = rgem::EmVariant::classical;
  cls_cfg.epsilon = 0.0;
  const auto a = rgem::fit(prob.x, reg_cfg, prob.init);
  const auto b = rgem::fit(prob.x, cls_cfg, prob.init);
  CHECK(a.penalized_ll_trace == b.penalized_ll_trace);
  CHECK(a.hard_labels == b.hard_labels);
}

TEST_CASE("property: ascent between refreshes, floors and stochastic rows") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto prob = synthetic_problem(100 + seed, 300, seed % 2 ? 10 : 30);
    rgem::CvConfig cv;
    cv.positive_only = true;
    cv.seed = seed;
    for (auto variant : {rgem::EmVariant::regularized, rgem::EmVariant::classical}) {
      rgem::EmConfig cfg;
      cfg.variant = variant;
      cfg.rel_tol = 0.0;
      int floor_violations = 0;
      const auto res = rgem::fit(
          prob.x, cfg, prob.init, rgem::make_cv_selector(cv), [&](const rgem::IterationSnapshot& s) {
            for (int k = 0; k < 3; ++k) {
              const double min_eig = rgem::eig_extremes(s.params.covariances[k]).min_eig;
              const double bound = variant == rgem::EmVariant::regularized
                                       ? (1.0 - s.betas(k)) * s.reg.scales(k) - 1e-10
                                       : cfg.epsilon - 1e-12;
              if (min_eig < bound) ++floor_violations;
            }
          });
      CHECK(floor_violations == 0);
      const auto& tr = res.penalized_ll_trace;
      for (std::size_t t = 1; t < tr.size(); ++t) {
        if (res.refresh_marks[t]) continue;
        CHECK(tr[t] >= tr[t - 1] - 1e-8 * std::abs(tr[t - 1]));
      }
      for (Eigen::Index i = 0; i < res.resp.rows(); ++i)
        CHECK(std::abs(res.resp.row(i).sum() - 1.0) <= 1e-12);
      CHECK(res.params.weights.sum() == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("property: permuting the init permutes the fit") {
  auto prob = synthetic_problem(7, 300, 8);
  const std::vector<int> perm{2, 0, 1};  // new cluster j = old cluster perm[j]
  std::vector<int> inverse(3);
  for (int j = 0; j < 3; ++j) inverse[perm[j]] = j;
  rgem::MixtureInit permuted = prob.init;
  permuted.params = prob.init.params.permuted(perm);
  permuted.reg = prob.init.reg.permuted(perm);
  for (auto& l : permuted.labels) l = inverse[l];
  permuted.index_sets = rgem::index_sets(permuted.labels, 3);
  rgem::EmConfig cfg;
  cfg.variant = rgem::EmVariant::classical;
  cfg.rel_tol = 0.0;
  const auto a = rgem::fit(prob.x, cfg, prob.init);
  const auto b = rgem::fit(prob.x, cfg, permuted);
  for (std::size_t i = 0; i < a.hard_labels.size(); ++i)
    CHECK(b.hard_labels[i] == inverse[a.hard_labels[i]]);
}

TEST_CASE("fit: selector failures keep the previous penalty") {
  auto prob = synthetic_problem(8, 150, 4);
  prob.init.reg.penalties.setConstant(2.5);
  rgem::EmConfig cfg;
  cfg.max_iter = 12;
  cfg.rel_tol = 0.0;
  int calls = 0;
  const auto res = rgem::fit(prob.x, cfg, prob.init,
                             [&](const rgem::DataMatrix&, const std::vector<Eigen::Index>&, double,
                                 int, int) -> double {
                               ++calls;
                               throw rgem::InsufficientDataError("too few points");
                             });
  CHECK(calls == 6);  // refreshes at t = 1 and 11, three clusters each
  CHECK(res.reg.penalties.isApproxToConstant(2.5));
}

TEST_CASE("fit: repair keeps an emptied cluster's moments") {
  // Cluster 1 starts with two far points that get absorbed.
  Eigen::MatrixXd xs(42, 1);
  rgem::Rng rng(34);
  for (int i = 0; i < 40; ++i) xs(i, 0) = rng.normal();
  xs(40, 0) = 0.01;
  xs(41, 0) = -0.01;
  const rgem::DataMatrix x(xs);
  rgem::HardClustering hc;
  hc.labels.assign(42, 0);
  hc.labels[40] = hc.labels[41] = 1;
  hc.centroids = Eigen::MatrixXd::Zero(2, 1);
  auto init = rgem::init_from_kmeans(x, hc);
  rgem::EmConfig cfg;
  cfg.variant = rgem::EmVariant::classical;
  cfg.rel_tol = 0.0;
  cfg.min_weight_floor = 0.2;
  const auto res = rgem::fit(x, cfg, init);
  CHECK_FALSE(res.repaired_iterations.empty());
  CHECK(res.params.weights.sum() == doctest::Approx(1.0));
  cfg.repair_empty_clusters = false;
  CHECK_THROWS_AS(rgem::fit(x, cfg, init), rgem::EmptyClusterError);
}

TEST_CASE("EmConfig::validate") {
  rgem::EmConfig cfg;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.validate(), rgem::ConfigError);
  cfg = {};
  cfg.refresh_period = 0;
  CHECK_THROWS_AS(cfg.validate(), rgem::ConfigError);
}

TEST_CASE("make_cv_selector: clusters too small for the folds get the largest candidate") {
  rgem::Rng rng(35);
  const rgem::DataMatrix x(rgem::test::random_normal(rng, 20, 6));
  rgem::CvConfig cv;
  cv.positive_only = true;
  const auto select = rgem::make_cv_selector(cv);
  const std::vector<Eigen::Index> rows{0, 1, 2, 3};
  CHECK(select(x, rows, 1.0, 0, 0) == doctest::Approx(rgem::default_grid(4).back()));
  cv.grid = {0.5, 2.0};
  CHECK(rgem::make_cv_selector(cv)(x, rows, 1.0, 0, 0) == 2.0);
}
