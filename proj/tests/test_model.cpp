#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rgem/model.hpp"
#include "test_support.hpp"

using rgem::SpdMatrixd;

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

rgem::MixtureParams two_cluster_params() {
  rgem::MixtureParams p;
  p.weights = Eigen::Vector2d(0.3, 0.7);
  p.means = {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, -1)};
  Eigen::Matrix2d s;
  s << 2.0, 0.5, 0.5, 1.0;
  p.covariances = {SpdMatrixd::identity(2), SpdMatrixd(s)};
  return p;
}

}  // namespace

TEST_CASE("log_component_density examples") {
  const Eigen::Vector2d mu(0.5, -1);
  CHECK(rgem::log_component_density(mu, mu, SpdMatrixd::identity(2)) == doctest::Approx(-kLog2Pi));
  CHECK(rgem::log_component_density((mu + Eigen::Vector2d(1, 0)).eval(), mu,
                                    SpdMatrixd::identity(2)) == doctest::Approx(-kLog2Pi - 0.5));
  CHECK(rgem::log_component_density(Eigen::Vector2d(2, 3), Eigen::Vector2d::Zero(),
                                    SpdMatrixd(rgem::test::example_2x2())) ==
        doctest::Approx(-kLog2Pi - 0.5 * std::log(8.0) - 1.5));
}

TEST_CASE("kl_penalty examples") {
  const SpdMatrixd a(rgem::test::example_2x2());
  CHECK(rgem::kl_penalty(a, a) == doctest::Approx(0.0));
  CHECK(rgem::kl_penalty(SpdMatrixd::identity(2, 2.0), SpdMatrixd::identity(2)) ==
        doctest::Approx(0.5 * (1 + 2 * std::log(2.0) - 2)));
  CHECK(rgem::kl_penalty(SpdMatrixd::identity(2, 2.0), SpdMatrixd::identity(2)) ==
        doctest::Approx(0.1931).epsilon(1e-3));
  CHECK(rgem::kl_penalty(SpdMatrixd::identity(2), SpdMatrixd::identity(2, 2.0)) ==
        doctest::Approx(0.3069).epsilon(1e-3));
}

TEST_CASE("penalized_log_likelihood: zero penalties give the plain likelihood") {
  const auto p = two_cluster_params();
  auto reg = rgem::RegularizationState::identity_targets(Eigen::Vector2d(1.0, 3.0), 2);
  rgem::Rng rng(3);
  const rgem::DataMatrix x(rgem::test::random_normal(rng, 25, 2));
  CHECK(rgem::penalized_log_likelihood(x, p, reg) == rgem::log_likelihood(x, p));
  reg.penalties = Eigen::Vector2d(0.0, 5.0);
  const double expected =
      rgem::log_likelihood(x, p) - 5.0 * rgem::kl_penalty(p.covariances[1], reg.targets[1]);
  CHECK(rgem::penalized_log_likelihood(x, p, reg) == doctest::Approx(expected));
}

TEST_CASE("penalized_log_likelihood: single point at the mean") {
  for (Eigen::Index m : {1, 3, 7}) {
    rgem::MixtureParams p;
    p.weights = Eigen::VectorXd::Ones(1);
    p.means = {Eigen::VectorXd::Constant(m, 0.25)};
    p.covariances = {SpdMatrixd::identity(m)};
    auto reg = rgem::RegularizationState::identity_targets(Eigen::VectorXd::Ones(1), m);
    reg.penalties(0) = 123.0;
    const rgem::DataMatrix x(p.means[0].transpose());
    CHECK(rgem::penalized_log_likelihood(x, p, reg) == doctest::Approx(-0.5 * m * kLog2Pi));
  }
}

TEST_CASE("log_likelihood: K=2, n=2 direct summation oracle") {
  // Hand evaluation in long double of sum_i log sum_k pi_k N(x_i).
  const auto p = two_cluster_params();
  Eigen::MatrixXd xs(2, 2);
  xs << 0.2, 0.4, 1.5, -2.0;
  long double total = 0.0L;
  for (int i = 0; i < 2; ++i) {
    long double mix = 0.0L;
    for (int k = 0; k < 2; ++k) {
      const Eigen::Matrix2d s = p.covariances[k].matrix();
      const long double det = (long double)s(0, 0) * s(1, 1) - (long double)s(0, 1) * s(1, 0);
      const long double d0 = xs(i, 0) - p.means[k](0);
      const long double d1 = xs(i, 1) - p.means[k](1);
      const long double q = (s(1, 1) * d0 * d0 - 2.0L * s(0, 1) * d0 * d1 + s(0, 0) * d1 * d1) / det;
      mix += p.weights(k) * std::exp(-0.5L * q) / (2.0L * std::numbers::pi_v<long double> *
                                                  std::sqrt(det));
    }
    total += std::log(mix);
  }
  const rgem::DataMatrix x(xs);
  CHECK(rgem::log_likelihood(x, p) == doctest::Approx(static_cast<double>(total)).epsilon(1e-12));
}

TEST_CASE("property: kl_penalty nonnegative, zero only at equality") {
  rgem::Rng rng(21);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.uniform_index(8));
    const SpdMatrixd s(rgem::test::random_spd(rng, dim));
    const SpdMatrixd t(rgem::test::random_spd(rng, dim));
    const double kl = rgem::kl_penalty(s, t);
    CHECK(kl >= 0.0);
    CHECK(kl > 1e-10);
    CHECK(rgem::kl_penalty(s, s) <= 1e-10);
  }
}

TEST_CASE("property: penalized likelihood invariant under cluster relabeling") {
  rgem::Rng rng(22);
  rgem::MixtureParams p;
  p.weights = Eigen::Vector3d(0.2, 0.5, 0.3);
  for (int k = 0; k < 3; ++k) {
    p.means.push_back(rgem::test::random_normal(rng, 4, 1));
    p.covariances.emplace_back(rgem::test::random_spd(rng, 4));
  }
  auto reg = rgem::RegularizationState::identity_targets(Eigen::Vector3d(1, 2, 3), 4);
  reg.penalties = Eigen::Vector3d(0.5, 0.0, 7.0);
  const rgem::DataMatrix x(rgem::test::random_normal(rng, 40, 4));
  const double base = rgem::penalized_log_likelihood(x, p, reg);
  const std::vector<int> perm{2, 0, 1};
  CHECK(rgem::penalized_log_likelihood(x, p.permuted(perm), reg.permuted(perm)) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("log-domain: far points keep a finite likelihood at m=100") {
  const Eigen::Index m = 100;
  rgem::MixtureParams p;
  p.weights = Eigen::Vector2d(0.5, 0.5);
  p.means = {Eigen::VectorXd::Zero(m), Eigen::VectorXd::Constant(m, 1.0)};
  p.covariances = {SpdMatrixd::identity(m), SpdMatrixd::identity(m)};
  Eigen::MatrixXd xs(1, m);
  xs.setZero();
  xs(0, 0) = 60.0;  // 50+ sigma from both means
  const double ll = rgem::log_likelihood(rgem::DataMatrix(xs), p);
  CHECK(std::isfinite(ll));
  CHECK(ll < -1000.0);
}

TEST_CASE("log_sum_exp_rows handles -inf and large magnitudes") {
  Eigen::MatrixXd v(3, 2);
  const double inf = std::numeric_limits<double>::infinity();
  v << -1000.0, -1000.0, 0.0, -inf, 800.0, 800.0;
  const Eigen::VectorXd r = rgem::log_sum_exp_rows(v);
  CHECK(r(0) == doctest::Approx(-1000.0 + std::log(2.0)));
  CHECK(r(1) == doctest::Approx(0.0));
  CHECK(r(2) == doctest::Approx(800.0 + std::log(2.0)));
}

TEST_CASE("MixtureParams::validate") {
  auto p = two_cluster_params();
  CHECK_NOTHROW(p.validate());
  p.weights(0) = 0.9;
  CHECK_THROWS(p.validate());
}
