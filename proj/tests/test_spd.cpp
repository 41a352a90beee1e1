#include <doctest.h>

#include <cmath>

#include "rgem/spd.hpp"
#include "test_support.hpp"

using rgem::SpdMatrixd;
using rgem::test::example_2x2;

TEST_CASE("cholesky: identity factor") {
  const auto l = rgem::cholesky(SpdMatrixd::identity(3));
  CHECK(l.isApprox(Eigen::MatrixXd::Identity(3, 3)));
}

TEST_CASE("cholesky: hand-computed 2x2") {
  const SpdMatrixd a(example_2x2());
  const Eigen::MatrixXd l = rgem::cholesky(a);
  CHECK(l(0, 0) == doctest::Approx(2.0));
  CHECK(l(0, 1) == 0.0);
  CHECK(l(1, 0) == doctest::Approx(1.0));
  CHECK(l(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK((l * l.transpose()).isApprox(example_2x2()));
}

TEST_CASE("cholesky: indefinite input throws") {
  Eigen::Matrix2d a;
  a << 1, 2, 2, 1;
  const SpdMatrixd s(a);
  CHECK_FALSE(s.definite());
  CHECK_THROWS_AS(rgem::cholesky(s), rgem::IndefiniteError);
  CHECK_THROWS_AS(rgem::log_det(s), rgem::IndefiniteError);
}

TEST_CASE("cholesky: non-finite and non-square input") {
  Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
  a(0, 0) = std::nan("");
  CHECK_FALSE(SpdMatrixd(a).definite());
  CHECK_THROWS_AS(SpdMatrixd(Eigen::MatrixXd::Identity(2, 3)), rgem::DimensionError);
}

TEST_CASE("construction symmetrizes") {
  Eigen::Matrix2d a;
  a << 4, 1, 3, 3;
  const SpdMatrixd s(a);
  CHECK(s.matrix()(0, 1) == 2.0);
  CHECK(s.matrix()(1, 0) == 2.0);
}

TEST_CASE("log_det examples") {
  CHECK(rgem::log_det(SpdMatrixd::identity(5)) == doctest::Approx(0.0));
  CHECK(rgem::log_det(SpdMatrixd::identity(3, 2.0)) == doctest::Approx(3 * std::log(2.0)));
  CHECK(rgem::log_det(SpdMatrixd(example_2x2())) == doctest::Approx(std::log(8.0)));
}

TEST_CASE("solve_spd examples") {
  Eigen::Vector4d v(1, -2, 3.5, 0.25);
  CHECK(rgem::solve_spd(SpdMatrixd::identity(4), v).isApprox(Eigen::MatrixXd(v)));
  const Eigen::MatrixXd x = rgem::solve_spd(SpdMatrixd::identity(2, 2.0), Eigen::Vector2d(2, 4));
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(2.0));
  const Eigen::MatrixXd y = rgem::solve_spd(SpdMatrixd(example_2x2()), Eigen::Vector2d(2, 3));
  CHECK(y(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y(1) == doctest::Approx(1.0));
  CHECK_THROWS_AS(rgem::solve_spd(SpdMatrixd::identity(3), Eigen::Vector2d(1, 1)),
                  rgem::DimensionError);
}

TEST_CASE("quadratic_form examples") {
  CHECK(rgem::quadratic_form(SpdMatrixd::identity(3), Eigen::Vector3d(1, 2, 2)) ==
        doctest::Approx(9.0));
  CHECK(rgem::quadratic_form(SpdMatrixd(example_2x2()), Eigen::Vector2d::Zero()) == 0.0);
  CHECK(rgem::quadratic_form(SpdMatrixd(example_2x2()), Eigen::Vector2d(2, 3)) ==
        doctest::Approx(3.0));
}

TEST_CASE("quadratic_forms matches the row-by-row form") {
  rgem::Rng rng(7);
  const SpdMatrixd a(rgem::test::random_spd(rng, 6));
  const Eigen::MatrixXd rows = rgem::test::random_normal(rng, 20, 6);
  const Eigen::VectorXd q = rgem::quadratic_forms(a, rows);
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    CHECK(q(i) == doctest::Approx(rgem::quadratic_form(a, rows.row(i).transpose().eval())));
}

TEST_CASE("eig_extremes examples") {
  auto e = rgem::eig_extremes(SpdMatrixd::identity(4));
  CHECK(e.min_eig == doctest::Approx(1.0));
  CHECK(e.max_eig == doctest::Approx(1.0));
  e = rgem::eig_extremes(Eigen::Vector3d(1, 2, 3).asDiagonal().toDenseMatrix());
  CHECK(e.min_eig == doctest::Approx(1.0));
  CHECK(e.max_eig == doctest::Approx(3.0));
  Eigen::Matrix2d a;
  a << 1, 2, 2, 1;
  e = rgem::eig_extremes(a);
  CHECK(e.min_eig == doctest::Approx(-1.0));
  CHECK(e.max_eig == doctest::Approx(3.0));
}

TEST_CASE("property: log_det equals log of eigenvalue product") {
  rgem::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.uniform_index(30));
    const Eigen::MatrixXd a = rgem::test::random_spd(rng, dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
    const double expected = eig.eigenvalues().array().log().sum();
    const double got = rgem::log_det(SpdMatrixd(a));
    CHECK(std::abs(got - expected) <= 1e-8 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("property: solve then multiply back") {
  rgem::Rng rng(12);
  for (Eigen::Index dim : {1, 2, 10, 50, 200}) {
    const Eigen::MatrixXd a = rgem::test::random_spd(rng, dim);
    const Eigen::VectorXd b = rgem::test::random_normal(rng, dim, 1);
    const Eigen::VectorXd x = rgem::solve_spd(SpdMatrixd(a), b);
    CHECK((a * x - b).norm() <= 1e-8 * b.norm());
  }
}

TEST_CASE("property: quadratic form positive for nonzero vectors") {
  rgem::Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng.uniform_index(15));
    const SpdMatrixd a(rgem::test::random_spd(rng, dim));
    const Eigen::VectorXd v = rgem::test::random_normal(rng, dim, 1);
    CHECK(rgem::quadratic_form(a, v) > 0.0);
  }
}

TEST_CASE("property: cholesky rejects min_eig <= 0") {
  rgem::Rng rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng.uniform_index(10));
    Eigen::MatrixXd a = rgem::test::random_spd(rng, dim);
    const double shift = rgem::eig_extremes(a).min_eig + rng.uniform();
    a -= shift * Eigen::MatrixXd::Identity(dim, dim);
    CHECK_FALSE(SpdMatrixd(a).definite());
  }
  // Exactly singular.
  CHECK_FALSE(SpdMatrixd(Eigen::MatrixXd::Ones(3, 3)).definite());
}

TEST_CASE("long double instantiation") {
  using Ld = rgem::SpdMatrix<long double>;
  rgem::Matrix<long double> a(2, 2);
  a << 4, 2, 2, 3;
  CHECK(static_cast<double>(rgem::log_det(Ld(a))) == doctest::Approx(std::log(8.0)));
}
