#include <catch2/catch_amalgamated.hpp>

#include "uqsd/states.hpp"

using namespace uqsd;

TEST_CASE("validate_density accepts valid states and reports clean residuals") {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = 0.75;
  m(1, 1) = 0.25;
  DensityValidation v = validate_density(m);
  REQUIRE(v.ok);
  REQUIRE(v.hermiticity <= 1e-15);
  REQUIRE(v.trace_error <= 1e-15);
  REQUIRE(v.min_eigenvalue >= 0.0);
}

TEST_CASE("validate_density rejects each broken invariant with a residual") {
  SECTION("not hermitian") {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = 1.0;
    m(0, 1) = Complex(0.3, 0.0);
    DensityValidation v = validate_density(m);
    REQUIRE_FALSE(v.ok);
    REQUIRE(v.hermiticity > 1e-9);
  }
  SECTION("negative eigenvalue") {
    CMat m = CMat::Zero(2, 2);
    m(0, 0) = 1.2;
    m(1, 1) = -0.2;
    DensityValidation v = validate_density(m);
    REQUIRE_FALSE(v.ok);
    REQUIRE(v.min_eigenvalue == Catch::Approx(-0.2).margin(1e-12));
  }
  SECTION("wrong trace") {
    CMat m = CMat::Identity(2, 2);
    DensityValidation v = validate_density(m);
    REQUIRE_FALSE(v.ok);
    REQUIRE(v.trace_error == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("constructor throws on invalid input") {
    CMat m = CMat::Identity(3, 3);
    REQUIRE_THROWS_MATCHES(DensityMatrix(m), Error, Catch::Matchers::Predicate<Error>(
        [](const Error& e) { return e.code() == Errc::validation_error; }));
  }
}

TEST_CASE("density_from_mixture matches the hand-computed two-state mixture") {
  // 1/2 |0><0| + 1/2 |+><+| = [[3/4, 1/4], [1/4, 1/4]]
  CVec e1(2), plus(2);
  e1 << 1.0, 0.0;
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  DensityMatrix rho =
      density_from_mixture({0.5, 0.5}, {PureState(e1), PureState(plus)}, "mix");
  REQUIRE(rho.matrix()(0, 0).real() == Catch::Approx(0.75).margin(1e-15));
  REQUIRE(rho.matrix()(0, 1).real() == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(rho.matrix()(1, 0).real() == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(rho.matrix()(1, 1).real() == Catch::Approx(0.25).margin(1e-15));
  REQUIRE(rho.label() == "mix");
}

TEST_CASE("density_from_mixture validates weights") {
  CVec e1(2);
  e1 << 1.0, 0.0;
  PureState psi(e1);
  REQUIRE_THROWS_MATCHES(density_from_mixture({0.7, 0.2}, {psi, psi}, ""), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::weight_error;
                         }));
  REQUIRE_THROWS_MATCHES(density_from_mixture({1.2, -0.2}, {psi, psi}, ""), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::weight_error;
                         }));
}

TEST_CASE("pure states must be normalized; normalized() fixes scale") {
  CVec v(2);
  v << 2.0, 0.0;
  REQUIRE_THROWS_AS(PureState(v), Error);
  PureState psi = PureState::normalized(v);
  REQUIRE(psi.amplitudes()(0).real() == Catch::Approx(1.0));
  DensityMatrix rho = psi.density("p");
  REQUIRE(rho.matrix()(0, 0).real() == Catch::Approx(1.0));
}

TEST_CASE("counterexample family has the documented diagonal structure") {
  auto [r1, r2, r3] = counterexample_states(0.3, 0.6, 0.8);
  REQUIRE(r1.dim() == 3);
  REQUIRE(r1.matrix()(0, 0).real() == Catch::Approx(0.3));
  REQUIRE(r1.matrix()(1, 1).real() == Catch::Approx(0.7));
  REQUIRE(r1.matrix()(2, 2).real() == 0.0);
  REQUIRE(r2.matrix()(1, 1).real() == Catch::Approx(0.6));
  REQUIRE(r2.matrix()(2, 2).real() == Catch::Approx(0.4));
  REQUIRE(r3.matrix()(0, 0).real() == Catch::Approx(0.8));
  REQUIRE(r3.matrix()(2, 2).real() == Catch::Approx(0.2));
  // Off-diagonals vanish identically.
  for (const auto* rho : {&r1, &r2, &r3})
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j)
        if (i != j) REQUIRE(std::abs(rho->matrix()(i, j)) == 0.0);
}

TEST_CASE("counterexample supports pairwise intersect on exactly one axis") {
  auto [r1, r2, r3] = counterexample_states(0.5, 0.5, 0.5, 4);
  REQUIRE(r1.dim() == 4);
  auto support = [](const DensityMatrix& rho) {
    SpectralDecomposition ed = hermitian_eigen(rho.matrix());
    Eigen::Index rank = 0;
    while (rank < ed.eigenvalues.size() && ed.eigenvalues(rank) > 1e-10) ++rank;
    CMat basis = ed.eigenvectors.leftCols(rank);
    return CMat(basis * basis.adjoint());
  };
  for (auto [a, b] : {std::pair{&r1, &r2}, {&r2, &r3}, {&r1, &r3}}) {
    CMat prod = support(*a) * support(*b);
    REQUIRE(numerical_rank(prod) == 1);
  }
}

TEST_CASE("counterexample rejects out-of-range coefficients and dimensions") {
  REQUIRE_THROWS_AS(counterexample_states(0.0, 0.5, 0.5), Error);
  REQUIRE_THROWS_AS(counterexample_states(0.5, 1.0, 0.5), Error);
  REQUIRE_THROWS_AS(counterexample_states(0.5, 0.5, 0.5, 2), Error);
}

TEST_CASE("random densities are valid, have the requested rank, and are reproducible") {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    Eigen::Index dim = 2 + static_cast<Eigen::Index>(seed % 3);
    Eigen::Index rank = 1 + static_cast<Eigen::Index>(seed % dim);
    DensityMatrix rho = random_density(dim, rank, seed);
    SpectralDecomposition ed = hermitian_eigen(rho.matrix());
    double sum = 0.0;
    Eigen::Index positive = 0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      REQUIRE(ed.eigenvalues(i) >= -1e-12);
      sum += ed.eigenvalues(i);
      if (ed.eigenvalues(i) > 1e-10) ++positive;
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    REQUIRE(positive == rank);
  }
  DensityMatrix a = random_density(4, 2, 424242);
  DensityMatrix b = random_density(4, 2, 424242);
  REQUIRE(a.matrix() == b.matrix());  // bitwise reproducible per seed
}

TEST_CASE("conjugated rotates by a unitary and rejects non-unitaries") {
  DensityMatrix rho = random_density(3, 2, 5);
  CMat u = random_unitary(3, 6);
  DensityMatrix rot = conjugated(rho, u);
  REQUIRE(std::abs(rot.matrix().trace().real() - 1.0) <= 1e-12);
  SpectralDecomposition before = hermitian_eigen(rho.matrix());
  SpectralDecomposition after = hermitian_eigen(rot.matrix());
  REQUIRE((before.eigenvalues - after.eigenvalues).cwiseAbs().maxCoeff() <= 1e-12);
  CMat not_unitary = 2.0 * u;
  REQUIRE_THROWS_AS(conjugated(rho, not_unitary), Error);
}

TEST_CASE("random pure states and unitaries are deterministic per seed") {
  PureState p1 = random_pure(5, 99);
  PureState p2 = random_pure(5, 99);
  REQUIRE(p1.amplitudes() == p2.amplitudes());
  REQUIRE(std::abs(p1.amplitudes().norm() - 1.0) <= 1e-12);
  CMat u1 = random_unitary(4, 77);
  CMat u2 = random_unitary(4, 77);
  REQUIRE(u1 == u2);
  REQUIRE((u1.adjoint() * u1 - CMat::Identity(4, 4)).norm() <= 1e-12);
}
