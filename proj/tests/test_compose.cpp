#include <algorithm>
#include <catch2/catch_amalgamated.hpp>

#include "uqsd/compose.hpp"
#include "uqsd/discrimination.hpp"

using namespace uqsd;

TEST_CASE("composed counterexample inputs are 27-dim flat diagonals") {
  auto [r1, r2, r3] = counterexample_states(0.5, 0.5, 0.5);
  (void)r3;
  ProgrammableInstance inst = compose_instance(r1, r2, 1);
  REQUIRE(inst.total_dim == 27);
  REQUIRE(inst.rho_in_1.dim() == 27);
  SpectralDecomposition ed = hermitian_eigen(inst.rho_in_1.matrix());
  // 2 x 2 x 2 support axes, every weight (1/2)^3.
  for (int i = 0; i < 8; ++i) REQUIRE(ed.eigenvalues(i) == Catch::Approx(0.125).margin(1e-14));
  for (int i = 8; i < 27; ++i) REQUIRE(std::abs(ed.eigenvalues(i)) <= 1e-14);
}

TEST_CASE("composed spectra are the products of factor spectra") {
  for (std::uint64_t seed : {3ull, 4ull, 5ull}) {
    DensityMatrix rho1 = random_density(3, 2, seed * 11);
    DensityMatrix rho2 = random_density(3, 3, seed * 11 + 1);
    int n = 1 + static_cast<int>(seed % 2);
    ProgrammableInstance inst = compose_instance(rho1, rho2, n);

    auto spectrum = [](const DensityMatrix& rho) {
      return hermitian_eigen(rho.matrix()).eigenvalues;
    };
    RVec s1 = spectrum(rho1), s2 = spectrum(rho2);
    std::vector<double> expect;
    std::vector<double> data_factor(s1.size(), 1.0);
    // rho_in_1 = rho1 (x) rho2 (x) rho1^(x n): products over all index tuples.
    std::vector<std::vector<double>> factors(2 + n);
    factors[0].assign(s1.data(), s1.data() + s1.size());
    factors[1].assign(s2.data(), s2.data() + s2.size());
    for (int k = 0; k < n; ++k) factors[2 + k] = factors[0];
    expect.push_back(1.0);
    for (const auto& f : factors) {
      std::vector<double> next;
      next.reserve(expect.size() * f.size());
      for (double e : expect)
        for (double v : f) next.push_back(e * v);
      expect = std::move(next);
    }
    std::sort(expect.begin(), expect.end(), std::greater<>());
    RVec got = spectrum(inst.rho_in_1);
    REQUIRE(static_cast<std::size_t>(got.size()) == expect.size());
    for (Eigen::Index i = 0; i < got.size(); ++i)
      REQUIRE(got(i) == Catch::Approx(expect[static_cast<std::size_t>(i)]).margin(1e-9));
  }
}

TEST_CASE("composed supports factorize as projector tensor products") {
  DensityMatrix rho1 = random_density(3, 1, 41);
  DensityMatrix rho2 = random_density(3, 2, 42);
  ProgrammableInstance inst = compose_instance(rho1, rho2, 2);
  CMat p1 = support_projector(rho1);
  CMat p2 = support_projector(rho2);
  CMat expect = tensor(tensor(tensor(p1, p2), p1), p1);
  REQUIRE((support_projector(inst.rho_in_1) - expect).norm() <= 1e-9);
}

TEST_CASE("composed states validate and keep unit trace") {
  DensityMatrix rho1 = random_density(2, 2, 51);
  DensityMatrix rho2 = random_density(2, 1, 52);
  ProgrammableInstance inst = compose_instance(rho1, rho2, 3);
  REQUIRE(inst.total_dim == 32);
  REQUIRE(validate_density(inst.rho_in_1.matrix()).ok);
  REQUIRE(validate_density(inst.rho_in_2.matrix()).ok);
}

TEST_CASE("compose_instance enforces the dimension cap and argument ranges") {
  DensityMatrix rho1 = random_density(4, 2, 61);
  DensityMatrix rho2 = random_density(4, 2, 62);
  REQUIRE_NOTHROW(compose_instance(rho1, rho2, 2, 256));  // 4^4, exactly at cap
  REQUIRE_THROWS_MATCHES(compose_instance(rho1, rho2, 2, 255), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::dimension_overflow;
                         }));
  REQUIRE_THROWS_AS(compose_instance(rho1, rho2, 0), Error);
  DensityMatrix other = random_density(3, 2, 63);
  REQUIRE_THROWS_MATCHES(compose_instance(rho1, other, 1), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == Errc::dimension_mismatch;
                         }));
}

TEST_CASE("tensor_power matches repeated tensor") {
  CMat a(2, 2);
  a << Complex(1, 0), Complex(0, 1), Complex(0, -1), Complex(2, 0);
  REQUIRE((tensor_power(a, 1) - a).norm() == 0.0);
  REQUIRE((tensor_power(a, 3) - tensor(tensor(a, a), a)).norm() <= 1e-14);
}
