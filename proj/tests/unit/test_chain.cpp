#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "isingrad/chain.hpp"
#include "isingrad/errors.hpp"

using namespace isingrad;

namespace {

// Brute-force energy straight from the pair list, independent of ChainSpec::bonds().
double reference_energy(std::uint32_t bits, int n, double beta, bool all_pairs, bool cyclic) {
  auto s = [&](int i) { return ((bits >> i) & 1u) ? 0.5 : -0.5; };
  double e = 0.0;
  for (int i = 0; i < n; ++i) e += s(i);
  if (all_pairs) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) e -= beta * s(i) * s(j);
  } else {
    for (int i = 0; i + 1 < n; ++i) e -= beta * s(i) * s(i + 1);
    if (cyclic && n > 2) e -= beta * s(n - 1) * s(0);
  }
  return e;
}

}  // namespace

TEST_CASE("chain bonds") {
  CHECK(ChainSpec(2, 0.1).bonds().size() == 1);
  CHECK(ChainSpec(3, 0.1).bonds().size() == 3);
  CHECK(ChainSpec(6, 0.1).bonds().size() == 6);
  CHECK(ChainSpec(6, 0.1, Range::kNearestNeighbor, Boundary::kOpen).bonds().size() == 5);
  CHECK(ChainSpec(5, 0.1, Range::kAllPairs).bonds().size() == 10);
  CHECK(ChainSpec(1, 0.3).bonds().empty());
  CHECK(ChainSpec(6, 0.1).neighbors(0) == std::vector<int>{1, 5});
  CHECK_THROWS_AS(ChainSpec(0, 0.1), ArgumentError);
  CHECK_THROWS_AS(ChainSpec(3, -0.1), ArgumentError);
  CHECK_THROWS_AS(ChainSpec(3, NAN), ArgumentError);
}

TEST_CASE("energy of basis states") {
  const ChainSpec spec(6, 0.1);
  CHECK(energy_of(BasisState::all_up(6), spec) == doctest::Approx(2.85).epsilon(1e-15));
  CHECK(energy_of(BasisState::all_down(6), spec) == doctest::Approx(-3.15).epsilon(1e-15));
  // One flipped spin costs 1 - beta relative to the fully excited chain.
  for (double beta : {0.1, 0.9, 1.5, 10.0}) {
    const ChainSpec s(6, beta);
    const double gap = energy_of(BasisState::all_up(6), s) - energy_of(BasisState(0b111110u, 6), s);
    CHECK(gap == doctest::Approx(1.0 - beta).epsilon(1e-13));
    CHECK((gap < 0.0) == (beta > 1.0));
  }
  CHECK_THROWS_AS(energy_of(BasisState::all_up(5), spec), ArgumentError);
}

TEST_CASE("energy matches brute force on every configuration") {
  for (int n = 1; n <= 6; ++n)
    for (double beta : {0.0, 0.37, 2.5})
      for (bool all_pairs : {false, true})
        for (bool cyclic : {false, true}) {
          const ChainSpec spec(n, beta, all_pairs ? Range::kAllPairs : Range::kNearestNeighbor,
                               cyclic ? Boundary::kCyclic : Boundary::kOpen);
          for (std::uint32_t b = 0; b < (1u << n); ++b) {
            CHECK(energy_of(BasisState(b, n), spec) ==
                  doctest::Approx(reference_energy(b, n, beta, all_pairs, cyclic)).epsilon(1e-14));
          }
        }
}

TEST_CASE("spectrum") {
  SUBCASE("single spin") {
    const auto levels = spectrum(ChainSpec(1, 0.7));
    REQUIRE(levels.size() == 2);
    CHECK(levels[0].energy == -0.5);
    CHECK(levels[1].energy == 0.5);
  }
  SUBCASE("weak coupling keeps the fully excited state on top") {
    const auto levels = spectrum(ChainSpec(6, 0.1));
    CHECK(levels.back().representative.bits() == 0b111111u);
    CHECK(levels.back().degeneracy == 1);
    CHECK(levels.front().representative.bits() == 0u);
    int total = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      total += levels[k].degeneracy;
      if (k > 0) CHECK(levels[k].energy > levels[k - 1].energy);
    }
    CHECK(total == 64);
  }
  SUBCASE("strong coupling pushes both ferromagnetic states down") {
    const auto levels = spectrum(ChainSpec(6, 10.0));
    // -3 - 15 and +3 - 15, then the next states lie about beta higher.
    CHECK(levels[0].representative.bits() == 0u);
    CHECK(levels[1].representative.bits() == 0b111111u);
    CHECK(levels[0].degeneracy == 1);
    CHECK(levels[1].degeneracy == 1);
    CHECK(levels[2].energy - levels[1].energy >= 0.5 * 10.0);
  }
  SUBCASE("enumeration bound") {
    CHECK_THROWS_AS(spectrum(ChainSpec(21, 0.1)), ResourceError);
  }
}

TEST_CASE("gamma eigenvalues") {
  const ChainSpec spec(5, 0.3);
  CHECK(gamma_eigenvalue(BasisState(0b00111u, 5), 1, spec) == doctest::Approx(0.7));
  CHECK(gamma_eigenvalue(BasisState(0b00010u, 5), 1, spec) == doctest::Approx(1.3));
  CHECK(gamma_eigenvalue(BasisState(0b00001u, 5), 1, spec) == doctest::Approx(1.0));

  const ChainSpec all(4, 0.2, Range::kAllPairs);
  CHECK(gamma_eigenvalue(BasisState::all_up(4), 0, all) == doctest::Approx(1.0 - 0.2 * 1.5));

  // Positive for beta < 1 on every configuration; some negative for beta > 1.
  for (double beta : {0.5, 0.99, 1.5}) {
    const ChainSpec s(6, beta);
    double lowest = 1e9;
    for (std::uint32_t b = 0; b < 64; ++b)
      for (int i = 0; i < 6; ++i) lowest = std::min(lowest, gamma_eigenvalue(BasisState(b, 6), i, s));
    if (beta < 1.0) {
      CHECK(lowest > 0.0);
    } else {
      CHECK(lowest < 0.0);
    }
  }
}

TEST_CASE("operator matrices") {
  for (int n = 1; n <= 6; ++n) {
    const ChainSpec spec(n, 0.23);
    const OperatorSet ops = build_operators(spec);
    const Eigen::Index dim = Eigen::Index{1} << n;
    for (std::uint32_t b = 0; b < dim; ++b) {
      CHECK(ops.hamiltonian.diag()[b] == doctest::Approx(energy_of(BasisState(b, n), spec)));
    }
    for (int i = 0; i < n; ++i) {
      CHECK(ops.sz[i].is_diagonal());
      CHECK(ops.gamma[i].is_diagonal());
      const Eigen::MatrixXcd sp = ops.splus[i].dense();
      CHECK((sp * sp).norm() == 0.0);
      CHECK((sp.imag()).norm() == 0.0);
      CHECK((ops.gamma_cubed[i].diag() - ops.gamma[i].diag().array().cube().matrix()).norm() == 0.0);
      // [S+, S-] = 2 S^z on one site.
      const Eigen::MatrixXcd comm = sp * ops.sminus[i].dense() - ops.sminus[i].dense() * sp;
      CHECK((comm - 2.0 * ops.sz[i].dense()).norm() == 0.0);
    }
  }
  CHECK_THROWS_AS(build_operators(ChainSpec(9, 0.1)), ResourceError);
}

TEST_CASE("spectrum csv") {
  std::ostringstream out;
  write_spectrum_csv(out, spectrum(ChainSpec(2, 0.5)));
  CHECK(out.str() ==
        "energy,degeneracy,representative_bits\n"
        "-1.125,1,00\n"
        "0.125,2,10\n"
        "0.875,1,11\n");
}
