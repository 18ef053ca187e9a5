#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cft/phase_space.hpp"
#include "cft/rng.hpp"
#include "cft/states.hpp"

using namespace cft;
using Catch::Approx;

namespace {

/// Random states with <= 5 components, |center| <= 3, r <= 1.5.
OscillatorState random_state(CounterRng& rng) {
  const int ncomp = 1 + int(rng.next_double() * 5.0);
  std::vector<CoherentComponent> terms;
  for (int i = 0; i < ncomp; ++i) {
    const cplx c = std::polar(0.2 + rng.next_double(), 2.0 * M_PI * rng.next_double());
    const cplx mu(6.0 * rng.next_double() - 3.0, 6.0 * rng.next_double() - 3.0);
    terms.push_back({c, mu});
  }
  const double r = 1.5 * rng.next_double();
  const double theta = 2.0 * M_PI * rng.next_double() - M_PI;
  const cplx delta(2.0 * rng.next_double() - 1.0, 2.0 * rng.next_double() - 1.0);
  return make_custom(terms, r, theta, delta);
}

/// Position wavefunction of D(d) S(r) |0> for real d and real r >= 0:
/// psi(x) = pi^{-1/4} e^{r/2} exp(-e^{2r} (x - sqrt(2) d)^2 / 2).
double real_displaced_squeezed_psi(double x, double d, double r) {
  const double xq = x - std::sqrt(2.0) * d;
  return std::pow(M_PI, -0.25) * std::exp(0.5 * r) * std::exp(-0.5 * std::exp(2.0 * r) * xq * xq);
}

/// Simpson quadrature of the overlap of two real-parameter states.
double quadrature_overlap(double d1, double r1, double d2, double r2) {
  const double lo = -12.0, hi = 12.0;
  const int n = 4800;  // even
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x = lo + i * h;
    const double f = real_displaced_squeezed_psi(x, d1, r1) *
                     real_displaced_squeezed_psi(x, d2, r2);
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f;
  }
  return acc * h / 3.0;
}

}  // namespace

TEST_CASE("make_state: vacuum") {
  const auto s = make_vacuum();
  REQUIRE(s.components.size() == 1);
  CHECK(s.components[0].coeff == cplx(1.0, 0.0));
  CHECK(s.components[0].center == cplx(0.0, 0.0));
  CHECK(s.squeeze.r == 0.0);
  CHECK(s.norm == Approx(1.0).margin(1e-15));
}

TEST_CASE("make_state: displaced squeezed moves the displacement through the squeeze") {
  const double r = 0.93, delta = 0.78;
  const auto s = make_displaced_squeezed(cplx(delta, 0.0), r, 0.0);
  REQUIRE(s.components.size() == 1);
  // Interchange oracle: alpha' = cosh(r) alpha + e^{i theta} sinh(r) alpha*.
  const long double expected =
      std::cosh((long double)r) * (long double)delta +
      std::sinh((long double)r) * (long double)delta;
  CHECK(s.components[0].center.real() == Approx(double(expected)).epsilon(1e-14));
  CHECK(s.components[0].center.imag() == Approx(0.0).margin(1e-14));
  // Physical displacement of D(d) S |0> is d itself: <a> = center * e^{-r}.
  CHECK(s.components[0].center.real() * std::exp(-r) == Approx(delta).epsilon(1e-12));
}

TEST_CASE("make_state: cat without squeezing") {
  const double alpha = 2.42;
  const auto s = make_cat(cplx(alpha, 0.0), 0.0, 0.0);
  REQUIRE(s.components.size() == 2);
  CHECK(std::abs(s.components[0].center - cplx(-1.21, 0.0)) < 1e-14);
  CHECK(std::abs(s.components[1].center - cplx(1.21, 0.0)) < 1e-14);
  CHECK(std::abs(s.components[0].coeff - s.components[1].coeff) < 1e-14);
  // Appendix normalization oracle evaluated directly.
  const double n_expected = 2.0 * (1.0 + std::exp(-0.5 * alpha * alpha));
  CHECK(s.norm == Approx(n_expected).epsilon(1e-13));
  CHECK(s.norm == Approx(2.1070).epsilon(1e-3));
}

TEST_CASE("make_state: errors") {
  CHECK_THROWS_AS(parse_family("squeezed_cat"), std::invalid_argument);
  CHECK_THROWS_AS(make_displaced_squeezed(0.0, -0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_custom({{cplx(0.0, 0.0), cplx(1.0, 0.0)}}, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_state(StateFamily::cat, {{"r", 0.5}}), std::invalid_argument);
}

TEST_CASE("normalization") {
  CHECK(normalization(make_vacuum()) == 1.0);
  SECTION("the outer squeeze leaves N unchanged") {
    // N is a property of the coherent superposition the squeeze acts on.
    OscillatorState plain;
    plain.components = {{cplx(1.0, 0.0), cplx(-1.21, 0.4)}, {cplx(0.5, 0.2), cplx(1.21, 0.0)}};
    plain.squeeze = SqueezeParam(0.0, 0.0);
    OscillatorState squeezed = plain;
    squeezed.squeeze = SqueezeParam(0.93, 0.7);
    CHECK(normalization(canonicalize(squeezed)) ==
          Approx(normalization(canonicalize(plain))).epsilon(1e-13));
  }
  SECTION("two identical components") {
    const auto s = make_custom(
        {{cplx(1.0, 0.0), cplx(0.0, 0.0)}, {cplx(1.0, 0.0), cplx(0.0, 0.0)}}, 0.0, 0.0);
    REQUIRE(s.components.size() == 1);  // merged
    CHECK(normalization(s) == Approx(4.0).epsilon(1e-14));
  }
}

TEST_CASE("canonicalization merges and drops") {
  // A component pair closer than the merge tolerance collapses; zero
  // coefficients disappear.
  const auto s = make_custom({{cplx(1.0, 0.0), cplx(1.0, 0.0)},
                              {cplx(2.0, 0.0), cplx(1.0, 5e-11)},
                              {cplx(1e-15, 0.0), cplx(2.0, 0.0)}},
                             0.0, 0.0);
  REQUIRE(s.components.size() == 1);
  CHECK(std::abs(s.components[0].coeff - cplx(3.0, 0.0)) < 1e-12);
}

TEST_CASE("canonicalization is idempotent") {
  CounterRng rng(99, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_state(rng);
    const auto s2 = canonicalize(s);
    REQUIRE(s2.components.size() == s.components.size());
    for (std::size_t i = 0; i < s.components.size(); ++i) {
      CHECK(std::abs(s2.components[i].coeff - s.components[i].coeff) < 1e-12);
      CHECK(std::abs(s2.components[i].center - s.components[i].center) < 1e-12);
    }
    CHECK(s2.norm == Approx(s.norm).epsilon(1e-12));
  }
}

TEST_CASE("fock_expand: vacuum") {
  const auto f = fock_expand(make_vacuum(), 4);
  REQUIRE(f.amplitudes.size() == 5);
  CHECK(std::abs(f.amplitudes[0] - cplx(1.0, 0.0)) < 1e-14);
  for (int n = 1; n <= 4; ++n) CHECK(std::abs(f.amplitudes[n]) < 1e-14);
}

TEST_CASE("fock_expand: squeezed vacuum") {
  const double r = 0.93;
  const auto f = fock_expand(make_displaced_squeezed(0.0, r, 0.0), 21);
  for (int n = 1; n <= 21; n += 2) CHECK(std::abs(f.amplitudes[n]) < 1e-15);
  CHECK(std::norm(f.amplitudes[0]) == Approx(1.0 / std::cosh(r)).epsilon(1e-12));
  CHECK(std::norm(f.amplitudes[0]) == Approx(0.6828).epsilon(1e-3));
  // Even amplitudes against the two-photon expansion
  // a_{2m} = (-tau/2)^m sqrt((2m)!)/m! / sqrt(cosh r).
  const double tau = std::tanh(r);
  double fact2m = 1.0, factm = 1.0;
  for (int m = 1; m <= 3; ++m) {
    fact2m *= (2.0 * m - 1.0) * (2.0 * m);
    factm *= m;
    const double expected = std::pow(-tau / 2.0, m) * std::sqrt(fact2m) / factm /
                            std::sqrt(std::cosh(r));
    CHECK(f.amplitudes[2 * m].real() == Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("fock_expand: coherent state is Poisson") {
  const auto f = fock_expand(make_displaced_squeezed(cplx(1.0, 0.0), 0.0, 0.0), 12);
  double fact = 1.0;
  for (int n = 0; n <= 12; ++n) {
    if (n > 0) fact *= n;
    CHECK(std::norm(f.amplitudes[n]) == Approx(std::exp(-1.0) / fact).epsilon(1e-10));
  }
}

TEST_CASE("fock_expand: underflow of extreme displacement surfaces as error") {
  const auto s = make_displaced_squeezed(cplx(60.0, 0.0), 0.0, 0.0);
  CHECK_THROWS_AS(fock_expand(s, 10), std::runtime_error);
}

TEST_CASE("fock tail of the four calibrated states is negligible at n_max 500") {
  const std::vector<OscillatorState> states = {
      make_displaced_squeezed(0.0, 0.93, 0.0),
      make_displaced_squeezed(cplx(0.78, 0.0), 0.93, 0.0),
      make_cat(cplx(2.42, 0.0), 0.58, 0.0),
      make_gkp(cplx(2.50, 0.0), 0.93, 0.0),
  };
  for (const auto& s : states) CHECK(fock_expand(s, 500).sum_sq() >= 1.0 - 1e-8);
}

TEST_CASE("fidelity: self and paper pairs") {
  SECTION("identity") {
    const auto s = make_cat(cplx(2.42, 0.0), 0.58, 0.0);
    CHECK(fidelity(s, s) == Approx(1.0).margin(1e-8));
  }
  SECTION("calibrated vs fitted squeezed state") {
    const auto cal = make_displaced_squeezed(0.0, 0.93, 0.0);
    const auto fit = make_displaced_squeezed(cplx(0.003, -0.184), 0.938, 0.041);
    CHECK(fidelity(cal, fit) == Approx(0.993).margin(0.002));
  }
  SECTION("calibrated vs fitted grid codeword") {
    const auto cal = make_gkp(cplx(2.50, 0.0), 0.93, 0.0);
    const auto fit = make_gkp(cplx(2.471, 0.022), 0.892, 0.103, cplx(0.001, -0.002));
    CHECK(fidelity(cal, fit) == Approx(0.985).margin(0.002));
  }
}

TEST_CASE("fidelity overlap oracle") {
  SECTION("vacuum") {
    CHECK(fidelity_overlap_oracle(make_vacuum(), make_vacuum()) == Approx(1.0).margin(1e-12));
  }
  SECTION("coherent against vacuum") {
    const auto c1 = make_displaced_squeezed(cplx(1.0, 0.0), 0.0, 0.0);
    CHECK(fidelity_overlap_oracle(c1, make_vacuum()) == Approx(std::exp(-1.0)).epsilon(1e-12));
  }
  SECTION("calibrated vs fitted cat") {
    const auto cal = make_cat(cplx(2.42, 0.0), 0.58, 0.0);
    const auto fit =
        make_cat(cplx(2.398, -0.009), 0.543, 0.110, cplx(0.020, -0.031));
    CHECK(fidelity_overlap_oracle(cal, fit) == Approx(0.989).margin(0.002));
  }
}

TEST_CASE("displaced-squeezed overlap against position-space quadrature") {
  // Validates both the closed-form overlap and the Fock amplitude formula
  // on real-parameter cases where the wavefunctions are real Gaussians.
  const struct {
    double d1, r1, d2, r2;
  } cases[] = {
      {0.78, 0.93, 0.0, 0.93},
      {0.5, 0.3, -0.4, 1.1},
      {0.0, 0.0, 1.0, 0.0},
      {1.2, 0.58, 0.3, 0.0},
  };
  for (const auto& c : cases) {
    const double byquad = quadrature_overlap(c.d1, c.r1, c.d2, c.r2);
    const cplx byformula = displaced_squeezed_overlap(
        cplx(c.d1, 0.0), SqueezeParam(c.r1, 0.0), cplx(c.d2, 0.0), SqueezeParam(c.r2, 0.0));
    CHECK(byformula.imag() == Approx(0.0).margin(1e-12));
    CHECK(byformula.real() == Approx(byquad).margin(1e-9));

    const auto fa = fock_expand(make_displaced_squeezed(cplx(c.d1, 0.0), c.r1, 0.0), 200);
    const auto fb = fock_expand(make_displaced_squeezed(cplx(c.d2, 0.0), c.r2, 0.0), 200);
    cplx byfock = 0.0;
    for (int n = 0; n <= 200; ++n) byfock += std::conj(fa.amplitudes[n]) * fb.amplitudes[n];
    CHECK(std::abs(byfock - byformula) < 1e-10);
  }
}

TEST_CASE("property: fidelity routes agree, symmetric, bounded") {
  CounterRng rng(2024, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const auto a = random_state(rng);
    const auto b = random_state(rng);
    const double fab = fidelity(a, b, 500);
    const double fba = fidelity(b, a, 500);
    CHECK(fab == Approx(fba).margin(1e-10));
    CHECK(fab >= 0.0);
    CHECK(fab <= 1.0 + 1e-9);
    CHECK(fidelity_overlap_oracle(a, b) == Approx(fab).margin(1e-8));
  }
}

TEST_CASE("property: global phase is unobservable") {
  CounterRng rng(7, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_state(rng);
    const auto rotated = rotate_global_phase(s, 2.0 * M_PI * rng.next_double());
    CHECK(normalization(rotated) == Approx(normalization(s)).epsilon(1e-12));
    CHECK(fidelity_overlap_oracle(s, rotated) == Approx(1.0).margin(1e-10));
    const cplx beta(rng.next_double() - 0.5, rng.next_double() - 0.5);
    CHECK(std::abs(char_fn(rotated, beta) - char_fn(s, beta)) < 1e-12);
    CHECK(wigner_fn(rotated, beta) == Approx(wigner_fn(s, beta)).margin(1e-12));
  }
}
