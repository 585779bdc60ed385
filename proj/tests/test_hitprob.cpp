#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "dicewalk/hitprob.hpp"

#include "reference_values.hpp"

using dicewalk::custom_die;
using dicewalk::custom_die_exact;
using dicewalk::die_spec;
using dicewalk::errc;
using dicewalk::fair_die;
using dicewalk::rational;

namespace {

template <class Fn>
void require_error(Fn&& fn, errc want) {
  try {
    fn();
    FAIL("expected a dicewalk::error");
  } catch (const dicewalk::error& e) {
    CHECK(e.kind() == want);
  }
}

// Same recurrence in exact arithmetic; p(0) = 1, p(i) = sum_j q_j p(i - j).
std::vector<rational> exact_hit_series(const die_spec& die, size_t n) {
  REQUIRE(die.has_exact());
  std::vector<rational> p(n + 1, rational(0));
  p[0] = rational(1);
  for (size_t i = 1; i <= n; ++i)
    for (size_t f = 0; f < die.faces().size(); ++f) {
      const long long j =
          static_cast<long long>(i) - die.faces()[f].value;
      if (j >= 0) p[i] += die.exact_probs()[f] * p[static_cast<size_t>(j)];
    }
  return p;
}

// Durand-Kerner on a monic polynomial, coefficients a[0..V] with a[V] = 1.
std::vector<std::complex<double>> durand_kerner(const std::vector<double>& a) {
  const size_t V = a.size() - 1;
  std::vector<std::complex<double>> z(V);
  const std::complex<double> seed(0.4, 0.9);
  z[0] = seed;
  for (size_t j = 1; j < V; ++j) z[j] = z[j - 1] * seed;
  auto eval = [&](std::complex<double> x) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t i = a.size(); i-- > 0;) acc = acc * x + a[i];
    return acc;
  };
  for (int iter = 0; iter < 500; ++iter) {
    for (size_t j = 0; j < V; ++j) {
      std::complex<double> d(1.0, 0.0);
      for (size_t m = 0; m < V; ++m)
        if (m != j) d *= z[j] - z[m];
      z[j] -= eval(z[j]) / d;
    }
  }
  return z;
}

std::vector<double> monic_coeffs(const die_spec& die) {
  const auto V = static_cast<size_t>(die.max_value());
  std::vector<double> a(V + 1, 0.0);
  a[V] = 1.0;
  for (const auto& f : die.faces())
    a[V - static_cast<size_t>(f.value)] -= f.prob;
  return a;
}

}  // namespace

TEST_CASE("hit probabilities match the exact recurrence") {
  const auto die = fair_die(6);
  // denominators divide 6^x, so 64-bit rationals cap the exact horizon
  const auto series = dicewalk::hit_probabilities(die, 20);
  const auto exact = exact_hit_series(die, 20);
  REQUIRE(series.values.size() == 21);
  CHECK(series.values[0] == 1.0);
  for (size_t x = 0; x <= 20; ++x)
    CHECK(series.values[x] ==
          Catch::Approx(exact[x].to_double()).margin(1e-15));
}

TEST_CASE("fair six-sided die has p(x) = 7^(x-1)/6^x up to the first wrap") {
  const auto exact = exact_hit_series(fair_die(6), 6);
  rational num(1), den(6);
  for (long long x = 1; x <= 6; ++x) {
    CHECK(exact[static_cast<size_t>(x)] == num / den);
    num *= rational(7);
    den *= rational(6);
  }
}

TEST_CASE("hit probabilities converge to one over the mean") {
  const auto series = dicewalk::hit_probabilities(fair_die(6), 300);
  CHECK(series.limit == Catch::Approx(2.0 / 7.0).margin(1e-16));
  REQUIRE(series.limit_exact.has_value());
  CHECK(*series.limit_exact == rational(2, 7));
  CHECK(std::abs(series.values[300] - 2.0 / 7.0) < 1e-15);
  CHECK(series.horizon() == 300);
}

TEST_CASE("biased exact recurrence agrees with doubles") {
  const auto die = custom_die_exact(
      {{1, rational(1, 2)}, {2, rational(1, 4)}, {5, rational(1, 4)}});
  const auto series = dicewalk::hit_probabilities(die, 20);
  const auto exact = exact_hit_series(die, 20);
  for (size_t x = 0; x <= 20; ++x)
    CHECK(series.values[x] ==
          Catch::Approx(exact[x].to_double()).margin(1e-15));
  REQUIRE(series.limit_exact.has_value());
  CHECK(*series.limit_exact == rational(1) / die.exact_mean());
}

TEST_CASE("spectrum of the fair six-sided die") {
  const auto spec = dicewalk::spectral(fair_die(6));
  REQUIRE(spec.roots.size() == 6);
  CHECK(spec.dominant_index == 0);  // sorted by modulus, 1 dominates
  CHECK(std::abs(spec.roots[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
  CHECK(spec.p_at_one < 1e-12);
  CHECK(spec.derivative_at_one == Catch::Approx(3.5).margin(1e-12));
  CHECK(spec.subdominant_max_modulus ==
        Catch::Approx(refvals::kFairSixRho).margin(1e-12));
  for (double r : spec.residuals) CHECK(r < 1e-12);
}

TEST_CASE("spectrum agrees with an independent root finder") {
  for (const auto& die : {fair_die(6), fair_die(4),
                          custom_die({{1, 0.3}, {2, 0.2}, {7, 0.5}})}) {
    const auto spec = dicewalk::spectral(die);
    auto dk = durand_kerner(monic_coeffs(die));
    auto mine = spec.roots;
    auto by_value = [](const std::complex<double>& x,
                       const std::complex<double>& y) {
      if (std::abs(x.real() - y.real()) > 1e-9) return x.real() < y.real();
      return x.imag() < y.imag();
    };
    std::sort(dk.begin(), dk.end(), by_value);
    std::sort(mine.begin(), mine.end(), by_value);
    REQUIRE(dk.size() == mine.size());
    for (size_t i = 0; i < dk.size(); ++i)
      CHECK(std::abs(dk[i] - mine[i]) < 1e-8);
  }
}

TEST_CASE("two-step die has subdominant modulus sqrt(1/2)") {
  // z^3 - z^2/2 - 1/2 = (z - 1)(z^2 + z/2 + 1/2); the conjugate pair has
  // product 1/2, so each factor has modulus sqrt(1/2).
  const auto spec = dicewalk::spectral(custom_die({{1, 0.5}, {3, 0.5}}));
  REQUIRE(spec.roots.size() == 3);
  CHECK(spec.subdominant_max_modulus ==
        Catch::Approx(std::sqrt(0.5)).margin(1e-12));
}

TEST_CASE("unit-step die is the degenerate spectrum") {
  const auto die = fair_die(1);
  const auto spec = dicewalk::spectral(die);
  REQUIRE(spec.roots.size() == 1);
  CHECK(std::abs(spec.roots[0] - std::complex<double>(1.0, 0.0)) < 1e-14);
  CHECK(spec.subdominant_max_modulus == 0.0);
  const auto series = dicewalk::hit_probabilities(die, 50);
  for (double v : series.values) CHECK(v == 1.0);
  const auto rep = dicewalk::convergence_envelope(series, spec);
  CHECK(rep.c_est == 0.0);
  CHECK(rep.verified);
}

TEST_CASE("envelope certifies geometric convergence for the fair die") {
  const auto die = fair_die(6);
  const auto series = dicewalk::hit_probabilities(die, 200);
  const auto spec = dicewalk::spectral(die);
  const auto rep = dicewalk::convergence_envelope(series, spec);
  CHECK(rep.verified);
  CHECK(rep.c_est > 0.45);
  CHECK(rep.c_est < 0.53);
  CHECK(rep.argmax_x == 6);
  CHECK(rep.noise_floor == 1e-13);
  CHECK(rep.partial_sum_bound > 0.0);
  CHECK(rep.partial_sum_bound < 1.0);

  double rho_x = 1.0;
  for (size_t x = 1; x <= 200; ++x) {
    rho_x *= spec.subdominant_max_modulus;
    CHECK(std::abs(series.values[x] - series.limit) <=
          rep.c_est * rho_x + rep.noise_floor);
  }
}

TEST_CASE("envelope input validation") {
  const auto spec6 = dicewalk::spectral(fair_die(6));
  require_error(
      [&] {
        dicewalk::convergence_envelope(dicewalk::hit_probabilities(fair_die(6), 5),
                                       spec6);
      },
      errc::insufficient_data);
  require_error(
      [&] {
        dicewalk::convergence_envelope(dicewalk::hit_probabilities(fair_die(5), 50),
                                       spec6);
      },
      errc::invalid_input);
}

TEST_CASE("expected hits approach the density times the member count") {
  const auto series = dicewalk::hit_probabilities(fair_die(6), 10000);
  const auto ts = dicewalk::target_set::primes(10000);
  const double hits = dicewalk::expected_hits(series, ts, 10000);
  CHECK(hits / static_cast<double>(ts.size()) ==
        Catch::Approx(2.0 / 7.0).margin(1e-3));
  require_error([&] { dicewalk::expected_hits(series, ts, 10001); },
                errc::out_of_range);
  const auto small = dicewalk::target_set::primes(100);
  require_error([&] { dicewalk::expected_hits(series, small, 5000); },
                errc::out_of_range);
}
