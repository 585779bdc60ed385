#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "dicewalk/exactdist.hpp"

#include "reference_values.hpp"

using dicewalk::compute_lk;
using dicewalk::compute_lk_sweep;
using dicewalk::custom_die;
using dicewalk::custom_die_exact;
using dicewalk::errc;
using dicewalk::fair_die;
using dicewalk::lk_options;
using dicewalk::rational;
using dicewalk::target_set;

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

const target_set& primes1k() {
  static const target_set ts = target_set::primes(1000);
  return ts;
}

}  // namespace

TEST_CASE("first hit of a prime by the fair die") {
  const auto d = compute_lk(fair_die(6), primes1k(), 1);
  CHECK(d.k == 1);
  CHECK(d.n_min == 1);
  CHECK(d.prob(1) == Catch::Approx(0.5).margin(1e-15));
  CHECK(d.prob(2) == Catch::Approx(2.0 / 9.0).margin(1e-15));
  CHECK(d.prob(3) == Catch::Approx(5.0 / 54.0).margin(1e-15));
  CHECK(d.prob(0) == 0.0);
  CHECK(d.prob(d.n_max() + 1) == 0.0);
  CHECK(d.tail_mass <= d.tail_eps);
  CHECK(d.tail_eps == 1e-13);
  CHECK(d.total_mass() + d.tail_mass == Catch::Approx(1.0).margin(1e-12));
  const auto m = dicewalk::moments(d);
  CHECK(m.mean == Catch::Approx(refvals::kMean[0]).margin(5e-9));
  CHECK(m.moment_error_bound <= 1e-6);
}

TEST_CASE("enumeration oracle pins the first hitting probabilities exactly") {
  const auto pmf1 = dicewalk::brute_force_pmf(fair_die(6), primes1k(), 1, 6);
  CHECK(pmf1[1] == rational(1, 2));
  CHECK(pmf1[2] == rational(2, 9));
  CHECK(pmf1[3] == rational(5, 54));
  const auto pmf2 = dicewalk::brute_force_pmf(fair_die(6), primes1k(), 2, 6);
  CHECK(pmf2[1] == rational(0));
  CHECK(pmf2[2] == rational(7, 36));
}

TEST_CASE("forward recursion matches exhaustive enumeration") {
  const auto biased = custom_die_exact(
      {{1, rational(1, 2)}, {2, rational(1, 4)}, {5, rational(1, 4)}});
  for (const auto& die : {fair_die(6), biased}) {
    for (int k = 1; k <= 3; ++k) {
      const auto brute = dicewalk::brute_force_pmf(die, primes1k(), k, 6);
      const auto dp = compute_lk(die, primes1k(), k);
      for (long long n = 0; n <= 6; ++n)
        CHECK(std::abs(dp.prob(n) -
                       brute[static_cast<size_t>(n)].to_double()) <= 1e-12);
    }
  }
}

TEST_CASE("zero hits is the point mass at zero rolls") {
  const auto d = compute_lk(fair_die(6), primes1k(), 0);
  CHECK(d.n_min == 0);
  REQUIRE(d.pmf.size() == 1);
  CHECK(d.pmf[0] == 1.0);
  CHECK(d.tail_mass == 0.0);
  const auto m = dicewalk::moments(d);
  CHECK(m.mean == 0.0);
  CHECK(m.stddev == 0.0);
  CHECK_FALSE(m.has_shape());
  require_error([&] { m.skewness(); }, errc::undefined);
  require_error([&] { m.kurtosis(); }, errc::undefined);
  require_error([&] { dicewalk::scaled_pdf(d); }, errc::undefined);
}

TEST_CASE("one sweep reproduces every single-k run bit for bit") {
  const auto singles = [&] {
    std::vector<dicewalk::lk_distribution> v;
    for (int k = 1; k <= 6; ++k) v.push_back(compute_lk(fair_die(6), primes1k(), k));
    return v;
  }();
  const auto sweep = compute_lk_sweep(fair_die(6), primes1k(), 6);
  REQUIRE(sweep.size() == 6);
  for (int k = 1; k <= 6; ++k) {
    const auto& s = singles[static_cast<size_t>(k - 1)];
    const auto& w = sweep[static_cast<size_t>(k - 1)];
    CHECK(w.k == k);
    CHECK(w.n_min == s.n_min);
    REQUIRE(w.pmf.size() >= s.pmf.size());
    for (size_t i = 0; i < s.pmf.size(); ++i) CHECK(w.pmf[i] == s.pmf[i]);
    double beyond = 0.0;
    for (size_t i = s.pmf.size(); i < w.pmf.size(); ++i) beyond += w.pmf[i];
    CHECK(beyond <= s.tail_mass + 1e-15);
    CHECK(std::abs(dicewalk::moments(w).mean - dicewalk::moments(s).mean) < 1e-12);
  }
}

TEST_CASE("mean hitting time increases strictly in k") {
  const auto sweep = compute_lk_sweep(fair_die(6), primes1k(), 30);
  double prev = 0.0;
  for (const auto& d : sweep) {
    const double m = dicewalk::moments(d).mean;
    CHECK(m > prev);
    prev = m;
  }
}

TEST_CASE("unit-step die gives deterministic hitting times") {
  const auto ts = target_set::from_list({2, 3});
  const auto d1 = compute_lk(fair_die(1), ts, 1);
  REQUIRE(d1.pmf.size() == 2);  // band starts at n_min = k
  CHECK(d1.prob(2) == 1.0);
  const auto d2 = compute_lk(fair_die(1), ts, 2);
  CHECK(d2.prob(3) == 1.0);
  const auto m = dicewalk::moments(d2);
  CHECK(m.mean == 3.0);
  CHECK(m.stddev == 0.0);
  CHECK_FALSE(m.has_shape());
}

TEST_CASE("more hits than the list holds is rejected up front") {
  const auto ts = target_set::from_list({2, 3});
  require_error([&] { compute_lk(fair_die(6), ts, 3); }, errc::invalid_input);
}

TEST_CASE("horizon exhaustion carries the partial distribution") {
  lk_options opt;
  opt.max_horizon = 20;
  try {
    compute_lk(fair_die(6), primes1k(), 10, opt);
    FAIL("expected horizon_error");
  } catch (const dicewalk::horizon_error& e) {
    CHECK(e.kind() == errc::horizon);
    const auto& partial = e.partial();
    CHECK(partial.k == 10);
    CHECK(partial.tail_mass > 0.0);
    require_error([&] { dicewalk::moments(partial); }, errc::tolerance);
  }
}

TEST_CASE("walks that overshoot a finite list stop at the defect") {
  // Faces {1,3} against targets {2,3}: rolling 1 then 3 jumps from sum 1 to
  // sum 4, past the last member, so a quarter of the mass never absorbs.
  // The engine must notice the stall instead of iterating to max_horizon.
  const auto ts = target_set::from_list({2, 3});
  try {
    compute_lk(custom_die({{1, 0.5}, {3, 0.5}}), ts, 1);
    FAIL("expected horizon_error");
  } catch (const dicewalk::horizon_error& e) {
    CHECK(e.kind() == errc::horizon);
    const auto& partial = e.partial();
    CHECK(partial.prob(1) == Catch::Approx(0.5).margin(1e-15));
    CHECK(partial.prob(2) == Catch::Approx(0.25).margin(1e-15));
    CHECK(partial.tail_mass == Catch::Approx(0.25).margin(1e-15));
    CHECK(partial.n_max() < 10);  // stalls right away, no horizon grind
  }
}

TEST_CASE("tighter tail bounds extend the horizon") {
  // Relax the moment guard so tail_eps alone decides when to stop.
  lk_options loose, tight;
  loose.tail_eps = 1e-4;
  loose.moment_tol = 1e300;
  tight.tail_eps = 1e-13;
  tight.moment_tol = 1e300;
  const auto dl = compute_lk(fair_die(6), primes1k(), 5, loose);
  const auto dt = compute_lk(fair_die(6), primes1k(), 5, tight);
  CHECK(dl.tail_mass <= 1e-4);
  CHECK(dt.tail_mass <= 1e-13);
  CHECK(dt.n_max() > dl.n_max());
  CHECK(std::abs(dicewalk::moments(dt).mean - dicewalk::moments(dl).mean) < 1e-2);
}

TEST_CASE("default stop rule certifies a tiny moment bound") {
  const auto d = compute_lk(fair_die(6), primes1k(), 5);
  CHECK(d.tail_mass <= d.tail_eps);
  CHECK(dicewalk::moments(d).moment_error_bound <= 1e-6);
}

TEST_CASE("tightening tail_eps moves the mean less than the certified bound") {
  dicewalk::lk_options opt;
  opt.tail_eps = 1e-10;
  const auto coarse = compute_lk(fair_die(6), primes1k(), 10, opt);
  const double bound = dicewalk::moments(coarse).moment_error_bound;
  opt.tail_eps = 1e-11;
  const auto fine = compute_lk(fair_die(6), primes1k(), 10, opt);
  const double shift =
      std::abs(dicewalk::moments(fine).mean - dicewalk::moments(coarse).mean);
  CHECK(shift < bound);
}

TEST_CASE("two-face prime walk has closed-form moments") {
  // With faces {1,2}, the walk hits a prime on the first roll (sum 2) or,
  // from sum 1, surely on the second (sums 2 or 3): pmf (1/2, 1/2).
  const auto d = compute_lk(fair_die(2), primes1k(), 1);
  CHECK(d.prob(1) == Catch::Approx(0.5).margin(1e-15));
  CHECK(d.prob(2) == Catch::Approx(0.5).margin(1e-15));
  const auto m = dicewalk::moments(d);
  CHECK(m.mean == Catch::Approx(1.5).margin(1e-14));
  CHECK(m.stddev == Catch::Approx(0.5).margin(1e-14));
  CHECK(m.skewness() == Catch::Approx(0.0).margin(1e-12));
  CHECK(m.kurtosis() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("debug checks pass on a biased die") {
  lk_options opt;
  opt.debug_checks = true;
  const auto die = custom_die({{1, 0.6}, {7, 0.4}});
  const auto d = compute_lk(die, primes1k(), 3, opt);
  CHECK(d.total_mass() + d.tail_mass == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("mass is conserved at depth") {
  const auto d = compute_lk(fair_die(6), primes1k(), 10);
  CHECK(d.total_mass() + d.tail_mass == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("scaled pdf standardizes the pmf") {
  const auto d = compute_lk(fair_die(6), primes1k(), 5);
  const auto m = dicewalk::moments(d);
  const auto pts = dicewalk::scaled_pdf(d);
  REQUIRE(pts.size() == d.pmf.size());
  CHECK(pts[0].z ==
        Catch::Approx((static_cast<double>(d.n_min) - m.mean) / m.stddev)
            .margin(1e-12));
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].density == m.stddev * d.pmf[i]);
    if (i > 0) CHECK(pts[i].z > pts[i - 1].z);
  }
}

TEST_CASE("option validation") {
  require_error([&] { compute_lk(fair_die(6), primes1k(), -1); },
                errc::invalid_input);
  lk_options bad_eps;
  bad_eps.tail_eps = 1.5;
  require_error([&] { compute_lk(fair_die(6), primes1k(), 1, bad_eps); },
                errc::invalid_input);
  lk_options bad_horizon;
  bad_horizon.max_horizon = 0;
  require_error([&] { compute_lk(fair_die(6), primes1k(), 1, bad_horizon); },
                errc::invalid_input);
  require_error([&] { compute_lk_sweep(fair_die(6), primes1k(), 0); },
                errc::invalid_input);
  CHECK(dicewalk::default_tail_eps(30) == 1e-13);
  CHECK(dicewalk::default_tail_eps(31) == 1e-10);
}

TEST_CASE("enumeration oracle validation") {
  require_error([&] { dicewalk::brute_force_pmf(fair_die(6), primes1k(), 0, 5); },
                errc::invalid_input);
  require_error([&] { dicewalk::brute_force_pmf(fair_die(6), primes1k(), 1, 0); },
                errc::invalid_input);
  require_error(
      [&] {
        dicewalk::brute_force_pmf(custom_die({{1, 0.5}, {2, 0.5}}), primes1k(), 1,
                                  5);
      },
      errc::invalid_input);
  const auto never = target_set::from_predicate([](long long) { return false; },
                                                100);
  require_error([&] { dicewalk::brute_force_pmf(fair_die(6), never, 1, 10); },
                errc::budget);
}
