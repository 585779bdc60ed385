#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "dicewalk/asymptotics.hpp"

#include "reference_values.hpp"

using dicewalk::errc;
using dicewalk::fit_constants;
using dicewalk::heuristic;
using dicewalk::heuristic_params;
using dicewalk::leading_order;

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

}  // namespace

TEST_CASE("leading order term") {
  CHECK(leading_order(1) == 0.0);
  CHECK(leading_order(10) == Catch::Approx(10.0 * std::log(10.0)).margin(1e-12));
  require_error([] { leading_order(0); }, errc::invalid_input);
  require_error([] { leading_order(-4); }, errc::invalid_input);
}

TEST_CASE("heuristic with default constants") {
  CHECK(heuristic(2) == Catch::Approx(10.692268519956562).margin(1e-9));
  CHECK(heuristic(20) == Catch::Approx(101.6714194783788).margin(1e-9));
  CHECK(heuristic(100) == Catch::Approx(676.4879811795993).margin(1e-9));
  require_error([] { heuristic(1); }, errc::invalid_input);
  require_error([] { heuristic(0); }, errc::invalid_input);
  require_error([] { heuristic(5, {std::nan(""), 0.0}); }, errc::invalid_input);
}

TEST_CASE("fit recovers planted constants exactly") {
  const heuristic_params planted{0.7, 3.1};
  std::vector<std::pair<long long, double>> pairs;
  for (long long k = 2; k <= 50; ++k) pairs.emplace_back(k, heuristic(k, planted));
  const auto fit = fit_constants(pairs);
  CHECK(fit.params.c1 == Catch::Approx(0.7).margin(1e-9));
  CHECK(fit.params.c2 == Catch::Approx(3.1).margin(1e-7));
  CHECK(fit.max_abs_residual < 1e-8);
  CHECK(fit.sse < 1e-16);
  REQUIRE(fit.residuals.size() == pairs.size());
}

TEST_CASE("fit over the reference means beats the default constants") {
  std::vector<std::pair<long long, double>> pairs;
  for (int k = 2; k <= 30; ++k)
    pairs.emplace_back(k, refvals::kMean[static_cast<size_t>(k - 1)]);
  const auto fit = fit_constants(pairs);
  CHECK(fit.params.c1 > 0.4);
  CHECK(fit.params.c1 < 0.8);
  CHECK(fit.max_abs_residual < 1.0);

  // Least squares can only improve on any fixed competitor.
  double sse_default = 0.0;
  for (const auto& [k, mean] : pairs) {
    const double r = mean - heuristic(k);
    sse_default += r * r;
  }
  CHECK(fit.sse < sse_default);

  // The model is asymptotic: relative error tightens as k grows.
  for (const auto& [k, mean] : pairs)
    if (k >= 10) CHECK(mean / heuristic(k, fit.params) ==
                       Catch::Approx(1.0).margin(0.006));
}

TEST_CASE("fit input validation") {
  require_error([] { fit_constants({}); }, errc::insufficient_data);
  require_error([] { fit_constants({{5, 30.0}}); }, errc::insufficient_data);
  require_error([] { fit_constants({{1, 2.4}, {5, 30.0}}); }, errc::invalid_input);
  require_error([] { fit_constants({{5, 30.0}, {5, 31.0}}); },
                errc::invalid_input);
}
