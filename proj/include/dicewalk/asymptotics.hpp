#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "dicewalk/errors.hpp"

namespace dicewalk {

// k ln k, the leading-order growth of E(L_k).
inline double leading_order(long long k) {
  if (k < 1) throw error(errc::invalid_input, "leading_order: k must be >= 1");
  const double kd = static_cast<double>(k);
  return kd * std::log(kd);
}

struct heuristic_params {
  double c1 = 0.543;
  double c2 = 8.953;
};

// Refined approximation f(k) = k(ln k + ln ln k + c1) + c2; needs k >= 2 so
// ln ln k is real.
inline double heuristic(long long k, heuristic_params params = {}) {
  if (k < 2)
    throw error(errc::invalid_input,
                "heuristic: k must be >= 2, got " + std::to_string(k));
  if (!std::isfinite(params.c1) || !std::isfinite(params.c2))
    throw error(errc::invalid_input, "heuristic: parameters must be finite");
  const double kd = static_cast<double>(k);
  const double lk = std::log(kd);
  return kd * (lk + std::log(lk) + params.c1) + params.c2;
}

struct fit_result {
  heuristic_params params;
  std::vector<double> residuals;  // exact_mean - f(k), per input pair
  double max_abs_residual = 0.0;
  double sse = 0.0;
};

// Ordinary least squares for (c1, c2) in
// exact_mean ~ k(ln k + ln ln k) + c1 k + c2, linear in the unknowns.
// Normal equations in long double; two points interpolate exactly.
inline fit_result fit_constants(const std::vector<std::pair<long long, double>>& pairs) {
  if (pairs.size() < 2)
    throw error(errc::insufficient_data, "fit: need at least 2 (k, mean) pairs");
  long double sk = 0, skk = 0, sy = 0, sky = 0;
  for (const auto& [k, mean] : pairs) {
    if (k < 2)
      throw error(errc::invalid_input,
                  "fit: all k must be >= 2, got " + std::to_string(k));
    const long double kd = static_cast<long double>(k);
    const long double lk = std::log(kd);
    const long double y = static_cast<long double>(mean) - kd * (lk + std::log(lk));
    sk += kd;
    skk += kd * kd;
    sy += y;
    sky += kd * y;
  }
  const long double n = static_cast<long double>(pairs.size());
  const long double det = n * skk - sk * sk;
  if (std::abs(static_cast<double>(det)) <=
      1e-12 * static_cast<double>(n * skk + sk * sk))
    throw error(errc::invalid_input, "fit: singular design, k values must differ");
  fit_result out;
  out.params.c1 = static_cast<double>((n * sky - sk * sy) / det);
  out.params.c2 = static_cast<double>((skk * sy - sk * sky) / det);
  out.residuals.reserve(pairs.size());
  for (const auto& [k, mean] : pairs) {
    const double r = mean - heuristic(k, out.params);
    out.residuals.push_back(r);
    out.max_abs_residual = std::max(out.max_abs_residual, std::abs(r));
    out.sse += r * r;
  }
  return out;
}

}  // namespace dicewalk
