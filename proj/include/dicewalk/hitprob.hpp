#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dicewalk/die.hpp"
#include "dicewalk/errors.hpp"
#include "dicewalk/numeric.hpp"
#include "dicewalk/rational.hpp"
#include "dicewalk/targets.hpp"

namespace dicewalk {

// p(x): probability the running sum of die rolls ever equals x.
// p(0) = 1, virtual negative indices are 0, and
// p(i) = sum_j q_j p(i - j); the sequence tends to 1/mean.
struct hit_prob_series {
  die_spec die;
  std::vector<double> values;  // values[x] = p(x), x = 0..horizon
  double limit;                // 1 / mean
  std::optional<rational> limit_exact;
  size_t horizon() const { return values.size() - 1; }
};

inline hit_prob_series hit_probabilities(const die_spec& die, size_t n) {
  std::vector<double> p(n + 1, 0.0);
  p[0] = 1.0;
  const auto& faces = die.faces();
  for (size_t i = 1; i <= n; ++i) {
    compensated_sum acc;
    for (const auto& f : faces) {
      long long j = static_cast<long long>(i) - f.value;
      if (j >= 0) acc.add(f.prob * p[j]);
    }
    p[i] = acc.value();
  }
  std::optional<rational> exact;
  if (die.has_exact()) exact = rational(1) / die.exact_mean();
  return {die, std::move(p), 1.0 / die.mean(), exact};
}

struct spectral_analysis {
  die_spec die;
  std::vector<std::complex<double>> roots;  // degree = max face value
  std::vector<double> residuals;            // |P(root)| per root
  int dominant_index;                       // root nearest 1
  double dominant_root_residual;            // |P(dominant root)|
  double p_at_one;                          // |P(1)|, zero in exact arithmetic
  double derivative_at_one;                 // |P'(1)|, equals the die mean
  double subdominant_max_modulus;           // rho = 1 - mu
};

namespace detail {

// Monic coefficients a[0..V] of P(z) = z^V - sum_v q_v z^(V-v), a[V] = 1.
inline std::vector<double> char_poly(const die_spec& die) {
  const long long V = die.max_value();
  std::vector<double> a(V + 1, 0.0);
  a[V] = 1.0;
  for (const auto& f : die.faces()) a[V - f.value] = -f.prob;
  return a;
}

inline std::complex<double> horner(const std::vector<double>& a,
                                   std::complex<double> z) {
  std::complex<double> acc(0.0, 0.0);
  for (size_t i = a.size(); i-- > 0;) acc = acc * z + a[i];
  return acc;
}

}  // namespace detail

inline spectral_analysis spectral(const die_spec& die) {
  const auto a = detail::char_poly(die);
  const long long V = die.max_value();
  spectral_analysis out;
  out.die = die;
  if (V == 1) {
    // P(z) = z - 1: the deterministic walk, single root at 1.
    out.roots = {std::complex<double>(1.0, 0.0)};
    out.residuals = {0.0};
    out.dominant_index = 0;
    out.dominant_root_residual = 0.0;
    out.p_at_one = 0.0;
    out.derivative_at_one = 1.0;
    out.subdominant_max_modulus = 0.0;
    return out;
  }
  // Companion form: subdiagonal ones, last column -a[0..V-1].
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(V, V);
  for (long long i = 1; i < V; ++i) C(i, i - 1) = 1.0;
  for (long long i = 0; i < V; ++i) C(i, V - 1) = -a[i];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(C, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw error(errc::numeric, "spectral: eigensolver failed to converge on " +
                                   die.describe());
  out.roots.reserve(V);
  for (long long i = 0; i < V; ++i) out.roots.push_back(solver.eigenvalues()[i]);
  std::sort(out.roots.begin(), out.roots.end(), [](const auto& x, const auto& y) {
    if (std::abs(x) != std::abs(y)) return std::abs(x) > std::abs(y);
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  out.residuals.reserve(V);
  for (const auto& z : out.roots) out.residuals.push_back(std::abs(detail::horner(a, z)));
  out.dominant_index = 0;
  for (size_t i = 1; i < out.roots.size(); ++i)
    if (std::abs(out.roots[i] - 1.0) < std::abs(out.roots[out.dominant_index] - 1.0))
      out.dominant_index = static_cast<int>(i);
  const double dom_dist = std::abs(out.roots[out.dominant_index] - 1.0);
  if (dom_dist > 1e-9)
    throw error(errc::numeric,
                "spectral: no root within 1e-9 of 1 (nearest at distance " +
                    std::to_string(dom_dist) + ")");
  out.dominant_root_residual = out.residuals[out.dominant_index];
  out.p_at_one = std::abs(detail::horner(a, {1.0, 0.0}));
  double dp = 0.0;
  for (size_t j = 1; j < a.size(); ++j) dp += static_cast<double>(j) * a[j];
  out.derivative_at_one = std::abs(dp);
  // Simplicity of the dominant root, per the derivative test; for a valid
  // die |P'(1)| equals the mean, which is >= 1.
  if (out.derivative_at_one < 1e-9)
    throw error(errc::numeric, "spectral: dominant root is not simple");
  double sub = 0.0;
  for (size_t i = 0; i < out.roots.size(); ++i)
    if (static_cast<int>(i) != out.dominant_index)
      sub = std::max(sub, std::abs(out.roots[i]));
  if (sub >= 1.0)
    throw error(errc::numeric, "spectral: subdominant modulus " +
                                   std::to_string(sub) + " not below 1");
  out.subdominant_max_modulus = sub;
  return out;
}

// Geometric envelope fit |p(x) - limit| <= C rho^x. Deviations below
// noise_floor are excluded from the fit: stored doubles settle a few ulps
// from the limit, so past the crossover the raw ratio dev/rho^x measures
// rounding dust amplified by rho^-x, not the envelope constant. Assertions
// against the fit carry the floor as an additive resolution term.
struct envelope_report {
  double c_est;
  bool verified;
  size_t argmax_x;      // where the fit ratio peaks
  double noise_floor;
  double partial_sum_bound;  // max_n |sum_{i<=n} p(i) - n*limit|
};

inline envelope_report convergence_envelope(const hit_prob_series& series,
                                            const spectral_analysis& spec,
                                            double noise_floor = 1e-13) {
  if (!(series.die == spec.die))
    throw error(errc::invalid_input, "envelope: series and spectrum from different dice");
  const size_t n = series.horizon();
  if (n < 10)
    throw error(errc::insufficient_data,
                "envelope: horizon " + std::to_string(n) + " too short, need >= 10");
  const double rho = spec.subdominant_max_modulus;
  envelope_report rep{0.0, false, 0, noise_floor, 0.0};

  compensated_sum prefix;
  double worst_prefix = 0.0;
  size_t last_above = 0;
  double rho_x = 1.0;
  for (size_t x = 1; x <= n; ++x) {
    rho_x *= rho;
    const double dev = std::abs(series.values[x] - series.limit);
    if (dev > noise_floor && rho_x > 0.0) {
      const double ratio = dev / rho_x;
      if (ratio > rep.c_est) {
        rep.c_est = ratio;
        rep.argmax_x = x;
      }
      last_above = x;
    }
    prefix.add(series.values[x]);
    worst_prefix = std::max(
        worst_prefix, std::abs(prefix.value() - static_cast<double>(x) * series.limit));
  }
  rep.partial_sum_bound = worst_prefix;

  // verified: the fitted bound (plus the resolution floor) covers every
  // stored deviation, the peak ratio sits in the early part of the fit
  // region, and rho < 1 so the envelope actually decays.
  bool holds = true;
  rho_x = 1.0;
  for (size_t x = 1; x <= n; ++x) {
    rho_x *= rho;
    const double dev = std::abs(series.values[x] - series.limit);
    if (dev > rep.c_est * rho_x + noise_floor) { holds = false; break; }
  }
  const bool early_peak =
      last_above == 0 || rep.argmax_x <= std::max<size_t>(10, last_above / 2);
  rep.verified = holds && early_peak && (rho < 1.0 || rep.c_est == 0.0);
  return rep;
}

inline double expected_hits(const hit_prob_series& series, const target_set& ts,
                            long long m) {
  if (m < 1) throw error(errc::invalid_input, "expected_hits: need m >= 1");
  if (m > static_cast<long long>(series.horizon()))
    throw error(errc::out_of_range, "expected_hits: m " + std::to_string(m) +
                                        " beyond series horizon " +
                                        std::to_string(series.horizon()));
  if (m > ts.limit())
    throw error(errc::out_of_range, "expected_hits: m " + std::to_string(m) +
                                        " beyond target limit " +
                                        std::to_string(ts.limit()));
  const uint8_t* member = ts.membership_data();
  compensated_sum acc;
  for (long long x = 1; x <= m; ++x)
    if (member[x]) acc.add(series.values[x]);
  return acc.value();
}

}  // namespace dicewalk
