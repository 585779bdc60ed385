#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dicewalk/die.hpp"
#include "dicewalk/errors.hpp"
#include "dicewalk/numeric.hpp"
#include "dicewalk/rational.hpp"
#include "dicewalk/targets.hpp"

namespace dicewalk {

struct lk_options {
  double tail_eps = 0.0;        // 0 = pick by k: 1e-13 up to k=30, else 1e-10
  double moment_tol = 1e-6;     // cap on the certified beyond-horizon n^4 mass
  long long max_horizon = 200000;
  bool debug_checks = false;    // per-step conservation/band/hits-cap asserts
  std::function<void(long long step, double active)> progress;
};

inline double default_tail_eps(int k) { return k <= 30 ? 1e-13 : 1e-10; }

// Truncated pmf of L_k with a certified tail. pmf[i] = P(L_k = n_min + i);
// the mass not absorbed by n_max is tail_mass <= tail_eps, and the
// beyond-horizon contribution to fourth-order moment sums is bounded by
// tail_moment_bound.
struct lk_distribution {
  int k = 0;
  die_spec die;
  target_kind targets = target_kind::primes;
  long long n_min = 0;
  std::vector<double> pmf;
  double tail_mass = 0.0;
  double tail_eps = 0.0;
  double tail_decay = 0.0;         // per-step active-mass ratio at termination
  double tail_moment_bound = 0.0;  // bound on sum_{n > n_max} n^4 pmf(n)

  long long n_max() const { return n_min + static_cast<long long>(pmf.size()) - 1; }
  double prob(long long n) const {
    if (n < n_min || n > n_max()) return 0.0;
    return pmf[static_cast<size_t>(n - n_min)];
  }
  double total_mass() const { return compensated_total(pmf); }
};

class horizon_error : public error {
 public:
  horizon_error(const std::string& msg, lk_distribution partial)
      : error(errc::horizon, msg), partial_(std::move(partial)) {}
  const lk_distribution& partial() const { return partial_; }

 private:
  lk_distribution partial_;
};

namespace detail {

// Forward DP over (sum, hits) states for all levels up to k_max in one
// pass: level h at step n+1 depends only on levels h and h-1 at step n, so
// recording the inflow into every level yields P(L_h = n) for each h <= k_max
// simultaneously. Levels are dense arrays over the reachable sum band.
class lk_engine {
 public:
  struct result {
    std::vector<std::vector<double>> inflow;  // inflow[h][n], h = 1..k_max
    std::vector<double> final_active;         // by level, 0..k_max-1
    long long n_steps = 0;
    double active_total = 0.0;
    double rho_hat = 0.0;
    double tail_moment_bound = 0.0;
    bool converged = false;
    bool stalled = false;  // every reachable sum lies past a finite list's end
  };

  lk_engine(const die_spec& die, const target_set& ts, int k_max,
            const lk_options& opt)
      : die_(die), ts_(ts), k_(k_max), opt_(opt) {
    if (opt_.tail_eps == 0.0) opt_.tail_eps = default_tail_eps(k_max);
    if (!(opt_.tail_eps > 0.0 && opt_.tail_eps < 1.0))
      throw error(errc::invalid_input, "lk: tail_eps must lie in (0,1)");
    if (opt_.max_horizon < 1)
      throw error(errc::invalid_input, "lk: max_horizon must be >= 1");
    if (ts_.kind() == target_kind::explicit_list) {
      if (ts_.limit() < ts_.max_member()) ts_ = ts_.grow(ts_.max_member());
      if (ts_.total_members() < k_)
        throw error(errc::invalid_input,
                    "lk: target set has " + std::to_string(ts_.total_members()) +
                        " members, cannot be hit " + std::to_string(k_) + " times");
    }
  }

  result run() {
    const long long maxv = die_.max_value();
    ensure_capacity(64);
    cur_.assign(k_, std::vector<double>(cap_, 0.0));
    nxt_.assign(k_, std::vector<double>(cap_, 0.0));
    lo_.assign(k_, 1);  // empty range: lo > hi
    hi_.assign(k_, 0);
    nlo_.assign(k_, 0);
    nhi_.assign(k_, 0);
    cur_[0][0] = 1.0;
    lo_[0] = hi_[0] = 0;

    result res;
    res.inflow.assign(k_ + 1, std::vector<double>{0.0});
    std::vector<double> active_hist{1.0};
    compensated_sum absorbed;
    double active = 1.0;

    long long n = 0;
    while (true) {
      if (active == 0.0) {
        res.converged = true;
        res.rho_hat = 0.0;
        res.tail_moment_bound = 0.0;
        break;
      }
      if (n >= 51) {
        const double prev = active_hist[n - 50];
        if (prev > 0.0 && active < opt_.tail_eps) {
          const double rho = std::pow(active / prev, 1.0 / 50.0);
          if (rho < 1.0) {
            const double hb = static_cast<double>(n) + 50.0;
            const double bound = active * rho / (1.0 - rho) * hb * hb * hb * hb;
            if (bound < opt_.moment_tol) {
              res.converged = true;
              res.rho_hat = rho;
              res.tail_moment_bound = bound;
              break;
            }
          }
        }
      }
      if (ts_.kind() == target_kind::explicit_list && beyond_last_member()) {
        res.converged = false;
        res.stalled = true;
        res.rho_hat = 1.0;
        res.tail_moment_bound = std::numeric_limits<double>::infinity();
        break;
      }
      if (n >= opt_.max_horizon) {
        res.converged = false;
        res.rho_hat = estimate_rho(active_hist);
        res.tail_moment_bound = std::numeric_limits<double>::infinity();
        break;
      }

      ++n;
      ensure_capacity(n * maxv + maxv + 1);
      step(n, res.inflow, absorbed);
      active = total_active();
      active_hist.push_back(active);
      if (opt_.debug_checks) audit(n, active, absorbed.value());
      // Loose always-on conservation guard; scaled with n because the
      // normalized face weights each carry an ulp of rounding per step.
      const double drift = std::abs(active + absorbed.value() - 1.0);
      if (drift > std::max(1e-11, static_cast<double>(n) * 1e-15))
        throw error(errc::numeric,
                    "lk: mass conservation violated by " + std::to_string(drift) +
                        " at step " + std::to_string(n));
      if (opt_.progress) opt_.progress(n, active);
    }

    res.n_steps = n;
    res.active_total = active;
    res.final_active.assign(k_, 0.0);
    for (int h = 0; h < k_; ++h) {
      compensated_sum s;
      for (long long x = lo_[h]; x <= hi_[h]; ++x) s.add(cur_[h][x]);
      res.final_active[h] = s.value();
    }
    for (auto& lev : res.inflow) lev.resize(n + 1, 0.0);
    return res;
  }

 private:
  void ensure_capacity(long long needed) {
    if (needed < 64) needed = 64;
    if (needed <= cap_) {
      ensure_targets(cap_);
      return;
    }
    long long cap = cap_ > 0 ? cap_ : 64;
    while (cap < needed) cap *= 2;
    cap_ = cap;
    for (auto& v : cur_) v.resize(cap_, 0.0);
    for (auto& v : nxt_) v.resize(cap_, 0.0);
    ensure_targets(cap_);
  }

  void ensure_targets(long long needed) {
    if (ts_.limit() < needed) ts_ = ts_.grow(std::max(needed, ts_.limit() * 2));
  }

  void step(long long n, std::vector<std::vector<double>>& inflow,
            compensated_sum& absorbed) {
    const auto& faces = die_.faces();
    const long long minv = die_.min_value(), maxv = die_.max_value();
    const uint8_t* member = ts_.membership_data();

    // Clear the writable span of each next-level buffer, then scatter.
    for (int h = 0; h < k_; ++h) {
      long long lo = cap_, hi = -1;
      if (lo_[h] <= hi_[h]) { lo = lo_[h] + minv; hi = hi_[h] + maxv; }
      if (h > 0 && lo_[h - 1] <= hi_[h - 1]) {
        lo = std::min(lo, lo_[h - 1] + minv);
        hi = std::max(hi, hi_[h - 1] + maxv);
      }
      nlo_[h] = lo;
      nhi_[h] = hi;
      if (lo <= hi)
        std::fill(nxt_[h].begin() + lo, nxt_[h].begin() + hi + 1, 0.0);
    }

    step_inflow_.assign(k_ + 1, compensated_sum{});
    for (int h = 0; h < k_; ++h) {
      if (lo_[h] > hi_[h]) continue;
      double* up = h + 1 < k_ ? nxt_[h + 1].data() : nullptr;
      double* same = nxt_[h].data();
      const double* src = cur_[h].data();
      for (const auto& f : faces) {
        const long long v = f.value;
        const double q = f.prob;
        for (long long s = lo_[h]; s <= hi_[h]; ++s) {
          const double m = src[s];
          if (m == 0.0) continue;
          const double mq = m * q;
          const long long t = s + v;
          if (member[t]) {
            step_inflow_[h + 1].add(mq);
            if (up) up[t] += mq;
          } else {
            same[t] += mq;
          }
        }
      }
    }
    for (int h = 1; h <= k_; ++h) inflow[h].push_back(step_inflow_[h].value());
    absorbed.add(step_inflow_[k_].value());

    cur_.swap(nxt_);
    for (int h = 0; h < k_; ++h) {
      long long lo = nlo_[h], hi = nhi_[h];
      const double* buf = cur_[h].data();
      while (lo <= hi && buf[lo] == 0.0) ++lo;
      while (lo <= hi && buf[hi] == 0.0) --hi;
      lo_[h] = lo <= hi ? lo : 1;
      hi_[h] = lo <= hi ? hi : 0;
    }
    (void)n;
  }

  double total_active() {
    compensated_sum total;
    for (int h = 0; h < k_; ++h) {
      if (lo_[h] > hi_[h]) continue;
      compensated_sum lev;
      const double* buf = cur_[h].data();
      for (long long x = lo_[h]; x <= hi_[h]; ++x) lev.add(buf[x]);
      total.add(lev.value());
    }
    return total.value();
  }

  void audit(long long n, double active, double absorbed) const {
    const double drift = std::abs(active + absorbed - 1.0);
    if (drift > 1e-12)
      throw error(errc::numeric, "lk audit: conservation drift " +
                                     std::to_string(drift) + " at step " +
                                     std::to_string(n));
    const long long minv = die_.min_value(), maxv = die_.max_value();
    for (int h = 0; h < k_; ++h) {
      if (lo_[h] > hi_[h]) continue;
      // after n rolls every live sum lies in [n*minv, n*maxv]
      if (lo_[h] < n * minv || hi_[h] > n * maxv)
        throw error(errc::numeric, "lk audit: band escape at level " +
                                       std::to_string(h));
      for (long long s = lo_[h]; s <= hi_[h]; ++s)
        if (cur_[h][s] != 0.0 && s >= 1 && h > ts_.count(s))
          throw error(errc::numeric,
                      "lk audit: state (s=" + std::to_string(s) +
                          ", h=" + std::to_string(h) + ") exceeds count " +
                          std::to_string(ts_.count(s)));
    }
  }

  static double estimate_rho(const std::vector<double>& hist) {
    const size_t n = hist.size();
    if (n < 2) return 0.0;
    const size_t w = std::min<size_t>(50, n - 1);
    const double a = hist[n - 1], b = hist[n - 1 - w];
    if (a <= 0.0 || b <= 0.0) return 0.0;
    return std::pow(a / b, 1.0 / static_cast<double>(w));
  }

  // Once every live band starts past a finite list's last member, no state
  // can ever hit again: the remaining active mass is a permanent defect.
  bool beyond_last_member() const {
    const long long last = ts_.max_member();
    for (int h = 0; h < k_; ++h)
      if (lo_[h] <= hi_[h] && lo_[h] <= last) return false;
    return true;
  }

  die_spec die_;
  target_set ts_;
  int k_;
  lk_options opt_;
  long long cap_ = 0;
  std::vector<std::vector<double>> cur_, nxt_;
  std::vector<long long> lo_, hi_, nlo_, nhi_;
  std::vector<compensated_sum> step_inflow_;
};

inline lk_distribution distribution_from(const lk_engine::result& res, int k,
                                         const die_spec& die, target_kind kind,
                                         double tail_eps) {
  lk_distribution d;
  d.k = k;
  d.die = die;
  d.targets = kind;
  d.n_min = k;
  d.tail_eps = tail_eps;
  d.tail_decay = res.rho_hat;
  d.tail_moment_bound = res.tail_moment_bound;
  if (res.n_steps >= k)
    d.pmf.assign(res.inflow[k].begin() + k, res.inflow[k].end());
  compensated_sum tail;
  for (int h = 0; h < k && h < static_cast<int>(res.final_active.size()); ++h)
    tail.add(res.final_active[h]);
  d.tail_mass = tail.value();
  return d;
}

inline std::string stop_failure(const lk_engine::result& res,
                                const lk_options& opt) {
  if (res.stalled)
    return "every reachable sum is past the last target; unabsorbed mass " +
           std::to_string(res.active_total) + " can never be absorbed";
  return "horizon " + std::to_string(opt.max_horizon) +
         " reached with active mass " + std::to_string(res.active_total);
}

}  // namespace detail

// P(L_k = n) for a single k. k = 0 is the vacuous hit: point mass at n = 0.
inline lk_distribution compute_lk(const die_spec& die, const target_set& ts,
                                  int k, lk_options opt = {}) {
  if (k < 0) throw error(errc::invalid_input, "lk: k must be >= 0");
  if (opt.tail_eps == 0.0) opt.tail_eps = default_tail_eps(std::max(k, 1));
  if (k == 0) {
    lk_distribution d;
    d.k = 0;
    d.die = die;
    d.targets = ts.kind();
    d.n_min = 0;
    d.pmf = {1.0};
    d.tail_eps = opt.tail_eps;
    return d;
  }
  detail::lk_engine engine(die, ts, k, opt);
  auto res = engine.run();
  auto dist = detail::distribution_from(res, k, die, ts.kind(), opt.tail_eps);
  if (!res.converged)
    throw horizon_error("lk: " + detail::stop_failure(res, opt), std::move(dist));
  return dist;
}

// One engine pass yields every P(L_h = n) for h <= k_max: the distribution
// of level h never depends on levels above it, so each returned entry is
// identical to its single-k computation over the shared horizon.
inline std::vector<lk_distribution> compute_lk_sweep(const die_spec& die,
                                                     const target_set& ts,
                                                     int k_max,
                                                     lk_options opt = {}) {
  if (k_max < 1) throw error(errc::invalid_input, "lk sweep: k_max must be >= 1");
  if (opt.tail_eps == 0.0) opt.tail_eps = default_tail_eps(k_max);
  detail::lk_engine engine(die, ts, k_max, opt);
  auto res = engine.run();
  if (!res.converged)
    throw horizon_error(
        "lk sweep: " + detail::stop_failure(res, opt),
        detail::distribution_from(res, k_max, die, ts.kind(), opt.tail_eps));
  std::vector<lk_distribution> out;
  out.reserve(k_max);
  for (int k = 1; k <= k_max; ++k)
    out.push_back(detail::distribution_from(res, k, die, ts.kind(), opt.tail_eps));
  return out;
}

// Moments of a truncated pmf. Central moments use a second pass with
// compensated accumulation; the error bound is the engine's certified
// beyond-horizon n^4 mass, which dominates every lower-order tail term.
class moment_summary {
 public:
  double mean = 0.0;
  double stddev = 0.0;
  double moment_error_bound = 0.0;

  bool has_shape() const { return skew_.has_value(); }
  double skewness() const {
    if (!skew_) throw error(errc::undefined, "moments: skewness undefined, std = 0");
    return *skew_;
  }
  double kurtosis() const {  // non-excess: m4 / sigma^4
    if (!kurt_) throw error(errc::undefined, "moments: kurtosis undefined, std = 0");
    return *kurt_;
  }

 private:
  friend moment_summary moments(const lk_distribution&);
  std::optional<double> skew_, kurt_;
};

inline moment_summary moments(const lk_distribution& dist) {
  if (!std::isfinite(dist.tail_moment_bound))
    throw error(errc::tolerance,
                "moments: tail moment bound is not finite (unconverged run)");
  moment_summary out;
  out.moment_error_bound = dist.tail_moment_bound;
  compensated_sum m1;
  for (size_t i = 0; i < dist.pmf.size(); ++i)
    m1.add(static_cast<double>(dist.n_min + static_cast<long long>(i)) * dist.pmf[i]);
  out.mean = m1.value();
  compensated_sum m2, m3, m4;
  for (size_t i = 0; i < dist.pmf.size(); ++i) {
    const double c =
        static_cast<double>(dist.n_min + static_cast<long long>(i)) - out.mean;
    const double w = dist.pmf[i];
    const double c2 = c * c;
    m2.add(c2 * w);
    m3.add(c2 * c * w);
    m4.add(c2 * c2 * w);
  }
  const double var = m2.value();
  out.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
  if (out.stddev > 0.0) {
    out.skew_ = m3.value() / (var * out.stddev);
    out.kurt_ = m4.value() / (var * var);
  }
  return out;
}

struct scaled_point {
  double z;
  double density;
};

// Standardized pmf: z_n = (n - mean)/sigma with density sigma * pmf(n), so
// the points trapezoid-integrate to ~1.
inline std::vector<scaled_point> scaled_pdf(const lk_distribution& dist) {
  const auto m = moments(dist);
  if (m.stddev == 0.0)
    throw error(errc::undefined, "scaled_pdf: undefined for a point mass");
  std::vector<scaled_point> out;
  out.reserve(dist.pmf.size());
  for (size_t i = 0; i < dist.pmf.size(); ++i) {
    const double n = static_cast<double>(dist.n_min + static_cast<long long>(i));
    out.push_back({(n - m.mean) / m.stddev, m.stddev * dist.pmf[i]});
  }
  return out;
}

// Exhaustive enumeration oracle in exact rational arithmetic. Walks every
// face sequence of length max_rolls (pruned at absorption), so the budget
// r^max_rolls is hard-capped.
inline std::vector<rational> brute_force_pmf(const die_spec& die,
                                             const target_set& ts, int k,
                                             int max_rolls) {
  if (k < 1) throw error(errc::invalid_input, "brute force: k must be >= 1");
  if (max_rolls < 1)
    throw error(errc::invalid_input, "brute force: max_rolls must be >= 1");
  if (!die.has_exact())
    throw error(errc::invalid_input,
                "brute force: die needs exact rational probabilities");
  target_set local = ts;
  const long long reach = die.max_value() * max_rolls;
  if (local.limit() < reach) local = local.grow(reach);

  // Absorption at the k-th hit prunes most branches long before max_rolls,
  // so the budget counts states actually visited, not r^max_rolls.
  constexpr long long kNodeBudget = 10'000'000;
  long long visited = 0;
  std::vector<rational> pmf(max_rolls + 1, rational(0));
  const auto& faces = die.faces();
  const auto& probs = die.exact_probs();
  std::function<void(int, long long, int, rational)> walk =
      [&](int depth, long long sum, int hits, rational mass) {
        if (depth == max_rolls) return;
        if (++visited > kNodeBudget)
          throw error(errc::budget,
                      "brute force: exceeded " + std::to_string(kNodeBudget) +
                          " enumerated states");
        for (size_t i = 0; i < faces.size(); ++i) {
          const long long t = sum + faces[i].value;
          const rational m = mass * probs[i];
          const int h = hits + (local.contains(t) ? 1 : 0);
          if (h == k)
            pmf[depth + 1] += m;
          else
            walk(depth + 1, t, h, m);
        }
      };
  walk(0, 0, 0, rational(1));
  return pmf;
}

}  // namespace dicewalk
