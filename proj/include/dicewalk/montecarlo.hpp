#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dicewalk/die.hpp"
#include "dicewalk/errors.hpp"
#include "dicewalk/numeric.hpp"
#include "dicewalk/philox.hpp"
#include "dicewalk/targets.hpp"

namespace dicewalk {

// Vose alias table: one uniform draw per roll regardless of face count.
class alias_sampler {
 public:
  explicit alias_sampler(const die_spec& die) {
    const auto& faces = die.faces();
    if (faces.empty())
      throw error(errc::invalid_input, "alias sampler: die has no faces");
    const size_t n = faces.size();
    values_.reserve(n);
    for (const auto& f : faces) values_.push_back(f.value);
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    for (size_t i = 0; i < n; ++i) scaled[i] = faces[i].prob * static_cast<double>(n);
    std::vector<size_t> small, large;
    for (size_t i = n; i-- > 0;)
      (scaled[i] < 1.0 ? small : large).push_back(i);
    while (!small.empty() && !large.empty()) {
      const size_t s = small.back(); small.pop_back();
      const size_t l = large.back(); large.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] = (scaled[l] + scaled[s]) - 1.0;
      (scaled[l] < 1.0 ? small : large).push_back(l);
    }
    for (size_t i : large) prob_[i] = 1.0;
    for (size_t i : small) prob_[i] = 1.0;  // numerical leftovers
  }

  long long sample(trial_rng& rng) const {
    const double u = rng.next_unit() * static_cast<double>(values_.size());
    size_t idx = static_cast<size_t>(u);
    if (idx >= values_.size()) idx = values_.size() - 1;
    const double frac = u - static_cast<double>(idx);
    return frac < prob_[idx] ? values_[idx] : values_[alias_[idx]];
  }

 private:
  std::vector<long long> values_;
  std::vector<double> prob_;
  std::vector<size_t> alias_;
};

struct sim_config {
  die_spec die;
  target_set targets = target_set::primes(2);  // grown on demand
  int k = 1;
  uint64_t seed = 0;
  uint64_t trials = 1;
  int threads = 1;
  uint64_t safety_horizon = 1'000'000'000;  // rolls per walk before runaway error
};

struct sample_stats {
  uint64_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;
  double skewness = 0.0;  // NaN for a degenerate (zero-variance) sample
  double kurtosis = 0.0;  // non-excess; NaN when degenerate
  double standard_error_of_mean = 0.0;
  std::map<long long, uint64_t> histogram;
};

namespace detail {

// Streaming M1..M4 accumulator (Welford updates, Pebay chunk merge). Kept
// alongside the histogram path so the two independently derived moment
// computations can cross-check each other.
struct running_moments {
  uint64_t n = 0;
  double mean = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;

  void add(double x) {
    const double n1 = static_cast<double>(n);
    n += 1;
    const double nn = static_cast<double>(n);
    const double delta = x - mean;
    const double dn = delta / nn;
    const double dn2 = dn * dn;
    const double term1 = delta * dn * n1;
    mean += dn;
    m4 += term1 * dn2 * (nn * nn - 3.0 * nn + 3.0) + 6.0 * dn2 * m2 - 4.0 * dn * m3;
    m3 += term1 * dn * (nn - 2.0) - 3.0 * dn * m2;
    m2 += term1;
  }

  void merge(const running_moments& b) {
    if (b.n == 0) return;
    if (n == 0) { *this = b; return; }
    const double na = static_cast<double>(n), nb = static_cast<double>(b.n);
    const double nx = na + nb;
    const double d = b.mean - mean;
    const double d2 = d * d;
    const double m4x = m4 + b.m4 +
                       d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (nx * nx * nx) +
                       6.0 * d2 * (na * na * b.m2 + nb * nb * m2) / (nx * nx) +
                       4.0 * d * (na * b.m3 - nb * m3) / nx;
    const double m3x = m3 + b.m3 + d2 * d * na * nb * (na - nb) / (nx * nx) +
                       3.0 * d * (na * b.m2 - nb * m2) / nx;
    const double m2x = m2 + b.m2 + d2 * na * nb / nx;
    mean = (na * mean + nb * b.mean) / nx;
    m2 = m2x;
    m3 = m3x;
    m4 = m4x;
    n += b.n;
  }
};

struct sim_chunk {
  std::map<long long, uint64_t> histogram;
  running_moments stream;
};

inline sample_stats stats_from_histogram(const std::map<long long, uint64_t>& hist,
                                         uint64_t trials) {
  sample_stats out;
  out.count = trials;
  out.histogram = hist;
  compensated_sum s1;
  for (const auto& [n, c] : hist)
    s1.add(static_cast<double>(n) * static_cast<double>(c));
  out.mean = s1.value() / static_cast<double>(trials);
  compensated_sum s2, s3, s4;
  for (const auto& [n, c] : hist) {
    const double d = static_cast<double>(n) - out.mean;
    const double w = static_cast<double>(c);
    const double d2 = d * d;
    s2.add(d2 * w);
    s3.add(d2 * d * w);
    s4.add(d2 * d2 * w);
  }
  const double var = s2.value() / static_cast<double>(trials);
  out.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
  if (var > 0.0) {
    out.skewness = s3.value() / static_cast<double>(trials) / (var * out.stddev);
    out.kurtosis = s4.value() / static_cast<double>(trials) / (var * var);
  } else {
    out.skewness = std::numeric_limits<double>::quiet_NaN();
    out.kurtosis = std::numeric_limits<double>::quiet_NaN();
  }
  out.standard_error_of_mean = out.stddev / std::sqrt(static_cast<double>(trials));
  return out;
}

inline void cross_check(const sample_stats& h, const running_moments& s) {
  const auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };
  const double n = static_cast<double>(s.n);
  const double var_s = s.m2 / n;
  bool ok = s.n == h.count && rel(h.mean, s.mean) < 1e-9 &&
            rel(h.stddev * h.stddev, var_s) < 1e-9;
  if (ok && h.stddev > 0.0) {
    const double sd = std::sqrt(var_s);
    ok = rel(h.skewness, s.m3 / n / (var_s * sd)) < 1e-9 &&
         rel(h.kurtosis, s.m4 / n / (var_s * var_s)) < 1e-9;
  }
  if (!ok)
    throw error(errc::numeric,
                "simulate: histogram and streaming moments disagree beyond 1e-9");
}

// Partition [0, trials) into <threads> contiguous chunks, run them on a
// small async pool, and merge results in chunk order. Per-trial keyed
// randomness plus ordered merging keeps every output bit independent of
// the thread count.
template <typename Worker>
std::vector<sim_chunk> run_chunks(uint64_t trials, int threads, Worker worker) {
  const uint64_t nchunks =
      std::max<uint64_t>(1, std::min<uint64_t>(trials, static_cast<uint64_t>(threads)));
  std::vector<std::future<sim_chunk>> futures;
  futures.reserve(nchunks);
  for (uint64_t c = 0; c < nchunks; ++c) {
    const uint64_t b = trials * c / nchunks;
    const uint64_t e = trials * (c + 1) / nchunks;
    futures.push_back(std::async(
        nchunks == 1 ? std::launch::deferred : std::launch::async,
        [worker, b, e]() { return worker(b, e); }));
  }
  std::vector<sim_chunk> chunks;
  chunks.reserve(nchunks);
  for (auto& f : futures) chunks.push_back(f.get());
  return chunks;
}

}  // namespace detail

inline sample_stats simulate_lk(const sim_config& cfg) {
  if (cfg.trials < 1) throw error(errc::invalid_input, "simulate: trials must be >= 1");
  if (cfg.k < 0) throw error(errc::invalid_input, "simulate: k must be >= 0");
  if (cfg.threads < 1) throw error(errc::invalid_input, "simulate: threads must be >= 1");
  if (cfg.targets.kind() == target_kind::explicit_list &&
      cfg.targets.total_members() < cfg.k)
    throw error(errc::invalid_input, "simulate: target set has fewer than k members");
  const alias_sampler sampler(cfg.die);

  auto worker = [&cfg, &sampler](uint64_t begin, uint64_t end) {
    detail::sim_chunk chunk;
    target_set ts = cfg.targets;  // local snapshot, grown on demand
    const uint8_t* member = ts.membership_data();
    long long limit = ts.limit();
    for (uint64_t trial = begin; trial < end; ++trial) {
      trial_rng rng(cfg.seed, trial);
      long long sum = 0;
      int hits = 0;
      uint64_t rolls = 0;
      while (hits < cfg.k) {
        if (rolls == cfg.safety_horizon)
          throw error(errc::horizon,
                      "simulate: walk exceeded safety horizon of " +
                          std::to_string(cfg.safety_horizon) + " rolls (trial " +
                          std::to_string(trial) + ")");
        ++rolls;
        sum += sampler.sample(rng);
        if (sum > limit) {
          ts = ts.grow(std::max(sum, limit * 2));
          member = ts.membership_data();
          limit = ts.limit();
        }
        hits += member[sum];
      }
      chunk.histogram[static_cast<long long>(rolls)] += 1;
      chunk.stream.add(static_cast<double>(rolls));
    }
    return chunk;
  };

  auto chunks = detail::run_chunks(cfg.trials, cfg.threads, worker);
  std::map<long long, uint64_t> hist;
  detail::running_moments stream;
  for (const auto& c : chunks) {
    for (const auto& [n, cnt] : c.histogram) hist[n] += cnt;
    stream.merge(c.stream);
  }
  auto stats = detail::stats_from_histogram(hist, cfg.trials);
  detail::cross_check(stats, stream);
  return stats;
}

// Empirical frequency of |hits among the first n_targets members - n/mean|
// >= a. The walk stops once the sum passes the n_targets-th member.
inline double deviation_frequency(const die_spec& die, const target_set& ts,
                                  long long n_targets, double a, uint64_t trials,
                                  uint64_t seed, int threads = 1) {
  if (n_targets < 1)
    throw error(errc::invalid_input, "deviation: n_targets must be >= 1");
  if (trials < 1) throw error(errc::invalid_input, "deviation: trials must be >= 1");
  if (ts.size() < n_targets)
    throw error(errc::invalid_input,
                "deviation: target set holds " + std::to_string(ts.size()) +
                    " members within its limit, need " + std::to_string(n_targets) +
                    " (grow it first)");
  const long long bound = ts.nth_member(n_targets - 1);
  const double expected = static_cast<double>(n_targets) / die.mean();
  const alias_sampler sampler(die);
  const uint8_t* member = ts.membership_data();

  auto worker = [&](uint64_t begin, uint64_t end) {
    detail::sim_chunk chunk;
    uint64_t deviated = 0;
    for (uint64_t trial = begin; trial < end; ++trial) {
      trial_rng rng(seed, trial);
      long long sum = 0;
      long long hits = 0;
      while (sum < bound) {
        sum += sampler.sample(rng);
        if (sum <= bound) hits += member[sum];
      }
      if (std::abs(static_cast<double>(hits) - expected) >= a) ++deviated;
    }
    chunk.histogram[1] = deviated;  // single-cell tally
    return chunk;
  };
  auto chunks = detail::run_chunks(trials, threads, worker);
  uint64_t deviated = 0;
  for (const auto& c : chunks)
    if (auto it = c.histogram.find(1); it != c.histogram.end()) deviated += it->second;
  return static_cast<double>(deviated) / static_cast<double>(trials);
}

// Fraction of walks whose running sum ever equals x.
inline double empirical_hit_frequency(const die_spec& die, long long x,
                                      uint64_t trials, uint64_t seed,
                                      int threads = 1) {
  if (x < 1) throw error(errc::invalid_input, "hit frequency: x must be >= 1");
  if (trials < 1)
    throw error(errc::invalid_input, "hit frequency: trials must be >= 1");
  const alias_sampler sampler(die);
  auto worker = [&](uint64_t begin, uint64_t end) {
    detail::sim_chunk chunk;
    uint64_t hit = 0;
    for (uint64_t trial = begin; trial < end; ++trial) {
      trial_rng rng(seed, trial);
      long long sum = 0;
      while (sum < x) sum += sampler.sample(rng);
      if (sum == x) ++hit;
    }
    chunk.histogram[1] = hit;
    return chunk;
  };
  auto chunks = detail::run_chunks(trials, threads, worker);
  uint64_t hit = 0;
  for (const auto& c : chunks)
    if (auto it = c.histogram.find(1); it != c.histogram.end()) hit += it->second;
  return static_cast<double>(hit) / static_cast<double>(trials);
}

}  // namespace dicewalk
