#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dicewalk/errors.hpp"
#include "dicewalk/rational.hpp"

namespace dicewalk {

struct die_face {
  long long value;
  double prob;
};

// Validated discrete die. Faces are distinct positive integers sorted by
// value, zero-probability faces dropped, probabilities normalized; the
// support must have gcd 1 or the walk misses whole residue classes and
// every limit statement downstream is false. Immutable once built.
class die_spec {
 public:
  // Empty placeholder; every factory (fair_die, custom_die, ...) returns a
  // validated die, and only those ever reach the computational paths.
  die_spec() = default;

  const std::vector<die_face>& faces() const { return faces_; }
  double mean() const { return mean_; }
  long long min_value() const { return faces_.front().value; }
  long long max_value() const { return faces_.back().value; }

  bool has_exact() const { return !exact_.empty(); }
  const std::vector<rational>& exact_probs() const { return exact_; }
  rational exact_mean() const {
    rational m;
    for (size_t i = 0; i < faces_.size(); ++i)
      m += rational(faces_[i].value) * exact_[i];
    return m;
  }

  friend bool operator==(const die_spec& a, const die_spec& b) {
    if (a.faces_.size() != b.faces_.size()) return false;
    for (size_t i = 0; i < a.faces_.size(); ++i)
      if (a.faces_[i].value != b.faces_[i].value ||
          a.faces_[i].prob != b.faces_[i].prob)
        return false;
    return true;
  }

  std::string describe() const {
    std::string s = "{";
    for (size_t i = 0; i < faces_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(faces_[i].value) + ":" + std::to_string(faces_[i].prob);
    }
    return s + "}";
  }

 private:
  friend die_spec fair_die(long long r);
  friend die_spec custom_die(std::vector<die_face> faces);
  friend die_spec custom_die_exact(const std::vector<std::pair<long long, rational>>& faces);

  die_spec(std::vector<die_face> faces, std::vector<rational> exact)
      : faces_(std::move(faces)), exact_(std::move(exact)) {
    validate();
  }

  void validate() {
    if (faces_.empty())
      throw error(errc::invalid_input, "die: no faces with positive probability");
    std::vector<size_t> order(faces_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return faces_[a].value < faces_[b].value;
    });
    apply_order(order);
    long long g = 0;
    for (const auto& f : faces_) {
      if (f.value <= 0)
        throw error(errc::invalid_input, "die: face values must be positive");
      if (!(f.prob >= 0.0) || f.prob > 1.0)
        throw error(errc::invalid_input, "die: probabilities must lie in [0,1]");
      g = std::gcd(g, f.value);
    }
    for (size_t i = 1; i < faces_.size(); ++i)
      if (faces_[i].value == faces_[i - 1].value)
        throw error(errc::invalid_input, "die: duplicate face value " +
                                             std::to_string(faces_[i].value));
    if (g != 1)
      throw error(errc::common_divisor,
                  "die: support has common divisor " + std::to_string(g));
    if (!exact_.empty()) {
      rational sum;
      for (const auto& q : exact_) sum += q;
      if (!(sum == rational(1)))
        throw error(errc::normalization,
                    "die: exact probabilities sum to " + sum.str());
    } else {
      double sum = 0.0;
      for (const auto& f : faces_) sum += f.prob;
      if (std::abs(sum - 1.0) > 1e-12)
        throw error(errc::normalization, "die: probabilities sum to " +
                                             std::to_string(sum));
      for (auto& f : faces_) f.prob /= sum;  // pin the sum to 1 exactly
    }
    double m = 0.0;
    for (const auto& f : faces_) m += static_cast<double>(f.value) * f.prob;
    mean_ = m;
  }

  void apply_order(const std::vector<size_t>& order) {
    std::vector<die_face> f2(faces_.size());
    for (size_t i = 0; i < order.size(); ++i) f2[i] = faces_[order[i]];
    faces_ = std::move(f2);
    if (!exact_.empty()) {
      std::vector<rational> e2(exact_.size());
      for (size_t i = 0; i < order.size(); ++i) e2[i] = exact_[order[i]];
      exact_ = std::move(e2);
    }
  }

  std::vector<die_face> faces_;
  std::vector<rational> exact_;  // parallel to faces_ when nonempty
  double mean_ = 0.0;
};

inline die_spec fair_die(long long r) {
  if (r < 1) throw error(errc::invalid_input, "fair_die: need r >= 1");
  std::vector<die_face> faces;
  std::vector<rational> exact;
  faces.reserve(r);
  for (long long v = 1; v <= r; ++v) {
    faces.push_back({v, 1.0 / static_cast<double>(r)});
    exact.push_back(rational(1, r));
  }
  return die_spec(std::move(faces), std::move(exact));
}

inline die_spec custom_die(std::vector<die_face> faces) {
  std::erase_if(faces, [](const die_face& f) { return f.prob == 0.0; });
  return die_spec(std::move(faces), {});
}

inline die_spec custom_die_exact(const std::vector<std::pair<long long, rational>>& faces) {
  std::vector<die_face> f;
  std::vector<rational> e;
  for (const auto& [v, q] : faces) {
    if (q < rational(0))
      throw error(errc::invalid_input, "die: probabilities must lie in [0,1]");
    if (q.is_zero()) continue;
    f.push_back({v, q.to_double()});
    e.push_back(q);
  }
  return die_spec(std::move(f), std::move(e));
}

inline void to_json(nlohmann::json& j, const die_spec& d) {
  j = nlohmann::json{{"faces", nlohmann::json::array()}};
  for (const auto& f : d.faces())
    j["faces"].push_back({{"value", f.value}, {"prob", f.prob}});
}

inline die_spec die_from_json(const nlohmann::json& j) {
  if (!j.contains("faces") || !j["faces"].is_array())
    throw error(errc::invalid_input, "die json: missing \"faces\" array");
  std::vector<die_face> faces;
  for (const auto& e : j["faces"]) {
    if (!e.contains("value") || !e.contains("prob"))
      throw error(errc::invalid_input, "die json: face needs value and prob");
    faces.push_back({e["value"].get<long long>(), e["prob"].get<double>()});
  }
  return custom_die(std::move(faces));
}

inline die_spec load_die_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error(errc::invalid_input, "die: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::invalid_input, "die: bad json in " + path + ": " + e.what());
  }
  return die_from_json(j);
}

// Accepts the CLI forms "fair:R" and "file:PATH".
inline die_spec parse_die_arg(const std::string& arg) {
  if (arg.rfind("fair:", 0) == 0) {
    const std::string num = arg.substr(5);
    try {
      size_t pos = 0;
      long long r = std::stoll(num, &pos);
      if (pos != num.size()) throw std::invalid_argument(num);
      return fair_die(r);
    } catch (const std::invalid_argument&) {
      throw error(errc::invalid_input, "die: bad side count '" + num + "'");
    } catch (const std::out_of_range&) {
      throw error(errc::invalid_input, "die: bad side count '" + num + "'");
    }
  }
  if (arg.rfind("file:", 0) == 0) return load_die_file(arg.substr(5));
  throw error(errc::invalid_input,
              "die: expected fair:R or file:PATH, got '" + arg + "'");
}

}  // namespace dicewalk
