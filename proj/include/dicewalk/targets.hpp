#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dicewalk/errors.hpp"

namespace dicewalk {

enum class target_kind { primes, explicit_list, predicate };

inline const char* to_string(target_kind k) {
  switch (k) {
    case target_kind::primes: return "primes";
    case target_kind::explicit_list: return "explicit-list";
    case target_kind::predicate: return "predicate";
  }
  return "?";
}

// Immutable integer target set over [1, limit] with O(1) membership and
// prefix counts. grow() returns an extended snapshot whose prefix is
// identical, so concurrent readers of the old snapshot are unaffected.
class target_set {
 public:
  // Bitmap plus prefix table cost 5 bytes per integer; cap the range so a
  // runaway horizon fails loudly instead of swapping.
  static constexpr long long kMaxLimit = 100'000'000;

  static target_set primes(long long limit) {
    check_limit(limit);
    target_set ts(target_kind::primes, limit);
    ts.sieve();
    ts.build_prefix();
    return ts;
  }

  static target_set from_list(std::vector<long long> members) {
    if (members.empty())
      throw error(errc::invalid_input, "targets: empty member list");
    long long mx = *std::max_element(members.begin(), members.end());
    return from_list(std::move(members), mx);
  }

  static target_set from_list(std::vector<long long> members, long long limit) {
    check_limit(limit);
    for (long long m : members)
      if (m < 1)
        throw error(errc::invalid_input,
                    "targets: members must be positive, got " + std::to_string(m));
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    target_set ts(target_kind::explicit_list, limit);
    ts.list_ = std::move(members);
    ts.fill_from_list();
    ts.build_prefix();
    return ts;
  }

  static target_set from_predicate(std::function<bool(long long)> pred,
                                   long long limit) {
    check_limit(limit);
    if (!pred) throw error(errc::invalid_input, "targets: null predicate");
    target_set ts(target_kind::predicate, limit);
    ts.pred_ = std::move(pred);
    for (long long x = 1; x <= limit; ++x) ts.member_[x] = ts.pred_(x) ? 1 : 0;
    ts.build_prefix();
    return ts;
  }

  // Newline-delimited positive integers; blank lines ignored.
  static target_set load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::invalid_input, "targets: cannot open " + path);
    std::vector<long long> members;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos)
        continue;
      try {
        size_t pos = 0;
        long long v = std::stoll(line, &pos);
        while (pos < line.size() &&
               (line[pos] == ' ' || line[pos] == '\t' || line[pos] == '\r'))
          ++pos;
        if (pos != line.size()) throw std::invalid_argument(line);
        members.push_back(v);
      } catch (const std::invalid_argument&) {
        throw error(errc::invalid_input, "targets: bad integer at " + path +
                                             ":" + std::to_string(lineno));
      } catch (const std::out_of_range&) {
        throw error(errc::invalid_input, "targets: bad integer at " + path +
                                             ":" + std::to_string(lineno));
      }
    }
    if (members.empty())
      throw error(errc::invalid_input, "targets: no members in " + path);
    return from_list(std::move(members));
  }

  target_kind kind() const { return kind_; }
  long long limit() const { return limit_; }

  // Integers below 1 are never members; sums s_i are always >= 1.
  bool contains(long long x) const {
    if (x < 1) return false;
    if (x > limit_)
      throw error(errc::out_of_range, "targets: membership query " +
                                          std::to_string(x) + " beyond limit " +
                                          std::to_string(limit_));
    return member_[x] != 0;
  }

  long long count(long long n) const {
    if (n < 1) return 0;
    if (n > limit_)
      throw error(errc::out_of_range, "targets: count query " + std::to_string(n) +
                                          " beyond limit " + std::to_string(limit_));
    return prefix_[n];
  }

  long long size() const { return prefix_[limit_]; }

  // i is 0-based: nth_member(0) is the smallest member.
  long long nth_member(long long i) const {
    if (i < 0 || i >= size())
      throw error(errc::out_of_range,
                  "targets: member index " + std::to_string(i) + " out of range");
    // first x with prefix_[x] == i+1
    auto it = std::lower_bound(prefix_.begin() + 1, prefix_.end(),
                               static_cast<uint32_t>(i + 1));
    return static_cast<long long>(it - prefix_.begin());
  }

  target_set grow(long long new_limit) const {
    if (new_limit <= limit_)
      throw error(errc::invalid_input, "targets: grow needs new_limit > limit");
    check_limit(new_limit);
    switch (kind_) {
      case target_kind::primes:
        return primes(new_limit);
      case target_kind::explicit_list:
        return from_list(list_, new_limit);
      case target_kind::predicate: {
        target_set ts(target_kind::predicate, new_limit);
        ts.pred_ = pred_;
        std::copy(member_.begin(), member_.end(), ts.member_.begin());
        for (long long x = limit_ + 1; x <= new_limit; ++x)
          ts.member_[x] = pred_(x) ? 1 : 0;
        ts.build_prefix();
        return ts;
      }
    }
    throw error(errc::invalid_input, "targets: unknown kind");
  }

  // Raw bitmap view for the DP inner loop, indexed by x in [0, limit].
  const uint8_t* membership_data() const { return member_.data(); }

  // Largest member an explicit list can ever produce (list entries may lie
  // beyond the current limit); for other kinds the horizon is unbounded and
  // this returns limit().
  long long max_member() const {
    return kind_ == target_kind::explicit_list && !list_.empty() ? list_.back()
                                                                 : limit_;
  }

  // Total members an explicit list can ever produce, regardless of limit.
  long long total_members() const {
    return kind_ == target_kind::explicit_list
               ? static_cast<long long>(list_.size())
               : size();
  }

 private:
  target_set(target_kind kind, long long limit)
      : kind_(kind), limit_(limit), member_(limit + 1, 0), prefix_(limit + 1, 0) {}

  static void check_limit(long long limit) {
    if (limit < 1)
      throw error(errc::invalid_input, "targets: limit must be >= 1");
    if (limit > kMaxLimit)
      throw error(errc::budget, "targets: limit " + std::to_string(limit) +
                                    " exceeds budget " + std::to_string(kMaxLimit));
  }

  void sieve() {
    if (limit_ >= 2) member_[2] = 1;
    for (long long x = 3; x <= limit_; x += 2) member_[x] = 1;
    if (limit_ >= 1) member_[1] = 0;
    for (long long p = 3; p * p <= limit_; p += 2)
      if (member_[p])
        for (long long q = p * p; q <= limit_; q += 2 * p) member_[q] = 0;
  }

  void fill_from_list() {
    for (long long m : list_)
      if (m <= limit_) member_[m] = 1;
  }

  void build_prefix() {
    uint32_t c = 0;
    for (long long x = 1; x <= limit_; ++x) {
      c += member_[x];
      prefix_[x] = c;
    }
  }

  target_kind kind_;
  long long limit_;
  std::vector<uint8_t> member_;   // member_[x] in {0,1}; member_[0] == 0
  std::vector<uint32_t> prefix_;  // prefix_[x] == #{members <= x}
  std::vector<long long> list_;   // explicit-list only: full member list
  std::function<bool(long long)> pred_;  // predicate only
};

// CLI forms: "primes" or "file:PATH".
inline target_set parse_targets_arg(const std::string& arg, long long initial_limit) {
  if (arg == "primes") return target_set::primes(initial_limit);
  if (arg.rfind("file:", 0) == 0) return target_set::load_file(arg.substr(5));
  throw error(errc::invalid_input,
              "targets: expected primes or file:PATH, got '" + arg + "'");
}

}  // namespace dicewalk
