#pragma once

#include <array>
#include <cstdint>

namespace dicewalk {

// Philox 4x64-10 block function (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3"). Pure counter-based generator: the output block is a
// function of (counter, key) alone, so any trial can be generated in
// isolation and in any order.
struct philox4x64 {
  using counter_type = std::array<uint64_t, 4>;
  using key_type = std::array<uint64_t, 2>;

  static constexpr uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
  static constexpr uint64_t kMul1 = 0xCA5A826395121157ull;
  static constexpr uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;

  static counter_type generate(counter_type ctr, key_type key) {
    for (int round = 0; round < 10; ++round) {
      const uint64_t hi0 = mulhi(kMul0, ctr[0]), lo0 = kMul0 * ctr[0];
      const uint64_t hi1 = mulhi(kMul1, ctr[2]), lo1 = kMul1 * ctr[2];
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

 private:
  static uint64_t mulhi(uint64_t a, uint64_t b) {
    return static_cast<uint64_t>(
        (static_cast<unsigned __int128>(a) * b) >> 64);
  }
};

inline constexpr const char* kGeneratorName = "philox4x64-10";

// Per-trial stream: key = (seed, trial index), counter counts blocks.
// Identical (seed, trial) always yields the identical roll sequence, which
// makes simulation results independent of scheduling and thread count.
class trial_rng {
 public:
  trial_rng(uint64_t seed, uint64_t trial) : key_{seed, trial} {}

  uint64_t next_u64() {
    if (pos_ == 4) {
      block_ = philox4x64::generate(ctr_, key_);
      pos_ = 0;
      for (int i = 0; i < 4; ++i)
        if (++ctr_[i] != 0) break;  // little-endian carry
    }
    return block_[pos_++];
  }

  // 53-bit uniform in [0, 1)
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

 private:
  philox4x64::key_type key_;
  philox4x64::counter_type ctr_{0, 0, 0, 0};
  philox4x64::counter_type block_{};
  int pos_ = 4;
};

}  // namespace dicewalk
