#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace dicewalk {

// Neumaier-compensated accumulator. Keeps the running compensation term
// separate so sums of ~1e6 terms stay exact to the last few ulps.
class compensated_sum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }
  void reset() { sum_ = comp_ = 0.0; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_total(const std::vector<double>& xs) {
  compensated_sum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

}  // namespace dicewalk
