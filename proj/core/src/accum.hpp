#pragma once

#include <cmath>
#include <span>

namespace irispad {

/// Neumaier compensated accumulator. Scoring promises permutation-invariant
/// results to 1e-12, which plain left-to-right summation cannot give.
class Accum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> values) {
  Accum a;
  for (const double v : values) a.add(v);
  return a.value();
}

}  // namespace irispad
