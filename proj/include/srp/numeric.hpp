#ifndef SRP_NUMERIC_HPP_
#define SRP_NUMERIC_HPP_

#include <cmath>
#include <cstdint>

namespace srp {

// Neumaier compensated summation, fixed left-to-right order.
class CompensatedSum
{
public:
  CompensatedSum & operator+=(double x) noexcept
  {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  double value() const noexcept { return sum_ + comp_; }

private:
  double sum_  = 0.0;
  double comp_ = 0.0;
};

/// 2^k for integer k, exact.
inline double pow2(int k) noexcept { return std::ldexp(1.0, k); }

/// [r] = largest integer n <= r, guarded against 1/alpha landing one ulp below an integer.
inline int floor_bracket(double r) noexcept
{
  return static_cast<int>(std::floor(r + 1e-12));
}

}  // namespace srp

#endif  // SRP_NUMERIC_HPP_
