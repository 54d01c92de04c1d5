#ifndef SRP_TESTS_SUPPORT_HPP_
#define SRP_TESTS_SUPPORT_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "srp/pathspace.hpp"
#include "srp/tensor.hpp"

namespace srp::testing {

// Small seeded generator shared by property tests.
class Gen
{
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Eigen::VectorXd vector(int d, double scale = 1.0)
  {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = scale * normal();
    return v;
  }

  TruncatedTensor tensor(int d, int n, double scalar)
  {
    TruncatedTensor t(d, n);
    t[0][0] = scalar;
    for (int k = 1; k <= n; ++k) {
      for (auto & c : t[k]) c = normal();
    }
    return t;
  }

  // Geometric element: signature of a short random polyline.
  GroupElement group(int d, int n, int segments = 3, double scale = 0.7)
  {
    std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Zero(d)};
    for (int s = 0; s < segments; ++s) pts.push_back(pts.back() + vector(d, scale));
    return signature_path(pts, n).back();
  }

  // Random walk with 2^depth steps of size 2^{-depth/2}, lifted.
  std::vector<Eigen::VectorXd> walk(int d, int depth, double h = 0.5)
  {
    const std::size_t n = (std::size_t{1} << depth);
    const double s      = std::pow(2.0, -depth * h);
    std::vector<Eigen::VectorXd> pts{Eigen::VectorXd::Zero(d)};
    for (std::size_t i = 0; i < n; ++i) pts.push_back(pts.back() + vector(d, s));
    return pts;
  }

private:
  std::mt19937_64 rng_;
};

inline SampledRoughPath lift(const std::vector<Eigen::VectorXd> & pts, int level, SobolevParams params = {})
{
  int depth = 0;
  while ((std::size_t{1} << depth) + 1 < pts.size()) ++depth;
  return SampledRoughPath(depth, signature_path(pts, level), params);
}

inline std::vector<Eigen::VectorXd> scalar_points(const std::vector<double> & xs)
{
  std::vector<Eigen::VectorXd> out;
  for (double x : xs) out.push_back(Eigen::VectorXd::Constant(1, x));
  return out;
}

inline double max_diff(const TruncatedTensor & a, const TruncatedTensor & b)
{
  double m = 0.0;
  const auto x = a.coefficients();
  const auto y = b.coefficients();
  for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - y[i]));
  return m;
}

}  // namespace srp::testing

#endif  // SRP_TESTS_SUPPORT_HPP_
