#ifndef SRP_PATHSPACE_HPP_
#define SRP_PATHSPACE_HPP_

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "srp/numeric.hpp"
#include "srp/tensor.hpp"

namespace srp {

/// Relative slack in superadditivity checks.
inline constexpr double kControlTolerance = 1e-9;

/// Sobolev regularity (alpha, p); p may be +infinity (Hoelder case).
struct SobolevParams
{
  double alpha = 0.4;
  double p     = 4.0;

  bool holder() const noexcept { return std::isinf(p); }
  /// [1/alpha]
  int step() const noexcept { return floor_bracket(1.0 / alpha); }
};

/// Throws InputError unless alpha in (0,1), p in (1, inf] and alpha > 1/p.
void validate_params(const SobolevParams & params);

/// Group-valued path on the dyadic grid t_i = i 2^{-J}, i = 0..2^J.
class SampledRoughPath
{
public:
  /// Validates node count, identity start, shapes, params and (for N <= 3) geometricity.
  SampledRoughPath(int depth, std::vector<GroupElement> nodes, SobolevParams params);

  int dim() const noexcept { return nodes_.front().dim(); }
  int level() const noexcept { return nodes_.front().level(); }
  int depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t cells() const noexcept { return nodes_.size() - 1; }
  double step() const noexcept { return pow2(-depth_); }
  double time(std::size_t i) const noexcept { return static_cast<double>(i) * step(); }

  const GroupElement & operator[](std::size_t i) const noexcept { return nodes_[i]; }
  const std::vector<GroupElement> & nodes() const noexcept { return nodes_; }
  const SobolevParams & params() const noexcept { return params_; }

  /// X_{a,b} = X_a^{-1} ⊗ X_b using cached inverses.
  GroupElement increment(std::size_t a, std::size_t b) const;
  /// Same, written into `out` (shape d, N) without allocating.
  void increment_into(std::size_t a, std::size_t b, TruncatedTensor & out) const;

  /// Level-1 values pi_1(X_t) at every node.
  std::vector<Eigen::VectorXd> level1() const;

  SampledRoughPath with_params(SobolevParams params) const;

private:
  int depth_;
  std::vector<GroupElement> nodes_;
  std::vector<GroupElement> inverses_;
  SobolevParams params_;
};

/// Inclusive range of grid indices [first, last].
struct GridWindow
{
  std::size_t first = 0;
  std::size_t last  = 0;

  static GridWindow full(const SampledRoughPath & x) { return {0, x.size() - 1}; }
  std::size_t points() const noexcept { return last - first + 1; }
};

/// Dense square table indexed by grid-pair (a, b), a < b. Stored end-major so that
/// scanning start points a for a fixed end b is contiguous.
class PairMatrix
{
public:
  PairMatrix() = default;
  explicit PairMatrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double & operator()(std::size_t a, std::size_t b) noexcept { return data_[b * n_ + a]; }
  double operator()(std::size_t a, std::size_t b) const noexcept { return data_[b * n_ + a]; }
  const double * ending_at(std::size_t b) const noexcept { return data_.data() + b * n_; }

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Homogeneous norms of all increments X_{a,b} inside the window (local indices).
PairMatrix increment_norms(const SampledRoughPath & x, GridWindow window);

/// sup over grid partitions P of [0, n-1] of sum_{[a,b] in P} cost(a, b).
double partition_sup(const PairMatrix & cost);

/**
 * Mixed Hoelder-variation sum used by the mixed distance and the remainder norm:
 *
 *   sup_P sum_{[u,v] in P} V(u,v)^{outer} / ((v - u) h)^{time_power},
 *   V(u,v) = sup_{P' of [u,v]} sum_{[a,b] in P'} cost(a, b),
 *
 * with `cost` already raised to the inner variation exponent. O(n^3).
 */
double mixed_variation_sum(const PairMatrix & cost, double outer, double time_power, double h);

/// q-variation over grid partitions inside the window, distances by homogeneous_norm.
double qvar_norm(const SampledRoughPath & x, double q, GridWindow window);
inline double qvar_norm(const SampledRoughPath & x, double q)
{
  return qvar_norm(x, q, GridWindow::full(x));
}

/**
 * Double-integral Sobolev norm on the window, product-trapezoid weights on the
 * grid nodes, diagonal excluded. p = inf is routed to holder_norm.
 */
double sobolev_norm_integral(const SampledRoughPath & x, double alpha, double p, GridWindow window);
inline double sobolev_norm_integral(const SampledRoughPath & x, double alpha, double p)
{
  return sobolev_norm_integral(x, alpha, p, GridWindow::full(x));
}

struct DyadicNorm
{
  double value = 0.0;
  /// p-th power contribution of the finest level j = J (tail diagnostic).
  double last_level_term = 0.0;
};

/// Generic dyadic Sobolev sum; `size(a, b)` is the distance between grid nodes a < b.
template<class SizeFn>
DyadicNorm dyadic_sobolev(int depth, double alpha, double p, SizeFn && size)
{
  CompensatedSum total;
  double last = 0.0;
  for (int j = 0; j <= depth; ++j) {
    const std::size_t stride = std::size_t{1} << (depth - j);
    const std::size_t count  = std::size_t{1} << j;
    CompensatedSum level;
    for (std::size_t m = 0; m < count; ++m) {
      level += std::pow(size(m * stride, (m + 1) * stride), p);
    }
    const double term = std::exp2(j * (alpha * p - 1.0)) * level.value();
    total += term;
    if (j == depth) last = term;
  }
  return {std::pow(total.value(), 1.0 / p), last};
}

/// (sum_j 2^{j(alpha p - 1)} sum_m d(X_{m 2^-j}, X_{(m+1) 2^-j})^p)^{1/p}, truncated at J.
DyadicNorm sobolev_norm_dyadic(const SampledRoughPath & x, double alpha, double p);

/// Same for an R^m-valued path sampled on the depth-J grid (Euclidean distance).
DyadicNorm sobolev_norm_dyadic(std::span<const Eigen::VectorXd> values, double alpha, double p);

/// max over grid pairs of d(X_u, X_v) / |v - u|^alpha.
double holder_norm(const SampledRoughPath & x, double alpha, GridWindow window);
inline double holder_norm(const SampledRoughPath & x, double alpha)
{
  return holder_norm(x, alpha, GridWindow::full(x));
}

/// sup_t ||X_t|| in the homogeneous norm.
double max_node_norm(const SampledRoughPath & x);

/// Levels k = 1..min(N, [1/alpha]) that enter the inhomogeneous distances.
int distance_levels(const SampledRoughPath & x, double alpha);

struct LevelDistances
{
  std::vector<double> per_level;  // index k-1
  double total = 0.0;             // sum (rho-hat) or max (mixed), see producer
};

/// rho-hat: per-level dyadic inhomogeneous Sobolev distances and their sum.
LevelDistances inhom_sobolev_dist(
  const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, double p);

/// Per-level inhomogeneous 1/alpha-variation distances rho^(k) on the window.
std::vector<double> inhom_qvar_dist(
  const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, GridWindow window);
inline std::vector<double> inhom_qvar_dist(
  const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha)
{
  return inhom_qvar_dist(x1, x2, alpha, GridWindow::full(x1));
}

/// |pi_k(X1_{a,b} - X2_{a,b})| for all local pairs of the window.
PairMatrix level_difference_norms(
  const SampledRoughPath & x1, const SampledRoughPath & x2, int k, GridWindow window);

/// Mixed Hoelder-variation distance: per-level values and their max.
LevelDistances mixed_dist(const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, double p);

/**
 * Two-parameter function on grid pairs (a, b), a <= b, of a depth-J dyadic grid.
 * Values are produced on demand by an evaluator; dyadic_values() materialises the
 * ragged per-level table of dyadic intervals.
 */
class IntervalFunction
{
public:
  using Evaluator = std::function<Eigen::VectorXd(std::size_t, std::size_t)>;

  IntervalFunction(int depth, int value_dim, Evaluator f);

  int depth() const noexcept { return depth_; }
  int value_dim() const noexcept { return value_dim_; }
  std::size_t grid_size() const noexcept { return (std::size_t{1} << depth_) + 1; }

  /// Throws NumericError on a non-finite value.
  Eigen::VectorXd operator()(std::size_t a, std::size_t b) const;
  double norm(std::size_t a, std::size_t b) const { return (*this)(a, b).norm(); }

  /// Level j holds the 2^j values on [i 2^-j, (i+1) 2^-j].
  std::vector<std::vector<Eigen::VectorXd>> dyadic_values() const;

  /// Euclidean norms on every pair, raised to `power`.
  PairMatrix norm_matrix(double power = 1.0) const;

private:
  int depth_;
  int value_dim_;
  Evaluator f_;
};

IntervalFunction operator-(const IntervalFunction & f, const IntervalFunction & g);
IntervalFunction operator*(double s, const IntervalFunction & f);

struct ControlCheck
{
  bool superadditive = true;
  double worst_violation = 0.0;  // max(0, w(s,u) + w(u,t) - w(s,t)(1 + tol))
  int level = -1;                // dyadic level j of the worst parent interval
  std::size_t index = 0;         // its position i
};

/// Superadditivity of a scalar interval function on all dyadic parent/child triples.
ControlCheck control_check(const IntervalFunction & omega, double tolerance = kControlTolerance);

}  // namespace srp

#endif  // SRP_PATHSPACE_HPP_
