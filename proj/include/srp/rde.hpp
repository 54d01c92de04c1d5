#ifndef SRP_RDE_HPP_
#define SRP_RDE_HPP_

#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srp/controlled.hpp"
#include "srp/pathspace.hpp"
#include "srp/polynomial.hpp"

namespace srp {

/// Ball on which Lip surrogates of polynomial fields are evaluated.
struct Ball
{
  Eigen::VectorXd center;
  double radius = 1.0;
};

/**
 * V = (V_1, ..., V_d), V_i: R^e -> R^e polynomial, stored as a SmoothMap
 * R^e -> L(R^d, R^e) (rows = e, cols = d, column i is V_i). Construction runs
 * the derivative self-test.
 */
class PolyVectorField
{
public:
  PolyVectorField(SmoothMap map, Ball ball);
  explicit PolyVectorField(SmoothMap map);

  static PolyVectorField zero(int e, int d);
  /// V_i(y) = c_i (columns of c, e x d).
  static PolyVectorField constant(const Eigen::MatrixXd & c);
  /// V_i(y) = A_i y.
  static PolyVectorField linear(const std::vector<Eigen::MatrixXd> & a);

  int state_dim() const noexcept { return map_.rows(); }
  int driver_dim() const noexcept { return map_.cols(); }
  const SmoothMap & map() const noexcept { return map_; }
  const Ball & ball() const noexcept { return ball_; }

  /// e x d matrix [V_1(y) ... V_d(y)].
  Eigen::MatrixXd operator()(const Eigen::VectorXd & y) const { return map_.matrix(y); }

  /// |V|_{Lip^{gamma}} surrogate on the ball: derivative orders 0..ceil(gamma).
  double lip(double gamma) const;

  PolyVectorField operator-(const PolyVectorField & other) const;

private:
  SmoothMap map_;
  Ball ball_;
};

/**
 * Operator products V_{i_1} ... V_{i_k} I for k = 1..N, composed right to left:
 * V_{i_1}(V_{i_2}(... (V_{i_k} I))), each application W -> DW V_i. Level k holds
 * d^k polynomial vectors in row-major word order.
 */
class EulerScheme
{
public:
  EulerScheme(const PolyVectorField & v, int level);

  int level() const noexcept { return level_; }
  /// Polynomial vector (length e) for word index w at level k.
  const std::vector<Polynomial> & product(int k, std::size_t w) const { return products_[k - 1][w]; }

  /// E_V(y, g) = sum_k sum_w product(k, w)(y) pi_k(g)^w; g may have a higher level (extra levels ignored).
  Eigen::VectorXd increment(const Eigen::VectorXd & y, const TruncatedTensor & g) const;

private:
  int level_;
  int e_;
  int d_;
  std::vector<std::vector<std::vector<Polynomial>>> products_;
};

/// y + E_V(y, g) at g's level.
Eigen::VectorXd euler_step(const PolyVectorField & v, const Eigen::VectorXd & y, const GroupElement & g);

struct RdeSolution
{
  std::string scheme;
  int depth = 0;  // grid of the returned values
  int level = 0;
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::MatrixXd> yprime;  // Picard only
  std::vector<double> step_norms;       // Euler: |Y_{m+1} - Y_m|
  int iterations = 0;
  double residual = 0.0;
};

/// Step-N Euler scheme on the depth-`depth` subgrid; level defaults to the driver's.
RdeSolution solve_euler(const Eigen::VectorXd & y0, const PolyVectorField & v, const SampledRoughPath & x,
                        int depth, int level = 0);

/// Phi(Y, Y') = (y0 + int V(Y) dX, V(Y)).
ControlledPath picard_map(const Eigen::VectorXd & y0, const PolyVectorField & v, const ControlledPath & cp);

inline constexpr double kPicardTolerance = 1e-9;
inline constexpr int kPicardMaxIterations = 100;

/// Fixed point of Phi from (y0, 0); residual is controlled_norm of successive differences.
RdeSolution solve_picard_level2(const Eigen::VectorXd & y0, const PolyVectorField & v,
                                std::shared_ptr<const SampledRoughPath> x, double tol = kPicardTolerance,
                                int max_iter = kPicardMaxIterations);

/// Driver restricted to grid window [a, b] (b - a = 2^m, a a multiple of 2^m), re-based and rescaled to [0, 1].
SampledRoughPath window_path(const SampledRoughPath & x, std::size_t a, std::size_t b);

/**
 * Picard on consecutive windows [s_0, s_1], [s_1, s_2], ... with s_0 = 0 and the
 * last split at the end of the grid; each window starts from the previous endpoint.
 */
RdeSolution windowed_solve(const Eigen::VectorXd & y0, const PolyVectorField & v,
                           std::shared_ptr<const SampledRoughPath> x, const std::vector<std::size_t> & splits,
                           double tol = kPicardTolerance, int max_iter = kPicardMaxIterations);

}  // namespace srp

#endif  // SRP_RDE_HPP_
