#ifndef SRP_CONTROLLED_HPP_
#define SRP_CONTROLLED_HPP_

#include <memory>
#include <vector>

#include <Eigen/Core>

#include "srp/pathspace.hpp"
#include "srp/polynomial.hpp"

namespace srp {

/**
 * Pair (Y, Y') on the grid of a level-2 driver X. Y_t lives in R^n and
 * Y'_t in L(R^d, R^n) (n x d). The driver is shared, not copied.
 */
class ControlledPath
{
public:
  ControlledPath(std::shared_ptr<const SampledRoughPath> driver, std::vector<Eigen::VectorXd> y,
                 std::vector<Eigen::MatrixXd> yprime);

  const SampledRoughPath & driver() const noexcept { return *driver_; }
  const std::shared_ptr<const SampledRoughPath> & driver_ptr() const noexcept { return driver_; }
  int dim() const noexcept { return static_cast<int>(y_.front().size()); }
  std::size_t size() const noexcept { return y_.size(); }

  const std::vector<Eigen::VectorXd> & y() const noexcept { return y_; }
  const std::vector<Eigen::MatrixXd> & yprime() const noexcept { return yprime_; }
  /// pi_1(X_t) at every node.
  const std::vector<Eigen::VectorXd> & x() const noexcept { return *x_; }

  /// R^Y_{a,b} = Y_b - Y_a - Y'_a pi_1(X_{a,b}).
  Eigen::VectorXd remainder_at(std::size_t a, std::size_t b) const;

private:
  std::shared_ptr<const SampledRoughPath> driver_;
  std::shared_ptr<const std::vector<Eigen::VectorXd>> x_;
  std::vector<Eigen::VectorXd> y_;
  std::vector<Eigen::MatrixXd> yprime_;
};

/// Difference (Y1 - Y2, Y1' - Y2'), kept on the first path's driver.
ControlledPath operator-(const ControlledPath & a, const ControlledPath & b);

/// R^Y on every grid pair.
IntervalFunction remainder(const ControlledPath & cp);

/// (sup_P sum_{[u,v]} ||R||_{1/(2 alpha)-var;[u,v]}^{p/2} / |v-u|^{alpha p - 1})^{2/p}
double remainder_norm_tildeV(const IntervalFunction & r, double alpha, double p);

/// (sum_j 2^{j(alpha p - 1)} sum_i |R_{dyadic}|^{p/2})^{2/p}, truncated at depth J.
double remainder_norm_hatW(const IntervalFunction & r, double alpha, double p);

struct ControlledNorm
{
  double derivative = 0.0;  // ||Y'||_{W^alpha_p}, dyadic form
  double tildeV     = 0.0;
  double hatW       = 0.0;
  double y0         = 0.0;
  double yprime0    = 0.0;
  double total      = 0.0;
};

ControlledNorm controlled_norm(const ControlledPath & cp, double alpha, double p);
inline ControlledNorm controlled_norm(const ControlledPath & cp)
{
  return controlled_norm(cp, cp.driver().params().alpha, cp.driver().params().p);
}

/// (F(Y), DF(Y) Y'); F must map R^n (n = cp.dim()).
ControlledPath compose_smooth(const SmoothMap & f, const ControlledPath & cp);

struct RoughIntegral
{
  /// (I, I') with I' = Y reshaped to e x d.
  ControlledPath path;
  /// |I^{(c+1)}_1 - I^{(c)}_1| for coarse depths c = 0..J-1.
  std::vector<double> refinement_gaps;
  /// -slope of log2 gaps over the finest half of the depths (NaN if gaps vanish).
  double refinement_order = 0.0;
};

/**
 * Compensated Riemann sums sum_i Y_u pi_1(X_{u,v}) + Y'_u pi_2(X_{u,v}) on the
 * finest grid. The integrand Y takes values in L(R^d, R^e) flattened row-major
 * (index a * d + i), Y' is (e d) x d and pairs with the level-2 entry (j, i).
 */
RoughIntegral rough_integral(const ControlledPath & cp);

/// Least-squares slope of log2(values) against their index offsets `xs`; zero entries are skipped.
double fit_log2_slope(const std::vector<double> & xs, const std::vector<double> & values);

}  // namespace srp

#endif  // SRP_CONTROLLED_HPP_
