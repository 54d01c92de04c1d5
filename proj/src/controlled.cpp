#include "srp/controlled.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "srp/errors.hpp"

namespace srp {

namespace {

Eigen::VectorXd flatten(const Eigen::MatrixXd & m)
{
  Eigen::VectorXd v(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[r * m.cols() + c] = m(r, c);
  }
  return v;
}

// Germ Y_u pi_1(X_{u,v}) + Y'_u pi_2(X_{u,v}) for the (e d)-flattened integrand.
Eigen::VectorXd germ(const Eigen::VectorXd & y, const Eigen::MatrixXd & yp, const TruncatedTensor & inc, int d)
{
  const Eigen::Index e = y.size() / d;
  const auto x1 = inc[1];
  const auto x2 = inc[2];
  Eigen::VectorXd out = Eigen::VectorXd::Zero(e);
  for (Eigen::Index a = 0; a < e; ++a) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      const Eigen::Index row = a * d + i;
      s += y[row] * x1[static_cast<std::size_t>(i)];
      for (int j = 0; j < d; ++j) s += yp(row, j) * x2[static_cast<std::size_t>(j * d + i)];
    }
    out[a] = s;
  }
  return out;
}

}  // namespace

ControlledPath::ControlledPath(std::shared_ptr<const SampledRoughPath> driver, std::vector<Eigen::VectorXd> y,
                               std::vector<Eigen::MatrixXd> yprime)
    : driver_(std::move(driver)), y_(std::move(y)), yprime_(std::move(yprime))
{
  if (!driver_) throw InputError("ControlledPath: missing driver");
  if (driver_->level() != 2) throw InputError("ControlledPath: driver must be a level-2 rough path");
  if (y_.size() != driver_->size() || yprime_.size() != driver_->size()) {
    throw InputError("ControlledPath: Y and Y' must be sampled on the driver's grid");
  }
  const Eigen::Index n = y_.front().size();
  if (n < 1) throw InputError("ControlledPath: Y must have positive dimension");
  for (std::size_t i = 0; i < y_.size(); ++i) {
    if (y_[i].size() != n || yprime_[i].rows() != n || yprime_[i].cols() != driver_->dim()) {
      throw InputError("ControlledPath: inconsistent shape at node " + std::to_string(i));
    }
    if (!y_[i].allFinite() || !yprime_[i].allFinite()) {
      throw NumericError("ControlledPath: non-finite value at node " + std::to_string(i), i);
    }
  }
  x_ = std::make_shared<const std::vector<Eigen::VectorXd>>(driver_->level1());
}

Eigen::VectorXd ControlledPath::remainder_at(std::size_t a, std::size_t b) const
{
  const auto & x = *x_;
  return y_[b] - y_[a] - yprime_[a] * (x[b] - x[a]);
}

ControlledPath operator-(const ControlledPath & a, const ControlledPath & b)
{
  if (a.size() != b.size() || a.dim() != b.dim() || a.driver().dim() != b.driver().dim()) {
    throw InputError("ControlledPath difference: shape mismatch");
  }
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::MatrixXd> yp;
  y.reserve(a.size());
  yp.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    y.push_back(a.y()[i] - b.y()[i]);
    yp.push_back(a.yprime()[i] - b.yprime()[i]);
  }
  return ControlledPath(a.driver_ptr(), std::move(y), std::move(yp));
}

IntervalFunction remainder(const ControlledPath & cp)
{
  auto shared = std::make_shared<const ControlledPath>(cp);
  return IntervalFunction(cp.driver().depth(), cp.dim(),
    [shared](std::size_t a, std::size_t b) { return shared->remainder_at(a, b); });
}

double remainder_norm_tildeV(const IntervalFunction & r, double alpha, double p)
{
  validate_params({alpha, p});
  if (std::isinf(p)) throw InputError("remainder_norm_tildeV: p must be finite");
  const PairMatrix cost = r.norm_matrix(1.0 / (2.0 * alpha));
  const double h        = pow2(-r.depth());
  const double sum      = mixed_variation_sum(cost, alpha * p, alpha * p - 1.0, h);
  return std::pow(sum, 2.0 / p);
}

double remainder_norm_hatW(const IntervalFunction & r, double alpha, double p)
{
  validate_params({alpha, p});
  if (std::isinf(p)) throw InputError("remainder_norm_hatW: p must be finite");
  return dyadic_sobolev(r.depth(), 2.0 * alpha, p / 2.0,
                        [&](std::size_t a, std::size_t b) { return r.norm(a, b); })
    .value;
}

ControlledNorm controlled_norm(const ControlledPath & cp, double alpha, double p)
{
  ControlledNorm out;
  std::vector<Eigen::VectorXd> flat;
  flat.reserve(cp.size());
  for (const auto & m : cp.yprime()) flat.push_back(flatten(m));
  out.derivative    = sobolev_norm_dyadic(flat, alpha, p).value;
  const auto r      = remainder(cp);
  out.tildeV        = remainder_norm_tildeV(r, alpha, p);
  out.hatW          = remainder_norm_hatW(r, alpha, p);
  out.y0            = cp.y().front().norm();
  out.yprime0       = cp.yprime().front().norm();
  out.total         = out.derivative + out.tildeV + out.hatW + out.y0 + out.yprime0;
  return out;
}

ControlledPath compose_smooth(const SmoothMap & f, const ControlledPath & cp)
{
  if (f.in_dim() != cp.dim()) {
    throw InputError("compose_smooth: map expects dimension " + std::to_string(f.in_dim()) + ", path has "
                     + std::to_string(cp.dim()));
  }
  std::vector<Eigen::VectorXd> y;
  std::vector<Eigen::MatrixXd> yp;
  y.reserve(cp.size());
  yp.reserve(cp.size());
  for (std::size_t i = 0; i < cp.size(); ++i) {
    y.push_back(f.value(cp.y()[i]));
    yp.push_back(f.jacobian(cp.y()[i]) * cp.yprime()[i]);
  }
  return ControlledPath(cp.driver_ptr(), std::move(y), std::move(yp));
}

double fit_log2_slope(const std::vector<double> & xs, const std::vector<double> & values)
{
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < xs.size() && i < values.size(); ++i) {
    if (!(values[i] > 0.0) || !std::isfinite(values[i])) continue;
    const double y = std::log2(values[i]);
    sx += xs[i];
    sy += y;
    sxx += xs[i] * xs[i];
    sxy += xs[i] * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / denom;
}

RoughIntegral rough_integral(const ControlledPath & cp)
{
  const auto & x  = cp.driver();
  const int depth = x.depth();
  const int d     = x.dim();
  if (depth == 0) throw InputError("rough_integral: depth 0 leaves nothing to refine");
  if (cp.dim() % d != 0) {
    throw InputError("rough_integral: integrand dimension " + std::to_string(cp.dim())
                     + " is not a multiple of the driver dimension");
  }
  const int e = cp.dim() / d;

  TruncatedTensor inc(d, 2);
  std::vector<Eigen::VectorXd> values;
  values.reserve(x.size());
  values.push_back(Eigen::VectorXd::Zero(e));
  for (std::size_t m = 0; m + 1 < x.size(); ++m) {
    x.increment_into(m, m + 1, inc);
    values.push_back(values.back() + germ(cp.y()[m], cp.yprime()[m], inc, d));
    if (!values.back().allFinite()) {
      throw NumericError("rough_integral: non-finite value at step " + std::to_string(m), m);
    }
  }

  // coarse compensated sums over [0,1]
  std::vector<Eigen::VectorXd> coarse;
  for (int c = 0; c <= depth; ++c) {
    const std::size_t stride = std::size_t{1} << (depth - c);
    Eigen::VectorXd s        = Eigen::VectorXd::Zero(e);
    for (std::size_t u = 0; u + stride < x.size(); u += stride) {
      x.increment_into(u, u + stride, inc);
      s += germ(cp.y()[u], cp.yprime()[u], inc, d);
    }
    coarse.push_back(s);
  }

  std::vector<Eigen::MatrixXd> derivative;
  derivative.reserve(cp.size());
  for (const auto & y : cp.y()) {
    Eigen::MatrixXd m(e, d);
    for (int a = 0; a < e; ++a) {
      for (int i = 0; i < d; ++i) m(a, i) = y[a * d + i];
    }
    derivative.push_back(std::move(m));
  }
  RoughIntegral out{ControlledPath(cp.driver_ptr(), std::move(values), std::move(derivative)), {}, 0.0};
  std::vector<double> idx;
  for (int c = 0; c < depth; ++c) {
    out.refinement_gaps.push_back((coarse[c + 1] - coarse[c]).norm());
    if (c >= depth / 2) idx.push_back(c);
  }
  std::vector<double> tail(out.refinement_gaps.begin() + depth / 2, out.refinement_gaps.end());
  const double slope   = fit_log2_slope(idx, tail);
  out.refinement_order = std::isnan(slope) ? std::numeric_limits<double>::infinity() : -slope;
  return out;
}

}  // namespace srp
