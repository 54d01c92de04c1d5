#include "srp/rde.hpp"

#include <cmath>
#include <string>

#include "srp/errors.hpp"

namespace srp {

namespace {

// (DW . V_i)_a = sum_s d_s W_a V_{s,i}
std::vector<Polynomial> apply_field(const SmoothMap & v, int i, const std::vector<Polynomial> & w)
{
  const int e = v.rows();
  const int d = v.cols();
  std::vector<Polynomial> out;
  out.reserve(w.size());
  for (const auto & wa : w) {
    Polynomial acc(e);
    for (int s = 0; s < e; ++s) {
      const auto ds = wa.derivative(s);
      if (ds.is_zero()) continue;
      acc += ds * v.entries()[static_cast<std::size_t>(s * d + i)];
    }
    out.push_back(std::move(acc));
  }
  return out;
}

void require_finite(const Eigen::VectorXd & y, std::size_t step, const char * what)
{
  if (!y.allFinite()) {
    throw NumericError(std::string(what) + ": state blew up at step " + std::to_string(step), step);
  }
}

}  // namespace

PolyVectorField::PolyVectorField(SmoothMap map, Ball ball) : map_(std::move(map)), ball_(std::move(ball))
{
  if (map_.in_dim() != map_.rows()) {
    throw InputError("PolyVectorField: a field on R^e must have e rows, got in_dim "
                     + std::to_string(map_.in_dim()) + " and " + std::to_string(map_.rows()) + " rows");
  }
  if (ball_.center.size() == 0) ball_.center = Eigen::VectorXd::Zero(map_.in_dim());
  if (ball_.center.size() != map_.in_dim() || !(ball_.radius > 0.0)) {
    throw InputError("PolyVectorField: ball center must have dimension e and positive radius");
  }
  require_self_test(map_);
}

PolyVectorField::PolyVectorField(SmoothMap map) : PolyVectorField(std::move(map), Ball{}) {}

PolyVectorField PolyVectorField::zero(int e, int d)
{
  return PolyVectorField(SmoothMap(e, e, d, std::vector<SmoothMap::Term>{}));
}

PolyVectorField PolyVectorField::constant(const Eigen::MatrixXd & c)
{
  return PolyVectorField(SmoothMap::constant(static_cast<int>(c.rows()), c));
}

PolyVectorField PolyVectorField::linear(const std::vector<Eigen::MatrixXd> & a)
{
  if (a.empty()) throw InputError("PolyVectorField::linear: need at least one matrix");
  const int e = static_cast<int>(a.front().rows());
  const int d = static_cast<int>(a.size());
  std::vector<SmoothMap::Term> terms;
  for (int i = 0; i < d; ++i) {
    if (a[i].rows() != e || a[i].cols() != e) throw InputError("PolyVectorField::linear: matrices must be e x e");
    for (int r = 0; r < e; ++r) {
      for (int s = 0; s < e; ++s) {
        std::vector<int> powers(static_cast<std::size_t>(e), 0);
        powers[static_cast<std::size_t>(s)] = 1;
        terms.push_back({r, i, a[i](r, s), powers});
      }
    }
  }
  return PolyVectorField(SmoothMap(e, e, d, terms));
}

double PolyVectorField::lip(double gamma) const
{
  return map_.lip_bound(ball_.center, ball_.radius, static_cast<int>(std::ceil(gamma)));
}

PolyVectorField PolyVectorField::operator-(const PolyVectorField & other) const
{
  return PolyVectorField(map_ - other.map_, ball_);
}

EulerScheme::EulerScheme(const PolyVectorField & v, int level)
    : level_(level), e_(v.state_dim()), d_(v.driver_dim())
{
  if (level < 1) throw InputError("EulerScheme: level must be >= 1");
  const auto & m = v.map();
  std::vector<std::vector<Polynomial>> first;
  for (int i = 0; i < d_; ++i) {
    std::vector<Polynomial> col;
    for (int a = 0; a < e_; ++a) col.push_back(m.entries()[static_cast<std::size_t>(a * d_ + i)]);
    first.push_back(std::move(col));
  }
  products_.push_back(std::move(first));
  for (int k = 2; k <= level; ++k) {
    std::vector<std::vector<Polynomial>> next;
    const auto & prev = products_.back();
    for (int i = 0; i < d_; ++i) {
      for (const auto & w : prev) next.push_back(apply_field(m, i, w));
    }
    products_.push_back(std::move(next));
  }
}

Eigen::VectorXd EulerScheme::increment(const Eigen::VectorXd & y, const TruncatedTensor & g) const
{
  if (g.dim() != d_ || g.level() < level_) throw InputError("EulerScheme: increment has the wrong shape");
  if (y.size() != e_) throw InputError("EulerScheme: state has the wrong dimension");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(e_);
  for (int k = 1; k <= level_; ++k) {
    const auto coeffs = g[k];
    const auto & level = products_[k - 1];
    for (std::size_t w = 0; w < level.size(); ++w) {
      const double c = coeffs[w];
      if (c == 0.0) continue;
      for (int a = 0; a < e_; ++a) {
        const auto & p = level[w][static_cast<std::size_t>(a)];
        if (!p.is_zero()) out[a] += p(y) * c;
      }
    }
  }
  return out;
}

Eigen::VectorXd euler_step(const PolyVectorField & v, const Eigen::VectorXd & y, const GroupElement & g)
{
  const EulerScheme scheme(v, g.level());
  return y + scheme.increment(y, g.tensor());
}

RdeSolution solve_euler(const Eigen::VectorXd & y0, const PolyVectorField & v, const SampledRoughPath & x,
                        int depth, int level)
{
  if (level == 0) level = x.level();
  if (level < 1 || level > x.level()) throw InputError("solve_euler: level must lie in 1..N of the driver");
  if (depth < 0 || depth > x.depth()) throw InputError("solve_euler: step depth must lie in 0..J");
  if (v.driver_dim() != x.dim() || v.state_dim() != y0.size()) {
    throw InputError("solve_euler: vector field, driver and initial value dimensions disagree");
  }
  if (!y0.allFinite()) throw InputError("solve_euler: initial value is not finite");
  const EulerScheme scheme(v, level);
  RdeSolution out;
  out.scheme = "euler";
  out.depth  = depth;
  out.level  = level;
  out.y.reserve((std::size_t{1} << depth) + 1);
  out.y.push_back(y0);
  const std::size_t stride = std::size_t{1} << (x.depth() - depth);
  TruncatedTensor inc(x.dim(), x.level());
  for (std::size_t m = 0; m < (std::size_t{1} << depth); ++m) {
    x.increment_into(m * stride, (m + 1) * stride, inc);
    const Eigen::VectorXd step = scheme.increment(out.y.back(), inc);
    out.y.push_back(out.y.back() + step);
    require_finite(out.y.back(), m, "solve_euler");
    out.step_norms.push_back(step.norm());
  }
  return out;
}

ControlledPath picard_map(const Eigen::VectorXd & y0, const PolyVectorField & v, const ControlledPath & cp)
{
  const auto integrand = compose_smooth(v.map(), cp);
  const auto integral  = rough_integral(integrand);
  std::vector<Eigen::VectorXd> y;
  y.reserve(cp.size());
  for (std::size_t i = 0; i < cp.size(); ++i) {
    y.push_back(y0 + integral.path.y()[i]);
    require_finite(y.back(), i, "picard_map");
  }
  return ControlledPath(cp.driver_ptr(), std::move(y), integral.path.yprime());
}

RdeSolution solve_picard_level2(const Eigen::VectorXd & y0, const PolyVectorField & v,
                                std::shared_ptr<const SampledRoughPath> x, double tol, int max_iter)
{
  if (!x || x->level() != 2) throw InputError("solve_picard_level2: driver must be a level-2 rough path");
  if (v.driver_dim() != x->dim() || v.state_dim() != y0.size()) {
    throw InputError("solve_picard_level2: vector field, driver and initial value dimensions disagree");
  }
  if (!y0.allFinite()) throw InputError("solve_picard_level2: initial value is not finite");
  if (!(tol > 0.0) || max_iter < 1) throw InputError("solve_picard_level2: tol must be positive, max_iter >= 1");
  const auto & params = x->params();
  ControlledPath cp(x, std::vector<Eigen::VectorXd>(x->size(), y0),
                    std::vector<Eigen::MatrixXd>(x->size(), Eigen::MatrixXd::Zero(y0.size(), x->dim())));
  double residual = INFINITY;
  for (int it = 1; it <= max_iter; ++it) {
    ControlledPath next = picard_map(y0, v, cp);
    residual            = controlled_norm(next - cp, params.alpha, params.p).total;
    if (!std::isfinite(residual)) {
      throw NumericError("solve_picard_level2: residual is not finite at iteration " + std::to_string(it),
                         static_cast<std::size_t>(it), residual);
    }
    cp = std::move(next);
    if (residual < tol) {
      RdeSolution out;
      out.scheme     = "picard";
      out.depth      = x->depth();
      out.level      = 2;
      out.y          = cp.y();
      out.yprime     = cp.yprime();
      out.iterations = it;
      out.residual   = residual;
      return out;
    }
  }
  throw NumericError("solve_picard_level2: no convergence after " + std::to_string(max_iter)
                       + " iterations, residual " + std::to_string(residual),
                     static_cast<std::size_t>(max_iter), residual);
}

SampledRoughPath window_path(const SampledRoughPath & x, std::size_t a, std::size_t b)
{
  if (b <= a || b >= x.size()) throw InputError("window_path: window outside the grid");
  const std::size_t len = b - a;
  if ((len & (len - 1)) != 0 || a % len != 0) {
    throw InputError("window_path: windows must be dyadic, got [" + std::to_string(a) + ", " + std::to_string(b)
                     + "]");
  }
  int m = 0;
  while ((std::size_t{1} << m) < len) ++m;
  std::vector<GroupElement> nodes;
  nodes.reserve(len + 1);
  for (std::size_t i = a; i <= b; ++i) nodes.push_back(i == a ? GroupElement::identity(x.dim(), x.level()) : x.increment(a, i));
  return SampledRoughPath(m, std::move(nodes), x.params());
}

RdeSolution windowed_solve(const Eigen::VectorXd & y0, const PolyVectorField & v,
                           std::shared_ptr<const SampledRoughPath> x, const std::vector<std::size_t> & splits,
                           double tol, int max_iter)
{
  if (!x) throw InputError("windowed_solve: missing driver");
  if (splits.size() < 2 || splits.front() != 0 || splits.back() != x->size() - 1) {
    throw InputError("windowed_solve: splits must start at 0 and end at the last grid index");
  }
  RdeSolution out;
  out.scheme = "picard-windowed";
  out.depth  = x->depth();
  out.level  = 2;
  Eigen::VectorXd start = y0;
  for (std::size_t w = 0; w + 1 < splits.size(); ++w) {
    const std::size_t a = splits[w];
    const std::size_t b = splits[w + 1];
    std::shared_ptr<const SampledRoughPath> sub =
      (a == 0 && b == x->size() - 1) ? x : std::make_shared<const SampledRoughPath>(window_path(*x, a, b));
    const auto local = solve_picard_level2(start, v, sub, tol, max_iter);
    const std::size_t from = w == 0 ? 0 : 1;  // seam value taken from the previous window
    for (std::size_t i = from; i < local.y.size(); ++i) {
      out.y.push_back(local.y[i]);
      out.yprime.push_back(local.yprime[i]);
    }
    out.iterations = std::max(out.iterations, local.iterations);
    out.residual   = std::max(out.residual, local.residual);
    start          = local.y.back();
  }
  return out;
}

}  // namespace srp
