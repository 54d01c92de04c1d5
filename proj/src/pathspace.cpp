#include "srp/pathspace.hpp"

#include <algorithm>
#include <string>

#include "srp/errors.hpp"

namespace srp {

namespace {

void require_same_grid(const SampledRoughPath & x1, const SampledRoughPath & x2, const char * op)
{
  if (x1.dim() != x2.dim() || x1.level() != x2.level() || x1.depth() != x2.depth()) {
    throw InputError(std::string(op) + ": paths live on different grids or groups");
  }
}

void require_window(const SampledRoughPath & x, GridWindow w, const char * op)
{
  if (w.first > w.last || w.last >= x.size()) {
    throw InputError(std::string(op) + ": window outside the grid");
  }
}

int depth_of(std::size_t n, const char * op)
{
  if (n < 2 || ((n - 1) & (n - 2)) != 0) {
    throw InputError(std::string(op) + ": sample count must be 2^J + 1");
  }
  int j = 0;
  while ((std::size_t{1} << j) < n - 1) ++j;
  return j;
}

// |pi_k(X1_{a,b} - X2_{a,b})| for k in 1..levels, local window indices.
std::vector<PairMatrix> level_difference_matrices(
  const SampledRoughPath & x1, const SampledRoughPath & x2, int levels, GridWindow w)
{
  const std::size_t n = w.points();
  std::vector<PairMatrix> out(static_cast<std::size_t>(levels), PairMatrix(n));
  TruncatedTensor i1(x1.dim(), x1.level());
  TruncatedTensor i2(x1.dim(), x1.level());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      x1.increment_into(w.first + a, w.first + b, i1);
      x2.increment_into(w.first + a, w.first + b, i2);
      for (int k = 1; k <= levels; ++k) {
        const auto p = i1[k];
        const auto q = i2[k];
        double s     = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - q[i]) * (p[i] - q[i]);
        out[k - 1](a, b) = std::sqrt(s);
      }
    }
  }
  return out;
}

PairMatrix powered(const PairMatrix & m, double power)
{
  PairMatrix out(m.size());
  for (std::size_t a = 0; a < m.size(); ++a) {
    for (std::size_t b = a + 1; b < m.size(); ++b) out(a, b) = std::pow(m(a, b), power);
  }
  return out;
}

}  // namespace

void validate_params(const SobolevParams & params)
{
  if (!(params.alpha > 0.0 && params.alpha < 1.0)) {
    throw InputError("alpha must lie in (0, 1)");
  }
  if (!(params.p > 1.0)) {
    throw InputError("p must lie in (1, inf]");
  }
  if (!(params.alpha * params.p > 1.0)) {
    throw InputError("Sobolev regularity requires alpha > 1/p");
  }
}

SampledRoughPath::SampledRoughPath(int depth, std::vector<GroupElement> nodes, SobolevParams params)
    : depth_(depth), nodes_(std::move(nodes)), params_(params)
{
  if (depth < 0 || depth > 24) throw InputError("SampledRoughPath: depth out of range");
  if (nodes_.size() != (std::size_t{1} << depth) + 1) {
    throw InputError("SampledRoughPath: expected 2^J + 1 nodes");
  }
  validate_params(params_);
  if (!nodes_.front().is_identity()) {
    throw InputError("SampledRoughPath: first node must be the identity");
  }
  const int d = nodes_.front().dim();
  const int n = nodes_.front().level();
  inverses_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto & g = nodes_[i];
    if (g.dim() != d || g.level() != n) {
      throw InputError("SampledRoughPath: node " + std::to_string(i) + " has a different shape");
    }
    if (n <= 3) {
      const auto chk = check_geometric(g);
      if (!chk.geometric) {
        throw InputError("SampledRoughPath: node " + std::to_string(i) + " is not geometric");
      }
    }
    inverses_.push_back(group_inverse(g));
  }
}

GroupElement SampledRoughPath::increment(std::size_t a, std::size_t b) const
{
  return inverses_[a] * nodes_[b];
}

void SampledRoughPath::increment_into(std::size_t a, std::size_t b, TruncatedTensor & out) const
{
  tensor_mul_into(inverses_[a].tensor(), nodes_[b].tensor(), out);
}

std::vector<Eigen::VectorXd> SampledRoughPath::level1() const
{
  std::vector<Eigen::VectorXd> out;
  out.reserve(nodes_.size());
  for (const auto & g : nodes_) {
    const auto l = g[1];
    out.emplace_back(Eigen::Map<const Eigen::VectorXd>(l.data(), static_cast<Eigen::Index>(l.size())));
  }
  return out;
}

SampledRoughPath SampledRoughPath::with_params(SobolevParams params) const
{
  SampledRoughPath copy = *this;
  validate_params(params);
  copy.params_ = params;
  return copy;
}

PairMatrix increment_norms(const SampledRoughPath & x, GridWindow window)
{
  require_window(x, window, "increment_norms");
  const std::size_t n = window.points();
  PairMatrix out(n);
  TruncatedTensor inc(x.dim(), x.level());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      x.increment_into(window.first + a, window.first + b, inc);
      out(a, b) = homogeneous_norm(inc);
    }
  }
  return out;
}

double partition_sup(const PairMatrix & cost)
{
  const std::size_t n = cost.size();
  if (n < 2) return 0.0;
  std::vector<double> best(n, 0.0);
  for (std::size_t b = 1; b < n; ++b) {
    const double * col = cost.ending_at(b);
    double m           = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < b; ++a) m = std::max(m, best[a] + col[a]);
    best[b] = m;
  }
  return best[n - 1];
}

double mixed_variation_sum(const PairMatrix & cost, double outer, double time_power, double h)
{
  const std::size_t n = cost.size();
  if (n < 2) return 0.0;
  PairMatrix weight(n);
  std::vector<double> best(n, 0.0);
  std::vector<double> time(n, 0.0);
  for (std::size_t lag = 1; lag < n; ++lag) {
    time[lag] = std::pow(static_cast<double>(lag) * h, time_power);
  }
  for (std::size_t u = 0; u + 1 < n; ++u) {
    best[u] = 0.0;
    for (std::size_t v = u + 1; v < n; ++v) {
      const double * col = cost.ending_at(v);
      double m           = -std::numeric_limits<double>::infinity();
      for (std::size_t w = u; w < v; ++w) m = std::max(m, best[w] + col[w]);
      best[v]      = m;
      weight(u, v) = std::pow(m, outer) / time[v - u];
    }
  }
  return partition_sup(weight);
}

double qvar_norm(const SampledRoughPath & x, double q, GridWindow window)
{
  if (!(q >= 1.0)) throw InputError("qvar_norm: q must be >= 1");
  const auto d = increment_norms(x, window);
  return std::pow(partition_sup(powered(d, q)), 1.0 / q);
}

double sobolev_norm_integral(const SampledRoughPath & x, double alpha, double p, GridWindow window)
{
  if (std::isinf(p)) return holder_norm(x, alpha, window);
  validate_params({alpha, p});
  require_window(x, window, "sobolev_norm_integral");
  const std::size_t n = window.points();
  if (n < 2) return 0.0;
  const double h = x.step();
  std::vector<double> kernel(n, 0.0);
  for (std::size_t lag = 1; lag < n; ++lag) {
    kernel[lag] = 1.0 / std::pow(static_cast<double>(lag) * h, alpha * p + 1.0);
  }
  auto weight = [&](std::size_t i) { return (i == 0 || i == n - 1) ? 0.5 * h : h; };
  TruncatedTensor inc(x.dim(), x.level());
  CompensatedSum total;
  for (std::size_t a = 0; a < n; ++a) {
    CompensatedSum row;
    for (std::size_t b = a + 1; b < n; ++b) {
      x.increment_into(window.first + a, window.first + b, inc);
      const double dist = homogeneous_norm(inc);
      if (dist == 0.0) continue;
      row += weight(b) * std::pow(dist, p) * kernel[b - a];
    }
    total += 2.0 * weight(a) * row.value();
  }
  return std::pow(total.value(), 1.0 / p);
}

DyadicNorm sobolev_norm_dyadic(const SampledRoughPath & x, double alpha, double p)
{
  validate_params({alpha, p});
  if (std::isinf(p)) throw InputError("sobolev_norm_dyadic: p must be finite");
  TruncatedTensor inc(x.dim(), x.level());
  return dyadic_sobolev(x.depth(), alpha, p, [&](std::size_t a, std::size_t b) {
    x.increment_into(a, b, inc);
    return homogeneous_norm(inc);
  });
}

DyadicNorm sobolev_norm_dyadic(std::span<const Eigen::VectorXd> values, double alpha, double p)
{
  validate_params({alpha, p});
  if (std::isinf(p)) throw InputError("sobolev_norm_dyadic: p must be finite");
  const int depth = depth_of(values.size(), "sobolev_norm_dyadic");
  return dyadic_sobolev(depth, alpha, p, [&](std::size_t a, std::size_t b) {
    return (values[b] - values[a]).norm();
  });
}

double holder_norm(const SampledRoughPath & x, double alpha, GridWindow window)
{
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("holder_norm: alpha must lie in (0, 1)");
  const auto d   = increment_norms(x, window);
  const double h = x.step();
  double worst   = 0.0;
  for (std::size_t a = 0; a < d.size(); ++a) {
    for (std::size_t b = a + 1; b < d.size(); ++b) {
      worst = std::max(worst, d(a, b) / std::pow(static_cast<double>(b - a) * h, alpha));
    }
  }
  return worst;
}

double max_node_norm(const SampledRoughPath & x)
{
  double m = 0.0;
  for (const auto & g : x.nodes()) m = std::max(m, homogeneous_norm(g));
  return m;
}

int distance_levels(const SampledRoughPath & x, double alpha)
{
  return std::min(x.level(), floor_bracket(1.0 / alpha));
}

LevelDistances inhom_sobolev_dist(
  const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, double p)
{
  require_same_grid(x1, x2, "inhom_sobolev_dist");
  validate_params({alpha, p});
  if (std::isinf(p)) throw InputError("inhom_sobolev_dist: p must be finite");
  const int levels = distance_levels(x1, alpha);
  const int depth  = x1.depth();
  std::vector<CompensatedSum> sums(static_cast<std::size_t>(levels));
  TruncatedTensor i1(x1.dim(), x1.level());
  TruncatedTensor i2(x1.dim(), x1.level());
  for (int j = 0; j <= depth; ++j) {
    const std::size_t stride = std::size_t{1} << (depth - j);
    const std::size_t count  = std::size_t{1} << j;
    const double weight      = std::exp2(j * (alpha * p - 1.0));
    std::vector<CompensatedSum> level_sums(static_cast<std::size_t>(levels));
    for (std::size_t m = 0; m < count; ++m) {
      x1.increment_into(m * stride, (m + 1) * stride, i1);
      x2.increment_into(m * stride, (m + 1) * stride, i2);
      for (int k = 1; k <= levels; ++k) {
        const auto a = i1[k];
        const auto b = i2[k];
        double s     = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
        level_sums[k - 1] += std::pow(std::sqrt(s), p / k);
      }
    }
    for (int k = 0; k < levels; ++k) sums[k] += weight * level_sums[k].value();
  }
  LevelDistances out;
  for (int k = 1; k <= levels; ++k) {
    const double v = std::pow(sums[k - 1].value(), k / p);
    out.per_level.push_back(v);
    out.total += v;
  }
  return out;
}

PairMatrix level_difference_norms(
  const SampledRoughPath & x1, const SampledRoughPath & x2, int k, GridWindow window)
{
  require_same_grid(x1, x2, "level_difference_norms");
  require_window(x1, window, "level_difference_norms");
  if (k < 1 || k > x1.level()) throw InputError("level_difference_norms: level out of range");
  return std::move(level_difference_matrices(x1, x2, k, window)[k - 1]);
}

std::vector<double> inhom_qvar_dist(
  const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, GridWindow window)
{
  require_same_grid(x1, x2, "inhom_qvar_dist");
  require_window(x1, window, "inhom_qvar_dist");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("inhom_qvar_dist: alpha must lie in (0, 1)");
  const int levels = distance_levels(x1, alpha);
  const auto diffs = level_difference_matrices(x1, x2, levels, window);
  std::vector<double> out;
  for (int k = 1; k <= levels; ++k) {
    const double q = 1.0 / (alpha * k);
    out.push_back(std::pow(partition_sup(powered(diffs[k - 1], q)), 1.0 / q));
  }
  return out;
}

LevelDistances mixed_dist(const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, double p)
{
  require_same_grid(x1, x2, "mixed_dist");
  validate_params({alpha, p});
  if (std::isinf(p)) throw InputError("mixed_dist: p must be finite");
  const int levels = distance_levels(x1, alpha);
  const auto diffs = level_difference_matrices(x1, x2, levels, GridWindow::full(x1));
  LevelDistances out;
  for (int k = 1; k <= levels; ++k) {
    const double q = 1.0 / (alpha * k);
    // rho_var^{p/k} = (sup sum)^{alpha k * p / k}
    const double sum = mixed_variation_sum(powered(diffs[k - 1], q), alpha * p, alpha * p - 1.0, x1.step());
    const double v  = std::pow(sum, k / p);
    out.per_level.push_back(v);
    out.total = std::max(out.total, v);
  }
  return out;
}

IntervalFunction::IntervalFunction(int depth, int value_dim, Evaluator f)
    : depth_(depth), value_dim_(value_dim), f_(std::move(f))
{
  if (depth < 0 || depth > 24 || value_dim < 1 || !f_) {
    throw InputError("IntervalFunction: invalid depth, dimension or evaluator");
  }
}

Eigen::VectorXd IntervalFunction::operator()(std::size_t a, std::size_t b) const
{
  Eigen::VectorXd v = f_(a, b);
  if (v.size() != value_dim_) throw InputError("IntervalFunction: evaluator returned wrong dimension");
  if (!v.allFinite()) {
    throw NumericError("IntervalFunction: non-finite value on [" + std::to_string(a) + ", "
                       + std::to_string(b) + "]");
  }
  return v;
}

std::vector<std::vector<Eigen::VectorXd>> IntervalFunction::dyadic_values() const
{
  std::vector<std::vector<Eigen::VectorXd>> out(static_cast<std::size_t>(depth_) + 1);
  for (int j = 0; j <= depth_; ++j) {
    const std::size_t stride = std::size_t{1} << (depth_ - j);
    const std::size_t count  = std::size_t{1} << j;
    out[j].reserve(count);
    for (std::size_t i = 0; i < count; ++i) out[j].push_back((*this)(i * stride, (i + 1) * stride));
  }
  return out;
}

PairMatrix IntervalFunction::norm_matrix(double power) const
{
  const std::size_t n = grid_size();
  PairMatrix out(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const double v = norm(a, b);
      out(a, b)      = power == 1.0 ? v : std::pow(v, power);
    }
  }
  return out;
}

IntervalFunction operator-(const IntervalFunction & f, const IntervalFunction & g)
{
  if (f.depth() != g.depth() || f.value_dim() != g.value_dim()) {
    throw InputError("IntervalFunction difference: shape mismatch");
  }
  return IntervalFunction(f.depth(), f.value_dim(),
    [f, g](std::size_t a, std::size_t b) -> Eigen::VectorXd { return f(a, b) - g(a, b); });
}

IntervalFunction operator*(double s, const IntervalFunction & f)
{
  return IntervalFunction(f.depth(), f.value_dim(),
    [s, f](std::size_t a, std::size_t b) -> Eigen::VectorXd { return s * f(a, b); });
}

ControlCheck control_check(const IntervalFunction & omega, double tolerance)
{
  if (omega.value_dim() != 1) throw InputError("control_check: omega must be scalar");
  ControlCheck out;
  const int depth = omega.depth();
  for (int j = 0; j < depth; ++j) {
    const std::size_t stride = std::size_t{1} << (depth - j);
    const std::size_t count  = std::size_t{1} << j;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t s = i * stride;
      const std::size_t t = s + stride;
      const std::size_t u = s + stride / 2;
      const double excess = omega(s, u)[0] + omega(u, t)[0] - omega(s, t)[0] * (1.0 + tolerance);
      if (excess > out.worst_violation) {
        out.worst_violation = excess;
        out.level           = j;
        out.index           = i;
      }
    }
  }
  out.superadditive = out.worst_violation == 0.0;
  return out;
}

}  // namespace srp
