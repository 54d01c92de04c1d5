#include "srp/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srp/errors.hpp"

namespace srp {

namespace {

void require_same_shape(const TruncatedTensor & a, const TruncatedTensor & b, const char * op)
{
  if (!a.same_shape(b)) {
    throw InputError(std::string(op) + ": shape mismatch (d=" + std::to_string(a.dim())
                     + ", N=" + std::to_string(a.level()) + ") vs (d=" + std::to_string(b.dim())
                     + ", N=" + std::to_string(b.level()) + ")");
  }
}

double level2_violation(const TruncatedTensor & t)
{
  if (t.level() < 2) return 0.0;
  const int d  = t.dim();
  const auto x = t[1];
  const auto a = t[2];
  double worst = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      const double sym = 0.5 * (a[i * d + j] + a[j * d + i]);
      worst            = std::max(worst, std::abs(sym - 0.5 * x[i] * x[j]));
    }
  }
  return worst;
}

// Max deviation of theta(P)/3 from P for the degree-3 tensor P.
double dynkin3_violation(std::span<const double> p, int d)
{
  const std::size_t d2 = static_cast<std::size_t>(d) * d;
  std::vector<double> theta(p.size(), 0.0);
  auto at = [&](int a, int b, int c) { return a * d2 + b * d + c; };
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      for (int c = 0; c < d; ++c) {
        const double w = p[at(a, b, c)];
        if (w == 0.0) continue;
        theta[at(a, b, c)] += w;
        theta[at(b, a, c)] -= w;
        theta[at(c, a, b)] -= w;
        theta[at(c, b, a)] += w;
      }
    }
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    worst = std::max(worst, std::abs(theta[i] / 3.0 - p[i]));
  }
  return worst;
}

}  // namespace

TruncatedTensor::TruncatedTensor(int dim, int level) : dim_(dim), level_(level)
{
  if (dim < 1 || level < 0) {
    throw InputError("TruncatedTensor: need dim >= 1 and level >= 0");
  }
  offsets_.resize(static_cast<std::size_t>(level) + 2);
  offsets_[0]      = 0;
  std::size_t size = 1;
  for (int k = 0; k <= level; ++k) {
    offsets_[k + 1] = offsets_[k] + size;
    size *= static_cast<std::size_t>(dim);
  }
  data_.assign(offsets_.back(), 0.0);
}

TruncatedTensor TruncatedTensor::scalar(int dim, int level, double c)
{
  TruncatedTensor t(dim, level);
  t.data_[0] = c;
  return t;
}

TruncatedTensor & TruncatedTensor::operator+=(const TruncatedTensor & other)
{
  require_same_shape(*this, other, "operator+");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

TruncatedTensor & TruncatedTensor::operator-=(const TruncatedTensor & other)
{
  require_same_shape(*this, other, "operator-");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

TruncatedTensor & TruncatedTensor::operator*=(double s) noexcept
{
  for (auto & x : data_) x *= s;
  return *this;
}

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor & b) { return a += b; }
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor & b) { return a -= b; }
TruncatedTensor operator*(double s, TruncatedTensor a) { return a *= s; }

void tensor_mul_into(const TruncatedTensor & a, const TruncatedTensor & b, TruncatedTensor & out)
{
  require_same_shape(a, b, "tensor_mul");
  require_same_shape(a, out, "tensor_mul");
  const int n = a.level();
  for (int k = 0; k <= n; ++k) {
    auto dst = out[k];
    std::fill(dst.begin(), dst.end(), 0.0);
    for (int i = 0; i <= k; ++i) {
      const auto ai = a[i];
      const auto bj = b[k - i];
      const std::size_t nb = bj.size();
      for (std::size_t p = 0; p < ai.size(); ++p) {
        const double x = ai[p];
        if (x == 0.0) continue;
        double * row = dst.data() + p * nb;
        for (std::size_t q = 0; q < nb; ++q) row[q] += x * bj[q];
      }
    }
  }
}

TruncatedTensor tensor_mul(const TruncatedTensor & a, const TruncatedTensor & b)
{
  require_same_shape(a, b, "tensor_mul");
  TruncatedTensor out(a.dim(), a.level());
  tensor_mul_into(a, b, out);
  return out;
}

double max_abs(const TruncatedTensor & t) noexcept
{
  double m = 0.0;
  for (double x : t.coefficients()) m = std::max(m, std::abs(x));
  return m;
}

double level_norm(const TruncatedTensor & t, int k) noexcept
{
  double s = 0.0;
  for (double x : t[k]) s += x * x;
  return std::sqrt(s);
}

GroupElement GroupElement::identity(int dim, int level)
{
  return GroupElement(TruncatedTensor::scalar(dim, level, 1.0));
}

GroupElement GroupElement::from_tensor(TruncatedTensor t)
{
  if (t[0][0] != 1.0) {
    throw InputError("GroupElement: scalar level must be exactly 1");
  }
  if (level2_violation(t) > kGeometricTolerance) {
    throw InputError("GroupElement: level 2 violates Sym(pi_2) = pi_1 (x) pi_1 / 2");
  }
  return GroupElement(std::move(t));
}

bool GroupElement::is_identity() const noexcept
{
  const auto c = t_.coefficients();
  if (c[0] != 1.0) return false;
  return std::all_of(c.begin() + 1, c.end(), [](double x) { return x == 0.0; });
}

LieElement LieElement::from_tensor(TruncatedTensor t)
{
  if (t[0][0] != 0.0) {
    throw InputError("LieElement: scalar level must be exactly 0");
  }
  return LieElement(std::move(t));
}

LieElement LieElement::from_vector(const Eigen::VectorXd & v, int level)
{
  TruncatedTensor t(static_cast<int>(v.size()), level);
  if (level >= 1) {
    auto l1 = t[1];
    for (Eigen::Index i = 0; i < v.size(); ++i) l1[i] = v[i];
  }
  return LieElement(std::move(t));
}

GroupElement operator*(const GroupElement & g, const GroupElement & h)
{
  return GroupElement::trusted(tensor_mul(g.tensor(), h.tensor()));
}

GroupElement group_inverse(const GroupElement & g)
{
  // x = g - 1 is nilpotent of order N+1; Horner form of sum_k (-x)^k.
  TruncatedTensor minus_x = g.tensor();
  minus_x[0][0]           = 0.0;
  minus_x *= -1.0;
  const auto one = TruncatedTensor::scalar(g.dim(), g.level(), 1.0);
  TruncatedTensor acc = one;
  for (int k = 0; k < g.level(); ++k) {
    acc = one + tensor_mul(minus_x, acc);
  }
  return GroupElement::trusted(std::move(acc));
}

GroupElement group_exp(const LieElement & l)
{
  const auto one = TruncatedTensor::scalar(l.dim(), l.level(), 1.0);
  TruncatedTensor acc = one;
  for (int k = l.level(); k >= 1; --k) {
    acc = one + (1.0 / k) * tensor_mul(l.tensor(), acc);
  }
  return GroupElement::from_tensor(std::move(acc));
}

LieElement group_log(const GroupElement & g)
{
  TruncatedTensor x = g.tensor();
  x[0][0]           = 0.0;
  const int n       = g.level();
  TruncatedTensor acc(g.dim(), n);
  TruncatedTensor power = x;
  for (int k = 1; k <= n; ++k) {
    const double c = ((k % 2 == 1) ? 1.0 : -1.0) / k;
    acc += c * power;
    if (k < n) power = tensor_mul(power, x);
  }
  acc[0][0] = 0.0;
  return LieElement::from_tensor(std::move(acc));
}

GroupElement signature_segment(const Eigen::VectorXd & z0, const Eigen::VectorXd & z1, int level)
{
  if (z0.size() != z1.size() || z0.size() < 1) {
    throw InputError("signature_segment: endpoints must share a positive dimension");
  }
  const int d = static_cast<int>(z0.size());
  const Eigen::VectorXd v = z1 - z0;
  if (!v.allFinite()) throw InputError("signature_segment: non-finite coordinates");
  TruncatedTensor t = TruncatedTensor::scalar(d, level, 1.0);
  // level k = level_{k-1} ⊗ v / k
  for (int k = 1; k <= level; ++k) {
    const auto prev = t[k - 1];
    auto cur        = t[k];
    const double inv_k = 1.0 / k;
    for (std::size_t p = 0; p < prev.size(); ++p) {
      for (int q = 0; q < d; ++q) cur[p * d + q] = prev[p] * v[q] * inv_k;
    }
  }
  return GroupElement::trusted(std::move(t));
}

std::vector<GroupElement> signature_path(std::span<const Eigen::VectorXd> points, int level)
{
  if (points.empty()) throw InputError("signature_path: empty input");
  const int d = static_cast<int>(points[0].size());
  std::vector<GroupElement> out;
  out.reserve(points.size());
  out.push_back(GroupElement::identity(d, level));
  TruncatedTensor scratch(d, level);
  for (std::size_t m = 1; m < points.size(); ++m) {
    if (points[m].size() != d) throw InputError("signature_path: ragged point dimensions");
    const auto seg = signature_segment(points[m - 1], points[m], level);
    tensor_mul_into(out.back().tensor(), seg.tensor(), scratch);
    out.push_back(GroupElement::trusted(scratch));
  }
  return out;
}

GroupElement increment(const GroupElement & xs, const GroupElement & xt)
{
  require_same_shape(xs.tensor(), xt.tensor(), "increment");
  return group_inverse(xs) * xt;
}

double homogeneous_norm(const TruncatedTensor & g) noexcept
{
  double s = 0.0;
  for (int k = 1; k <= g.level(); ++k) {
    const double n = level_norm(g, k);
    if (n == 0.0) continue;
    s += (k == 1) ? n : (k == 2 ? std::sqrt(n) : std::pow(n, 1.0 / k));
  }
  return s;
}

double homogeneous_norm(const GroupElement & g) noexcept { return homogeneous_norm(g.tensor()); }

double rho_metric(const GroupElement & g, const GroupElement & h)
{
  require_same_shape(g.tensor(), h.tensor(), "rho_metric");
  double worst = 0.0;
  for (int k = 1; k <= g.level(); ++k) {
    const auto a = g[k];
    const auto b = h[k];
    double s     = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

GroupElement dilate(const GroupElement & g, double lambda)
{
  TruncatedTensor t = g.tensor();
  double scale      = 1.0;
  for (int k = 1; k <= t.level(); ++k) {
    scale *= lambda;
    for (auto & x : t[k]) x *= scale;
  }
  return GroupElement::trusted(std::move(t));
}

GroupElement truncate(const GroupElement & g, int level)
{
  if (level < 0 || level > g.level()) throw InputError("truncate: level out of range");
  TruncatedTensor t(g.dim(), level);
  for (int k = 0; k <= level; ++k) {
    std::copy(g[k].begin(), g[k].end(), t[k].begin());
  }
  return GroupElement::trusted(std::move(t));
}

GeometricCheck check_geometric(const TruncatedTensor & g, double tolerance)
{
  if (g.level() > 3) {
    throw InputError("check_geometric: only N <= 3 is supported");
  }
  GeometricCheck r;
  const double scalar_gap = std::abs(g[0][0] - 1.0);
  r.violation             = std::max(scalar_gap, level2_violation(g));
  if (g.level() == 3 && scalar_gap == 0.0) {
    const auto l = group_log(GroupElement::trusted(g));
    r.violation  = std::max(r.violation, dynkin3_violation(l[3], g.dim()));
  }
  r.geometric = r.violation <= tolerance;
  return r;
}

}  // namespace srp
