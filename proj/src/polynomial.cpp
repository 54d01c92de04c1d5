#include "srp/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "srp/errors.hpp"

namespace srp {

namespace {

double monomial(const Polynomial::Exponents & powers, const Eigen::VectorXd & x)
{
  double v = 1.0;
  for (std::size_t j = 0; j < powers.size(); ++j) {
    for (int r = 0; r < powers[j]; ++r) v *= x[static_cast<Eigen::Index>(j)];
  }
  return v;
}

}  // namespace

Polynomial Polynomial::constant(int vars, double c)
{
  Polynomial p(vars);
  p.add_term(Exponents(static_cast<std::size_t>(vars), 0), c);
  return p;
}

Polynomial Polynomial::coordinate(int vars, int i)
{
  Polynomial p(vars);
  Exponents e(static_cast<std::size_t>(vars), 0);
  e[static_cast<std::size_t>(i)] = 1;
  p.add_term(e, 1.0);
  return p;
}

int Polynomial::degree() const noexcept
{
  int d = 0;
  for (const auto & [e, c] : terms_) {
    int s = 0;
    for (int k : e) s += k;
    d = std::max(d, s);
  }
  return d;
}

void Polynomial::add_term(const Exponents & powers, double c)
{
  if (static_cast<int>(powers.size()) != vars_) {
    throw InputError("polynomial term has " + std::to_string(powers.size()) + " exponents, expected "
                     + std::to_string(vars_));
  }
  for (int k : powers) {
    if (k < 0) throw InputError("polynomial exponents must be non-negative");
  }
  if (!std::isfinite(c)) throw InputError("polynomial coefficient is not finite");
  if (c == 0.0) return;
  auto it = terms_.find(powers);
  if (it == terms_.end()) {
    terms_.emplace(powers, c);
  } else {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::operator()(const Eigen::VectorXd & x) const
{
  double s = 0.0;
  for (const auto & [e, c] : terms_) s += c * monomial(e, x);
  return s;
}

Polynomial Polynomial::derivative(int i) const
{
  Polynomial out(vars_);
  for (const auto & [e, c] : terms_) {
    const int k = e[static_cast<std::size_t>(i)];
    if (k == 0) continue;
    auto lowered = e;
    lowered[static_cast<std::size_t>(i)] = k - 1;
    out.add_term(lowered, c * k);
  }
  return out;
}

double Polynomial::ball_bound(const Eigen::VectorXd & center, double radius) const
{
  double s = 0.0;
  for (const auto & [e, c] : terms_) {
    double m = 1.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      m *= std::pow(std::abs(center[static_cast<Eigen::Index>(j)]) + radius, e[j]);
    }
    s += std::abs(c) * m;
  }
  return s;
}

Polynomial & Polynomial::operator+=(const Polynomial & q)
{
  if (q.vars_ != vars_) throw InputError("polynomial variable count mismatch");
  for (const auto & [e, c] : q.terms_) add_term(e, c);
  return *this;
}

Polynomial & Polynomial::operator*=(double s)
{
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto & [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator+(Polynomial a, const Polynomial & b) { return a += b; }

Polynomial operator*(double s, Polynomial a) { return a *= s; }

Polynomial operator*(const Polynomial & a, const Polynomial & b)
{
  if (a.vars() != b.vars()) throw InputError("polynomial variable count mismatch");
  Polynomial out(a.vars());
  for (const auto & [ea, ca] : a.terms()) {
    for (const auto & [eb, cb] : b.terms()) {
      auto e = ea;
      for (std::size_t j = 0; j < e.size(); ++j) e[j] += eb[j];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

SmoothMap::SmoothMap(int in_dim, int rows, int cols, const std::vector<Term> & terms)
    : in_dim_(in_dim), rows_(rows), cols_(cols)
{
  if (in_dim < 1 || rows < 1 || cols < 1) throw InputError("SmoothMap: dimensions must be positive");
  entries_.assign(static_cast<std::size_t>(rows * cols), Polynomial(in_dim));
  for (const auto & t : terms) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw InputError("SmoothMap: term index (" + std::to_string(t.row) + ", " + std::to_string(t.col)
                       + ") out of range");
    }
    entries_[static_cast<std::size_t>(t.row * cols + t.col)].add_term(t.powers, t.coef);
  }
  build_derivatives();
}

SmoothMap::SmoothMap(int in_dim, int rows, int cols, std::vector<Polynomial> entries)
    : in_dim_(in_dim), rows_(rows), cols_(cols), entries_(std::move(entries))
{
  if (in_dim < 1 || rows < 1 || cols < 1) throw InputError("SmoothMap: dimensions must be positive");
  if (entries_.size() != static_cast<std::size_t>(rows * cols)) throw InputError("SmoothMap: wrong entry count");
  for (const auto & p : entries_) {
    if (p.vars() != in_dim) throw InputError("SmoothMap: entry has wrong variable count");
  }
  build_derivatives();
}

SmoothMap SmoothMap::linear(const Eigen::MatrixXd & a)
{
  std::vector<Term> terms;
  const int n = static_cast<int>(a.cols());
  for (int r = 0; r < a.rows(); ++r) {
    for (int j = 0; j < n; ++j) {
      std::vector<int> powers(static_cast<std::size_t>(n), 0);
      powers[static_cast<std::size_t>(j)] = 1;
      terms.push_back({r, 0, a(r, j), powers});
    }
  }
  return SmoothMap(n, static_cast<int>(a.rows()), 1, terms);
}

SmoothMap SmoothMap::constant(int in_dim, const Eigen::MatrixXd & value)
{
  std::vector<Term> terms;
  for (int r = 0; r < value.rows(); ++r) {
    for (int c = 0; c < value.cols(); ++c) {
      terms.push_back({r, c, value(r, c), std::vector<int>(static_cast<std::size_t>(in_dim), 0)});
    }
  }
  return SmoothMap(in_dim, static_cast<int>(value.rows()), static_cast<int>(value.cols()), terms);
}

std::vector<SmoothMap::Term> SmoothMap::to_terms() const
{
  std::vector<Term> out;
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      for (const auto & [e, coef] : entries_[static_cast<std::size_t>(r * cols_ + c)].terms()) {
        out.push_back({r, c, coef, e});
      }
    }
  }
  return out;
}

void SmoothMap::build_derivatives()
{
  const std::size_t n = static_cast<std::size_t>(in_dim_);
  d1_.clear();
  d2_.clear();
  d3_.clear();
  for (const auto & p : entries_) {
    for (std::size_t i = 0; i < n; ++i) d1_.push_back(p.derivative(static_cast<int>(i)));
  }
  for (const auto & p : d1_) {
    for (std::size_t j = 0; j < n; ++j) d2_.push_back(p.derivative(static_cast<int>(j)));
  }
  for (const auto & p : d2_) {
    for (std::size_t k = 0; k < n; ++k) d3_.push_back(p.derivative(static_cast<int>(k)));
  }
}

Eigen::VectorXd SmoothMap::value(const Eigen::VectorXd & y) const
{
  if (y.size() != in_dim_) throw InputError("SmoothMap: argument has wrong dimension");
  Eigen::VectorXd out(out_dim());
  for (int m = 0; m < out_dim(); ++m) out[m] = entries_[static_cast<std::size_t>(m)](y);
  return out;
}

Eigen::MatrixXd SmoothMap::matrix(const Eigen::VectorXd & y) const
{
  const Eigen::VectorXd v = value(y);
  Eigen::MatrixXd out(rows_, cols_);
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) out(r, c) = v[r * cols_ + c];
  }
  return out;
}

Eigen::MatrixXd SmoothMap::jacobian(const Eigen::VectorXd & y) const
{
  if (y.size() != in_dim_) throw InputError("SmoothMap: argument has wrong dimension");
  Eigen::MatrixXd out(out_dim(), in_dim_);
  for (int m = 0; m < out_dim(); ++m) {
    for (int i = 0; i < in_dim_; ++i) out(m, i) = d1_[static_cast<std::size_t>(m * in_dim_ + i)](y);
  }
  return out;
}

Eigen::VectorXd SmoothMap::second(
  const Eigen::VectorXd & y, const Eigen::VectorXd & u, const Eigen::VectorXd & v) const
{
  if (y.size() != in_dim_) throw InputError("SmoothMap: argument has wrong dimension");
  const int n = in_dim_;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_dim());
  for (int m = 0; m < out_dim(); ++m) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const auto & p = d2_[static_cast<std::size_t>((m * n + i) * n + j)];
        if (!p.is_zero()) out[m] += p(y) * u[i] * v[j];
      }
    }
  }
  return out;
}

Eigen::VectorXd SmoothMap::third(const Eigen::VectorXd & y, const Eigen::VectorXd & u, const Eigen::VectorXd & v,
                                 const Eigen::VectorXd & w) const
{
  if (y.size() != in_dim_) throw InputError("SmoothMap: argument has wrong dimension");
  const int n = in_dim_;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(out_dim());
  for (int m = 0; m < out_dim(); ++m) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const auto & p = d3_[static_cast<std::size_t>(((m * n + i) * n + j) * n + k)];
          if (!p.is_zero()) out[m] += p(y) * u[i] * v[j] * w[k];
        }
      }
    }
  }
  return out;
}

double SmoothMap::self_test(std::uint64_t seed, int points, double scale) const
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto draw = [&](double s) {
    Eigen::VectorXd v(in_dim_);
    for (int i = 0; i < in_dim_; ++i) v[i] = s * normal(rng);
    return v;
  };
  auto mismatch = [](const Eigen::VectorXd & exact, const Eigen::VectorXd & approx) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < exact.size(); ++i) {
      m = std::max(m, std::abs(exact[i] - approx[i]) / std::max(1.0, std::abs(exact[i])));
    }
    return m;
  };
  const double h = 1e-5;
  double worst   = 0.0;
  for (int trial = 0; trial < points; ++trial) {
    const Eigen::VectorXd y = draw(scale);
    Eigen::VectorXd u = draw(1.0);
    Eigen::VectorXd v = draw(1.0);
    Eigen::VectorXd w = draw(1.0);
    u /= std::max(u.norm(), 1e-12);
    v /= std::max(v.norm(), 1e-12);
    w /= std::max(w.norm(), 1e-12);
    const Eigen::VectorXd d1 = jacobian(y) * u;
    const Eigen::VectorXd f1 = (value(y + h * u) - value(y - h * u)) / (2 * h);
    const Eigen::VectorXd d2 = second(y, u, v);
    const Eigen::VectorXd f2 = (jacobian(y + h * u) * v - jacobian(y - h * u) * v) / (2 * h);
    const Eigen::VectorXd d3 = third(y, u, v, w);
    const Eigen::VectorXd f3 = (second(y + h * w, u, v) - second(y - h * w, u, v)) / (2 * h);
    worst = std::max({worst, mismatch(d1, f1), mismatch(d2, f2), mismatch(d3, f3)});
  }
  return worst;
}

double SmoothMap::lip_bound(const Eigen::VectorXd & center, double radius, int max_order) const
{
  if (center.size() != in_dim_ || radius < 0.0) throw InputError("lip_bound: bad ball");
  const std::vector<Polynomial> * levels[4] = {&entries_, &d1_, &d2_, &d3_};
  double worst = 0.0;
  for (int order = 0; order <= std::min(max_order, 3); ++order) {
    double s = 0.0;
    for (const auto & p : *levels[order]) {
      const double b = p.ball_bound(center, radius);
      s += b * b;
    }
    worst = std::max(worst, std::sqrt(s));
  }
  if (max_order > 3) {
    // derivatives of order > 3 of a cubic or lower vanish; higher degrees are not supported
    for (const auto & p : entries_) {
      if (p.degree() > 3) throw InputError("lip_bound: orders above 3 need degree <= 3");
    }
  }
  return worst;
}

SmoothMap SmoothMap::operator-(const SmoothMap & other) const
{
  if (other.in_dim_ != in_dim_ || other.rows_ != rows_ || other.cols_ != cols_) {
    throw InputError("SmoothMap difference: shape mismatch");
  }
  std::vector<Polynomial> diff = entries_;
  for (std::size_t m = 0; m < diff.size(); ++m) diff[m] += -1.0 * other.entries_[m];
  return SmoothMap(in_dim_, rows_, cols_, std::move(diff));
}

void require_self_test(const SmoothMap & f, double tolerance)
{
  const double err = f.self_test(0x5eed);
  if (!(err <= tolerance)) {
    throw InputError("SmoothMap derivative self-test failed, mismatch " + std::to_string(err));
  }
}

}  // namespace srp
