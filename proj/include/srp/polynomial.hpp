#ifndef SRP_POLYNOMIAL_HPP_
#define SRP_POLYNOMIAL_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Core>

namespace srp {

/// Real polynomial in `vars` variables, sparse in monomials.
class Polynomial
{
public:
  using Exponents = std::vector<int>;

  Polynomial() = default;
  explicit Polynomial(int vars) : vars_(vars) {}

  static Polynomial constant(int vars, double c);
  /// x_i
  static Polynomial coordinate(int vars, int i);

  int vars() const noexcept { return vars_; }
  const std::map<Exponents, double> & terms() const noexcept { return terms_; }
  bool is_zero() const noexcept { return terms_.empty(); }
  int degree() const noexcept;

  /// Adds c * x^powers; zero coefficients are dropped.
  void add_term(const Exponents & powers, double c);

  double operator()(const Eigen::VectorXd & x) const;

  /// d/dx_i
  Polynomial derivative(int i) const;

  /// sup over the ball |x - center| <= radius of |P|, bounded by sum |c| prod (|center_j| + radius)^{k_j}.
  double ball_bound(const Eigen::VectorXd & center, double radius) const;

  Polynomial & operator+=(const Polynomial & q);
  Polynomial & operator*=(double s);

private:
  int vars_ = 0;
  std::map<Exponents, double> terms_;
};

Polynomial operator+(Polynomial a, const Polynomial & b);
Polynomial operator*(const Polynomial & a, const Polynomial & b);
Polynomial operator*(double s, Polynomial a);

/**
 * Polynomial map F: R^n -> R^{rows x cols}, entries stored row-major (r * cols + c).
 * Used both as a composition map (cols = 1 gives R^n -> R^rows) and as a vector
 * field V: R^e -> L(R^d, R^e) with rows = e, cols = d.
 */
class SmoothMap
{
public:
  struct Term
  {
    int row   = 0;
    int col   = 0;
    double coef = 0.0;
    std::vector<int> powers;
  };

  SmoothMap() = default;
  SmoothMap(int in_dim, int rows, int cols, const std::vector<Term> & terms);
  SmoothMap(int in_dim, int rows, int cols, std::vector<Polynomial> entries);

  /// y -> A y for an rows x in_dim matrix (cols = 1).
  static SmoothMap linear(const Eigen::MatrixXd & a);
  static SmoothMap constant(int in_dim, const Eigen::MatrixXd & value);

  int in_dim() const noexcept { return in_dim_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  int out_dim() const noexcept { return rows_ * cols_; }
  const std::vector<Polynomial> & entries() const noexcept { return entries_; }
  std::vector<Term> to_terms() const;

  /// Flattened value, length out_dim.
  Eigen::VectorXd value(const Eigen::VectorXd & y) const;
  /// Value as a rows x cols matrix.
  Eigen::MatrixXd matrix(const Eigen::VectorXd & y) const;
  /// DF(y), out_dim x in_dim.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd & y) const;
  /// D^2F(y)[u, v], length out_dim.
  Eigen::VectorXd second(const Eigen::VectorXd & y, const Eigen::VectorXd & u, const Eigen::VectorXd & v) const;
  /// D^3F(y)[u, v, w], length out_dim.
  Eigen::VectorXd third(const Eigen::VectorXd & y, const Eigen::VectorXd & u, const Eigen::VectorXd & v,
                        const Eigen::VectorXd & w) const;

  /// Largest relative mismatch between analytic derivatives (orders 1..3) and
  /// central differences at `points` random points of scale `scale`.
  double self_test(std::uint64_t seed, int points = 8, double scale = 1.0) const;

  /**
   * Surrogate for |F|_{Lip^{gamma}} on a ball: the max over derivative orders
   * 0..max_order of the Frobenius norm of the ball bounds of all partials.
   */
  double lip_bound(const Eigen::VectorXd & center, double radius, int max_order) const;

  SmoothMap operator-(const SmoothMap & other) const;

private:
  void build_derivatives();

  int in_dim_ = 0;
  int rows_   = 0;
  int cols_   = 0;
  std::vector<Polynomial> entries_;
  std::vector<Polynomial> d1_;  // [m * n + i]
  std::vector<Polynomial> d2_;  // [(m * n + i) * n + j]
  std::vector<Polynomial> d3_;  // [((m * n + i) * n + j) * n + k]
};

/// Throws InputError if the self-test exceeds `tolerance`.
void require_self_test(const SmoothMap & f, double tolerance = 1e-6);

}  // namespace srp

#endif  // SRP_POLYNOMIAL_HPP_
