#ifndef SRP_TENSOR_HPP_
#define SRP_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace srp {

/// Tolerance for geometricity (shuffle-relation) checks.
inline constexpr double kGeometricTolerance = 1e-9;

/**
 * @brief Element of the truncated tensor algebra T^N(R^d).
 *
 * Memory layout
 * =============
 * One contiguous buffer, levels packed in order k = 0..N. Level k holds d^k
 * coefficients in row-major multi-index order (i_1, ..., i_k), so the entry
 * (i_1, ..., i_k) sits at i_1 d^{k-1} + ... + i_k within the level.
 */
class TruncatedTensor
{
public:
  TruncatedTensor() = default;

  /// All-zero tensor.
  TruncatedTensor(int dim, int level);

  /// Tensor with scalar level c and zeros elsewhere.
  static TruncatedTensor scalar(int dim, int level, double c);

  int dim() const noexcept { return dim_; }
  int level() const noexcept { return level_; }

  std::size_t level_size(int k) const noexcept { return offsets_[k + 1] - offsets_[k]; }

  std::span<double> operator[](int k) noexcept
  {
    return {data_.data() + offsets_[k], level_size(k)};
  }
  std::span<const double> operator[](int k) const noexcept
  {
    return {data_.data() + offsets_[k], level_size(k)};
  }

  std::span<const double> coefficients() const noexcept { return data_; }
  std::span<double> coefficients() noexcept { return data_; }

  bool same_shape(const TruncatedTensor & other) const noexcept
  {
    return dim_ == other.dim_ && level_ == other.level_;
  }

  TruncatedTensor & operator+=(const TruncatedTensor & other);
  TruncatedTensor & operator-=(const TruncatedTensor & other);
  TruncatedTensor & operator*=(double s) noexcept;

private:
  int dim_   = 0;
  int level_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<double> data_;
};

TruncatedTensor operator+(TruncatedTensor a, const TruncatedTensor & b);
TruncatedTensor operator-(TruncatedTensor a, const TruncatedTensor & b);
TruncatedTensor operator*(double s, TruncatedTensor a);

/// (a ⊗ b)_k = sum_{i+j=k} a_i ⊗ b_j, truncated at level N.
TruncatedTensor tensor_mul(const TruncatedTensor & a, const TruncatedTensor & b);

/// Allocation-free product; `out` must already have the shape of a and b and must not alias them.
void tensor_mul_into(const TruncatedTensor & a, const TruncatedTensor & b, TruncatedTensor & out);

/// Largest absolute coefficient.
double max_abs(const TruncatedTensor & t) noexcept;

/// Euclidean norm of level k.
double level_norm(const TruncatedTensor & t, int k) noexcept;

/// Element of G^N(R^d): scalar level exactly 1 and level-2 part consistent with a signature.
class GroupElement
{
public:
  GroupElement() = default;

  static GroupElement identity(int dim, int level);

  /// Validating constructor; throws InputError if the scalar level is not 1 or,
  /// for N >= 2, if Sym(pi_2) deviates from pi_1 ⊗ pi_1 / 2 by more than the geometric tolerance.
  static GroupElement from_tensor(TruncatedTensor t);

  /// For values that are group elements by construction (products, inverses, signatures).
  static GroupElement trusted(TruncatedTensor t) noexcept { return GroupElement(std::move(t)); }

  const TruncatedTensor & tensor() const noexcept { return t_; }
  int dim() const noexcept { return t_.dim(); }
  int level() const noexcept { return t_.level(); }
  std::span<const double> operator[](int k) const noexcept { return t_[k]; }

  bool is_identity() const noexcept;

private:
  explicit GroupElement(TruncatedTensor t) noexcept : t_(std::move(t)) {}
  TruncatedTensor t_;
};

/// Element of the Lie side (scalar level 0), the domain of group_exp.
class LieElement
{
public:
  LieElement() = default;

  /// Throws InputError unless the scalar level is exactly 0.
  static LieElement from_tensor(TruncatedTensor t);

  /// Lie element supported on level 1.
  static LieElement from_vector(const Eigen::VectorXd & v, int level);

  const TruncatedTensor & tensor() const noexcept { return t_; }
  int dim() const noexcept { return t_.dim(); }
  int level() const noexcept { return t_.level(); }
  std::span<const double> operator[](int k) const noexcept { return t_[k]; }

private:
  explicit LieElement(TruncatedTensor t) noexcept : t_(std::move(t)) {}
  TruncatedTensor t_;
};

GroupElement operator*(const GroupElement & g, const GroupElement & h);

/// Inverse via the terminating Neumann series sum_{k<=N} (-(g - 1))^k.
GroupElement group_inverse(const GroupElement & g);

/// sum_{k<=N} l^k / k!
GroupElement group_exp(const LieElement & l);

/// sum_{k<=N} (-1)^{k+1} (g - 1)^k / k
LieElement group_log(const GroupElement & g);

/// exp(z1 - z0): signature of the straight segment from z0 to z1.
GroupElement signature_segment(const Eigen::VectorXd & z0, const Eigen::VectorXd & z1, int level);

/// Running signatures S_N(Z)_{0,t_m} of the piecewise-linear interpolation of `points`.
/// Element 0 is the identity. Throws InputError on empty input.
std::vector<GroupElement> signature_path(std::span<const Eigen::VectorXd> points, int level);

/// X_{s,t} = X_s^{-1} ⊗ X_t.
GroupElement increment(const GroupElement & xs, const GroupElement & xt);

/// sum_{k=1}^N |pi_k g|^{1/k}; stands in for the Carnot-Caratheodory norm.
double homogeneous_norm(const GroupElement & g) noexcept;
double homogeneous_norm(const TruncatedTensor & g) noexcept;

/// rho(g, h) = max_k |pi_k(g - h)|.
double rho_metric(const GroupElement & g, const GroupElement & h);

/// Dilation delta_lambda: level k scaled by lambda^k.
GroupElement dilate(const GroupElement & g, double lambda);

/// Projection onto T^M for M <= N.
GroupElement truncate(const GroupElement & g, int level);

struct GeometricCheck
{
  bool geometric = false;
  double violation = 0.0;
};

/**
 * Shuffle-relation check for N <= 3.
 *
 * Level 2: Sym(pi_2 g) == pi_1 g ⊗ pi_1 g / 2. Level 3: pi_3 log g must be a Lie
 * polynomial, tested through the Dynkin map (a degree-n tensor P is Lie iff
 * theta(P) = n P, theta sending words to left-normed brackets).
 * Throws InputError for N > 3.
 */
GeometricCheck check_geometric(const TruncatedTensor & g, double tolerance = kGeometricTolerance);
inline GeometricCheck check_geometric(const GroupElement & g, double tolerance = kGeometricTolerance)
{
  return check_geometric(g.tensor(), tolerance);
}

}  // namespace srp

#endif  // SRP_TENSOR_HPP_
