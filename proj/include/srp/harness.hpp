#ifndef SRP_HARNESS_HPP_
#define SRP_HARNESS_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "srp/controlled.hpp"
#include "srp/pathspace.hpp"
#include "srp/rde.hpp"

namespace srp {

enum class DriverKind { random_walk, smooth_trig };

/// Deterministic generator of level-1 driver samples on a dyadic grid.
struct DriverFamily
{
  DriverKind kind = DriverKind::random_walk;
  std::uint64_t seed = 0;
  int dim   = 2;
  int level = 2;
  int depth = 8;
  /// increments N(0,1) 2^{-K h} at the knots of depth K
  double roughness = 0.5;
  int knot_depth   = 6;
  /// trigonometric modes for the smooth family
  int modes = 3;
};

/// Smooth path x(t) = t v + sum_m a_m sin(2 pi m t + phi_m) / m, with x'(t).
class SmoothDriver
{
public:
  SmoothDriver(int dim, int modes, std::uint64_t seed);
  /// x(t) = t v
  static SmoothDriver linear(const Eigen::VectorXd & v);

  int dim() const noexcept { return dim_; }
  Eigen::VectorXd value(double t) const;
  Eigen::VectorXd derivative(double t) const;
  /// Adds eps sin(2 pi t) u.
  SmoothDriver perturbed(double eps, const Eigen::VectorXd & u) const;

private:
  int dim_;
  int modes_;
  Eigen::MatrixXd amp_;    // dim x modes
  Eigen::MatrixXd phase_;  // dim x modes
  Eigen::VectorXd drift_;
  double eps_ = 0.0;
  Eigen::VectorXd dir_;
};

/// Level-1 samples x(i 2^-J), i = 0..2^J.
std::vector<Eigen::VectorXd> sample_driver(const DriverFamily & family);
std::vector<Eigen::VectorXd> sample_smooth(const SmoothDriver & x, int depth);

/// Perturbation pair partner: x + eps sin(2 pi t) u on the same grid.
std::vector<Eigen::VectorXd> perturb_samples(const std::vector<Eigen::VectorXd> & x, double eps,
                                             const Eigen::VectorXd & u);

/// signature_path of the samples wrapped as a path of the given depth.
SampledRoughPath lift_smooth(const std::vector<Eigen::VectorXd> & samples, int level, SobolevParams params = {});

struct OracleSolution
{
  std::vector<Eigen::VectorXd> y;  // on the depth-J grid
  double error_estimate = 0.0;     // Richardson |y_r - y_{r/2}| / 15, max over nodes
};

/// Classical RK4 for y' = V(y) x'(t) with 2^depth * refinement steps.
OracleSolution ode_oracle(const Eigen::VectorXd & y0, const PolyVectorField & v, const SmoothDriver & x, int depth,
                          int refinement);

/// Random polynomial vector field R^e -> L(R^d, R^e) of total degree <= degree.
PolyVectorField random_field(int e, int d, int degree, double scale, std::uint64_t seed, Ball ball);

struct Interval
{
  double lo = 0.0;
  double hi = 0.0;
};

struct EquivalenceConfig
{
  int paths = 200;
  std::vector<int> depths{8, 10};
  std::vector<SobolevParams> params{{0.4, 4.0}};
  int dim = 2;
  int level = 2;
  double roughness = 0.5;
  int knot_depth   = 6;
  std::uint64_t seed = 1;
};

struct EquivalenceReport
{
  struct Row
  {
    std::string family;
    std::uint64_t seed = 0;
    SobolevParams params;
    std::vector<double> ratios;  // one per depth
  };
  std::vector<Row> rows;
  Interval ratio;                 // over all rows and depths
  double max_relative_change = 0;  // between consecutive depths
  double linear_ratio = 0;         // linear path at the largest depth
  double linear_closed_form = 0;
};

EquivalenceReport equivalence_study(const EquivalenceConfig & config);

struct EmbeddingConfig
{
  int paths = 200;  // even seeds calibrate, odd seeds are held out
  int depth = 6;
  SobolevParams params{0.4, 4.0};
  int dim = 2;
  int level = 2;
  double roughness = 0.5;
  int knot_depth   = 6;
  std::uint64_t seed = 1;
};

struct FitReport
{
  double constant = 0.0;      // frozen constant
  double calibration_max = 0.0;
  double safety = 1.0;
  int calibration_samples = 0;
  int heldout_samples = 0;
  int heldout_violations = 0;
  double heldout_max = 0.0;
};

/// qvar(1/alpha)^{1/alpha} <= K ||X||_{W;[s,t]}^{1/alpha} |t - s|^{1 - 1/(alpha p)} on every dyadic interval.
FitReport embedding_study(const EmbeddingConfig & config);

struct AprioriConfig
{
  int paths = 200;
  int depth = 8;
  SobolevParams params{0.4, 4.0};
  int dim = 2;
  int state_dim = 2;
  double roughness = 0.5;
  int knot_depth   = 6;
  double field_scale = 0.5;
  Ball ball{Eigen::VectorXd::Zero(2), 3.0};
  std::uint64_t seed = 1;
};

struct AprioriReport
{
  FitReport fit;
  double gamma = 0.0;
  int inside_ball = 0;  // trajectories that never left the ball
  int total = 0;
};

/// ||Y||_W <= C f(M) (L ||X||_W + (L ||X||_W)^gamma), f(M) = max(1, M^{[1/alpha]}).
AprioriReport apriori_study(const AprioriConfig & config);

struct ConvergenceConfig
{
  std::vector<int> levels{1, 2};
  int min_depth = 4;
  int max_depth = 10;
  int lift_depth = 14;
  int refinement = 16;
  int dim = 2;
  int modes = 3;
  std::uint64_t seed = 1;
  /// "linear" (V_i y = A_i y), "scalar-exp" (d = e = 1, x_t = t, V(y) = y) or "constant"
  std::string field = "linear";
};

struct ConvergenceReport
{
  struct Row
  {
    int level = 0;
    std::vector<int> depths;
    std::vector<double> errors;
    double order = 0.0;  // +inf when all errors vanish
    bool monotone = true;
  };
  std::vector<Row> rows;
  double oracle_error = 0.0;
};

ConvergenceReport convergence_study(const ConvergenceConfig & config);

enum class Channel { initial, field, driver, mixed };
const char * channel_name(Channel c);

struct SweepConfig
{
  int seeds = 16;
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  int depth = 8;
  SobolevParams params{0.4, 4.0};
  int dim = 2;
  int state_dim = 2;
  double roughness = 0.5;
  int knot_depth   = 6;
  double field_scale = 0.5;
  int field_degree = 2;
  Ball ball{Eigen::VectorXd::Zero(2), 3.0};
  std::uint64_t seed = 1;
  bool check_controls = true;
};

struct SweepRecord
{
  Channel channel = Channel::initial;
  std::uint64_t seed = 0;
  double eps = 0.0;
  std::vector<double> rho_hat;  // per level
  double rho_hat_total = 0.0;
  double rho_tilde = 0.0;
  double initial_gap = 0.0;
  double field_gap = 0.0;
  double solution_gap = 0.0;
  double distance = 0.0;
  double ratio = 0.0;
  bool skipped = false;
  bool inside_ball = true;
  std::string error;  // solver failure, empty on success
};

struct ControlCheckRecord
{
  std::uint64_t seed = 0;
  double eps = 0.0;
  ControlCheck omega;
  int intervals = 0;
  int omega_prime_violations = 0;  // dyadic intervals with omega' > omega
  double worst_excess = 0.0;       // max (omega' - omega) / omega
};

struct SweepSummary
{
  Channel channel = Channel::initial;
  double eps = 0.0;
  double max_ratio = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  int count = 0;
  int failures = 0;
};

struct SweepReport
{
  std::vector<SweepRecord> records;
  std::vector<SweepSummary> summaries;
  std::vector<ControlCheckRecord> controls;
  // fixed rows
  SweepRecord identical;
  SweepRecord zero_field;
  SweepRecord constant_field;
  double gamma = 0.0;
  /// per channel: max ratio at the smallest eps / max ratio at the largest eps
  std::vector<std::pair<Channel, double>> growth;
};

SweepReport lipschitz_sweep(const SweepConfig & config);

/// Controls omega (variation based) and omega' (increment based) for a driver pair on every dyadic interval.
ControlCheckRecord check_controls(const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, double p);

struct StabilityConfig
{
  int seeds = 8;
  std::vector<double> eps{1e-1, 1e-2, 1e-3};
  int depth = 7;
  SobolevParams params{0.4, 4.0};
  std::uint64_t seed = 1;
};

struct StabilityReport
{
  std::string operation;  // "integration" or "composition"
  std::vector<double> eps;
  std::vector<double> max_ratio;  // per eps
  double constant = 0.0;          // max over all
};

/// Remainder-difference norms of integrals (or compositions) against the input distance sum.
StabilityReport stability_study(const StabilityConfig & config, bool composition);

/// Empirical quantile (linear interpolation, q in [0,1]) of a non-empty sample.
double quantile(std::vector<double> values, double q);

}  // namespace srp

#endif  // SRP_HARNESS_HPP_
