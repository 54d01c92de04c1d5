#include "srp/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <string>

#include "srp/errors.hpp"

namespace srp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Safety factor applied to calibration maxima before freezing a fitted constant.
constexpr double kFitSafety = 1.25;

Eigen::VectorXd unit_vector(std::mt19937_64 & rng, int dim)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(dim);
  do {
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
  } while (u.norm() < 1e-3);
  return u / u.norm();
}

std::vector<std::vector<int>> exponents_up_to(int vars, int degree)
{
  std::vector<std::vector<int>> out;
  std::vector<int> e(static_cast<std::size_t>(vars), 0);
  // odometer over [0, degree]^vars, keeping total degree <= degree
  while (true) {
    int total = 0;
    for (int k : e) total += k;
    if (total <= degree) out.push_back(e);
    int i = 0;
    while (i < vars && e[static_cast<std::size_t>(i)] == degree) e[static_cast<std::size_t>(i++)] = 0;
    if (i == vars) break;
    ++e[static_cast<std::size_t>(i)];
  }
  std::stable_sort(out.begin(), out.end(), [](const auto & a, const auto & b) {
    int sa = 0, sb = 0;
    for (int k : a) sa += k;
    for (int k : b) sb += k;
    return sa < sb;
  });
  return out;
}

double dyadic_seminorm(const std::vector<Eigen::VectorXd> & y, double alpha, double p)
{
  return sobolev_norm_dyadic(std::span<const Eigen::VectorXd>(y), alpha, p).value;
}

std::vector<Eigen::VectorXd> difference(const std::vector<Eigen::VectorXd> & a, const std::vector<Eigen::VectorXd> & b)
{
  std::vector<Eigen::VectorXd> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] - b[i]);
  return out;
}

bool inside(const std::vector<Eigen::VectorXd> & y, const Ball & ball)
{
  for (const auto & v : y) {
    if ((v - ball.center).norm() > ball.radius) return false;
  }
  return true;
}

double certified_gamma(const SobolevParams & params) { return params.step() + 1.0 - 0.01; }

FitReport freeze(const std::vector<double> & calibration, const std::vector<double> & heldout)
{
  FitReport fit;
  fit.safety              = kFitSafety;
  fit.calibration_samples = static_cast<int>(calibration.size());
  fit.heldout_samples     = static_cast<int>(heldout.size());
  for (double r : calibration) fit.calibration_max = std::max(fit.calibration_max, r);
  fit.constant = fit.calibration_max * fit.safety;
  for (double r : heldout) {
    fit.heldout_max = std::max(fit.heldout_max, r);
    if (r > fit.constant) ++fit.heldout_violations;
  }
  return fit;
}

SmoothMap combine(const SmoothMap & a, const SmoothMap & b, double s)
{
  auto terms = a.to_terms();
  for (auto t : b.to_terms()) {
    t.coef *= s;
    terms.push_back(t);
  }
  return SmoothMap(a.in_dim(), a.rows(), a.cols(), terms);
}

}  // namespace

SmoothDriver::SmoothDriver(int dim, int modes, std::uint64_t seed)
    : dim_(dim), modes_(modes), amp_(dim, modes), phase_(dim, modes), drift_(Eigen::VectorXd::Zero(dim)),
      dir_(Eigen::VectorXd::Zero(dim))
{
  if (dim < 1 || modes < 0) throw InputError("SmoothDriver: dim must be positive and modes non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  for (int i = 0; i < dim; ++i) {
    for (int m = 0; m < modes; ++m) {
      amp_(i, m)   = normal(rng);
      phase_(i, m) = uniform(rng);
    }
  }
}

SmoothDriver SmoothDriver::linear(const Eigen::VectorXd & v)
{
  SmoothDriver x(static_cast<int>(v.size()), 0, 0);
  x.drift_ = v;
  return x;
}

Eigen::VectorXd SmoothDriver::value(double t) const
{
  Eigen::VectorXd out = t * drift_ + eps_ * std::sin(kTwoPi * t) * dir_;
  for (int m = 0; m < modes_; ++m) {
    const double k = m + 1.0;
    for (int i = 0; i < dim_; ++i) out[i] += amp_(i, m) * std::sin(kTwoPi * k * t + phase_(i, m)) / k;
  }
  return out;
}

Eigen::VectorXd SmoothDriver::derivative(double t) const
{
  Eigen::VectorXd out = drift_ + eps_ * kTwoPi * std::cos(kTwoPi * t) * dir_;
  for (int m = 0; m < modes_; ++m) {
    const double k = m + 1.0;
    for (int i = 0; i < dim_; ++i) out[i] += amp_(i, m) * kTwoPi * std::cos(kTwoPi * k * t + phase_(i, m));
  }
  return out;
}

SmoothDriver SmoothDriver::perturbed(double eps, const Eigen::VectorXd & u) const
{
  if (u.size() != dim_) throw InputError("SmoothDriver::perturbed: direction has the wrong dimension");
  SmoothDriver out = *this;
  out.dir_         = eps_ * dir_ + eps * u;
  out.eps_         = 1.0;
  return out;
}

std::vector<Eigen::VectorXd> sample_smooth(const SmoothDriver & x, int depth)
{
  const std::size_t n = std::size_t{1} << depth;
  std::vector<Eigen::VectorXd> out;
  out.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out.push_back(x.value(static_cast<double>(i) * pow2(-depth)));
  return out;
}

std::vector<Eigen::VectorXd> sample_driver(const DriverFamily & f)
{
  if (f.depth < 0 || f.depth > 20 || f.dim < 1) throw InputError("DriverFamily: bad depth or dimension");
  if (f.kind == DriverKind::smooth_trig) return sample_smooth(SmoothDriver(f.dim, f.modes, f.seed), f.depth);

  if (!(f.roughness > 0.0 && f.roughness < 1.0)) throw InputError("DriverFamily: roughness must lie in (0, 1)");
  const int k = std::max(0, f.knot_depth);
  std::mt19937_64 rng(f.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = std::pow(2.0, -k * f.roughness);
  std::vector<Eigen::VectorXd> knots{Eigen::VectorXd::Zero(f.dim)};
  for (std::size_t m = 0; m < (std::size_t{1} << k); ++m) {
    Eigen::VectorXd step(f.dim);
    for (int i = 0; i < f.dim; ++i) step[i] = scale * normal(rng);
    knots.push_back(knots.back() + step);
  }
  std::vector<Eigen::VectorXd> out;
  const std::size_t n = std::size_t{1} << f.depth;
  out.reserve(n + 1);
  if (f.depth <= k) {
    const std::size_t stride = std::size_t{1} << (k - f.depth);
    for (std::size_t i = 0; i <= n; ++i) out.push_back(knots[i * stride]);
    return out;
  }
  const std::size_t per = std::size_t{1} << (f.depth - k);
  for (std::size_t i = 0; i <= n; ++i) {
    const std::size_t m = std::min(i / per, knots.size() - 2);
    const double frac   = static_cast<double>(i - m * per) / static_cast<double>(per);
    out.push_back(frac == 0.0 ? knots[m] : Eigen::VectorXd(knots[m] + frac * (knots[m + 1] - knots[m])));
  }
  return out;
}

std::vector<Eigen::VectorXd> perturb_samples(const std::vector<Eigen::VectorXd> & x, double eps,
                                             const Eigen::VectorXd & u)
{
  const double n = static_cast<double>(x.size() - 1);
  std::vector<Eigen::VectorXd> out;
  out.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.push_back(x[i] + eps * std::sin(kTwoPi * static_cast<double>(i) / n) * u);
  }
  return out;
}

SampledRoughPath lift_smooth(const std::vector<Eigen::VectorXd> & samples, int level, SobolevParams params)
{
  int depth = 0;
  while ((std::size_t{1} << depth) + 1 < samples.size()) ++depth;
  if ((std::size_t{1} << depth) + 1 != samples.size()) throw InputError("lift_smooth: expected 2^J + 1 samples");
  return SampledRoughPath(depth, signature_path(samples, level), params);
}

OracleSolution ode_oracle(const Eigen::VectorXd & y0, const PolyVectorField & v, const SmoothDriver & x, int depth,
                          int refinement)
{
  if (refinement < 1 || depth < 0) throw InputError("ode_oracle: refinement must be >= 1");
  if (v.driver_dim() != x.dim() || v.state_dim() != y0.size()) {
    throw InputError("ode_oracle: vector field, driver and initial value dimensions disagree");
  }
  auto run = [&](int r) {
    const std::size_t cells = std::size_t{1} << depth;
    const std::size_t steps = cells * static_cast<std::size_t>(r);
    const double h          = 1.0 / static_cast<double>(steps);
    auto f = [&](double t, const Eigen::VectorXd & y) -> Eigen::VectorXd { return v(y) * x.derivative(t); };
    std::vector<Eigen::VectorXd> out{y0};
    Eigen::VectorXd y = y0;
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = static_cast<double>(s) * h;
      const Eigen::VectorXd k1 = f(t, y);
      const Eigen::VectorXd k2 = f(t + h / 2, y + h / 2 * k1);
      const Eigen::VectorXd k3 = f(t + h / 2, y + h / 2 * k2);
      const Eigen::VectorXd k4 = f(t + h, y + h * k3);
      y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
      if (!y.allFinite()) throw NumericError("ode_oracle: state blew up at step " + std::to_string(s), s);
      if ((s + 1) % static_cast<std::size_t>(r) == 0) out.push_back(y);
    }
    return out;
  };
  OracleSolution sol;
  sol.y = run(refinement);
  if (refinement >= 2 && refinement % 2 == 0) {
    const auto coarse = run(refinement / 2);
    for (std::size_t i = 0; i < coarse.size(); ++i) {
      sol.error_estimate = std::max(sol.error_estimate, (sol.y[i] - coarse[i]).norm() / 15.0);
    }
  }
  return sol;
}

PolyVectorField random_field(int e, int d, int degree, double scale, std::uint64_t seed, Ball ball)
{
  if (degree < 0 || degree > 3) throw InputError("random_field: degree must lie in 0..3");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<SmoothMap::Term> terms;
  for (const auto & powers : exponents_up_to(e, degree)) {
    int total = 0;
    for (int k : powers) total += k;
    // higher-order terms are damped so that fields stay tame on the ball
    const double damp = total <= 1 ? 1.0 : std::pow(0.2, total - 1);
    for (int r = 0; r < e; ++r) {
      for (int c = 0; c < d; ++c) terms.push_back({r, c, scale * damp * normal(rng) / std::sqrt(e), powers});
    }
  }
  return PolyVectorField(SmoothMap(e, e, d, terms), std::move(ball));
}

double quantile(std::vector<double> values, double q)
{
  if (values.empty()) throw InputError("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo    = static_cast<std::size_t>(std::floor(pos));
  const auto hi    = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EquivalenceReport equivalence_study(const EquivalenceConfig & c)
{
  if (c.depths.empty() || c.params.empty() || c.paths < 1) throw InputError("equivalence_study: empty configuration");
  EquivalenceReport rep;
  rep.ratio = {INFINITY, 0.0};
  for (const auto & params : c.params) {
    validate_params(params);
    for (int i = 0; i < c.paths; ++i) {
      DriverFamily fam;
      fam.kind       = i % 2 == 0 ? DriverKind::random_walk : DriverKind::smooth_trig;
      fam.seed       = c.seed + static_cast<std::uint64_t>(i);
      fam.dim        = c.dim;
      fam.level      = c.level;
      fam.roughness  = c.roughness;
      fam.knot_depth = c.knot_depth;
      EquivalenceReport::Row row;
      row.family = fam.kind == DriverKind::random_walk ? "random_walk" : "smooth_trig";
      row.seed   = fam.seed;
      row.params = params;
      for (int depth : c.depths) {
        fam.depth           = depth;
        const auto x        = lift_smooth(sample_driver(fam), c.level, params);
        const double dyadic = sobolev_norm_dyadic(x, params.alpha, params.p).value;
        if (dyadic == 0.0) break;  // constant paths carry no ratio
        const double r = sobolev_norm_integral(x, params.alpha, params.p) / dyadic;
        row.ratios.push_back(r);
        rep.ratio.lo = std::min(rep.ratio.lo, r);
        rep.ratio.hi = std::max(rep.ratio.hi, r);
      }
      for (std::size_t k = 1; k < row.ratios.size(); ++k) {
        rep.max_relative_change =
          std::max(rep.max_relative_change, std::abs(row.ratios[k] - row.ratios[k - 1]) / row.ratios[k - 1]);
      }
      rep.rows.push_back(std::move(row));
    }
  }
  const auto & params = c.params.front();
  const int depth     = *std::max_element(c.depths.begin(), c.depths.end());
  const auto line     = lift_smooth(sample_smooth(SmoothDriver::linear(Eigen::VectorXd::Ones(1)), depth), 1, params);
  rep.linear_ratio    = sobolev_norm_integral(line, params.alpha, params.p)
                     / sobolev_norm_dyadic(line, params.alpha, params.p).value;
  const double a = params.alpha;
  const double p = params.p;
  const double integral = std::pow(2.0 / (p * (1 - a) * (p * (1 - a) + 1)), 1.0 / p);
  const double dyadic   = std::pow(1.0 / (1.0 - std::pow(2.0, -p * (1 - a))), 1.0 / p);
  rep.linear_closed_form = integral / dyadic;
  return rep;
}

FitReport embedding_study(const EmbeddingConfig & c)
{
  validate_params(c.params);
  const double a = c.params.alpha;
  const double p = c.params.p;
  std::vector<double> calibration;
  std::vector<double> heldout;
  for (int i = 0; i < c.paths; ++i) {
    DriverFamily fam;
    fam.seed       = c.seed + static_cast<std::uint64_t>(i);
    fam.dim        = c.dim;
    fam.level      = c.level;
    fam.depth      = c.depth;
    fam.roughness  = c.roughness;
    fam.knot_depth = c.knot_depth;
    const auto x   = lift_smooth(sample_driver(fam), c.level, c.params);
    auto & bucket  = i % 2 == 0 ? calibration : heldout;
    for (int j = 0; j <= c.depth; ++j) {
      const std::size_t stride = std::size_t{1} << (c.depth - j);
      for (std::size_t m = 0; m < (std::size_t{1} << j); ++m) {
        const GridWindow w{m * stride, (m + 1) * stride};
        const double lhs = std::pow(qvar_norm(x, 1.0 / a, w), 1.0 / a);
        const double rhs = std::pow(sobolev_norm_integral(x, a, p, w), 1.0 / a)
                           * std::pow(static_cast<double>(stride) * x.step(), 1.0 - 1.0 / (a * p));
        if (lhs == 0.0 && rhs == 0.0) continue;
        bucket.push_back(rhs == 0.0 ? INFINITY : lhs / rhs);
      }
    }
  }
  return freeze(calibration, heldout);
}

AprioriReport apriori_study(const AprioriConfig & c)
{
  validate_params(c.params);
  const int level    = c.params.step();
  const double gamma = certified_gamma(c.params);
  AprioriReport rep;
  rep.gamma = gamma;
  std::vector<double> calibration;
  std::vector<double> heldout;
  for (int i = 0; i < c.paths; ++i) {
    DriverFamily fam;
    fam.seed       = c.seed + static_cast<std::uint64_t>(i);
    fam.dim        = c.dim;
    fam.level      = level;
    fam.depth      = c.depth;
    fam.roughness  = c.roughness;
    fam.knot_depth = c.knot_depth;
    const auto x   = lift_smooth(sample_driver(fam), level, c.params);
    const auto v   = random_field(c.state_dim, c.dim, 2, c.field_scale, fam.seed ^ 0x9e3779b97f4a7c15ULL, c.ball);
    std::mt19937_64 rng(fam.seed);
    const Eigen::VectorXd y0 = 0.5 * unit_vector(rng, c.state_dim);
    const auto sol           = solve_euler(y0, v, x, c.depth);
    const double lhs         = dyadic_seminorm(sol.y, c.params.alpha, c.params.p);
    const double xn          = sobolev_norm_integral(x, c.params.alpha, c.params.p);
    const double m           = max_node_norm(x);
    const double fm          = std::max(1.0, std::pow(m, level));
    const double lx          = v.lip(gamma - 1.0) * xn;
    const double rhs         = fm * (lx + std::pow(lx, gamma));
    ++rep.total;
    if (inside(sol.y, c.ball)) ++rep.inside_ball;
    const double r = rhs == 0.0 ? (lhs == 0.0 ? 0.0 : INFINITY) : lhs / rhs;
    (i % 2 == 0 ? calibration : heldout).push_back(r);
  }
  rep.fit = freeze(calibration, heldout);
  return rep;
}

ConvergenceReport convergence_study(const ConvergenceConfig & c)
{
  if (c.levels.empty() || c.min_depth < 0 || c.max_depth < c.min_depth || c.lift_depth < c.max_depth) {
    throw InputError("convergence_study: need 0 <= min_depth <= max_depth <= lift_depth and some levels");
  }
  const int top = *std::max_element(c.levels.begin(), c.levels.end());
  std::unique_ptr<SmoothDriver> x;
  std::unique_ptr<PolyVectorField> v;
  Eigen::VectorXd y0;
  if (c.field == "scalar-exp") {
    x  = std::make_unique<SmoothDriver>(SmoothDriver::linear(Eigen::VectorXd::Ones(1)));
    v  = std::make_unique<PolyVectorField>(PolyVectorField::linear({Eigen::MatrixXd::Identity(1, 1)}));
    y0 = Eigen::VectorXd::Ones(1);
  } else if (c.field == "linear" || c.field == "constant") {
    x = std::make_unique<SmoothDriver>(c.dim, c.modes, c.seed);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    if (c.field == "linear") {
      std::vector<Eigen::MatrixXd> a;
      for (int i = 0; i < c.dim; ++i) {
        Eigen::MatrixXd m(2, 2);
        for (int r = 0; r < 4; ++r) m(r / 2, r % 2) = 0.5 * normal(rng);
        a.push_back(m);
      }
      v = std::make_unique<PolyVectorField>(PolyVectorField::linear(a));
    } else {
      Eigen::MatrixXd m(2, c.dim);
      for (int r = 0; r < 2 * c.dim; ++r) m(r / c.dim, r % c.dim) = normal(rng);
      v = std::make_unique<PolyVectorField>(PolyVectorField::constant(m));
    }
    y0 = Eigen::Vector2d(1.0, 0.5);
  } else {
    throw InputError("convergence_study: unknown field '" + c.field + "'");
  }

  ConvergenceReport rep;
  std::vector<Eigen::VectorXd> truth;
  const auto samples = sample_smooth(*x, c.lift_depth);
  if (c.field == "constant") {
    for (std::size_t i = 0; i < (std::size_t{1} << c.max_depth) + 1; ++i) {
      const std::size_t k = i << (c.lift_depth - c.max_depth);
      truth.push_back(y0 + (*v)(y0) * (samples[k] - samples[0]));
    }
  } else {
    const auto oracle = ode_oracle(y0, *v, *x, c.max_depth, c.refinement << (c.lift_depth - c.max_depth));
    truth             = oracle.y;
    rep.oracle_error  = oracle.error_estimate;
  }
  const auto lifted = lift_smooth(samples, top);
  for (int level : c.levels) {
    ConvergenceReport::Row row;
    row.level = level;
    std::vector<double> xs;
    for (int j = c.min_depth; j <= c.max_depth; ++j) {
      const auto sol = solve_euler(y0, *v, lifted, j, level);
      double err     = 0.0;
      for (std::size_t m = 0; m < sol.y.size(); ++m) {
        err = std::max(err, (sol.y[m] - truth[m << (c.max_depth - j)]).norm());
      }
      if (err <= 1e-13) err = 0.0;
      if (!row.errors.empty() && err > row.errors.back()) row.monotone = false;
      row.depths.push_back(j);
      row.errors.push_back(err);
      xs.push_back(j);
    }
    const double slope = fit_log2_slope(xs, row.errors);
    row.order          = std::isnan(slope) ? std::numeric_limits<double>::infinity() : -slope;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

const char * channel_name(Channel c)
{
  switch (c) {
    case Channel::initial: return "initial";
    case Channel::field: return "field";
    case Channel::driver: return "driver";
    case Channel::mixed: return "mixed";
  }
  return "unknown";
}

ControlCheckRecord check_controls(const SampledRoughPath & x1, const SampledRoughPath & x2, double alpha, double p)
{
  const int depth  = x1.depth();
  const int levels = distance_levels(x1, alpha);
  const auto hat   = inhom_sobolev_dist(x1, x2, alpha, p);
  const auto mixed = mixed_dist(x1, x2, alpha, p);
  auto ratio = [](double num, double den) { return den == 0.0 ? 0.0 : num / den; };

  // omega and omega' on every dyadic interval, keyed by (j, i)
  std::vector<std::vector<double>> omega(static_cast<std::size_t>(depth) + 1);
  ControlCheckRecord rec;
  TruncatedTensor i1(x1.dim(), x1.level());
  TruncatedTensor i2(x1.dim(), x1.level());
  for (int j = 0; j <= depth; ++j) {
    const std::size_t stride = std::size_t{1} << (depth - j);
    for (std::size_t i = 0; i < (std::size_t{1} << j); ++i) {
      const GridWindow w{i * stride, (i + 1) * stride};
      double om = std::pow(qvar_norm(x1, 1.0 / alpha, w), 1.0 / alpha)
                  + std::pow(qvar_norm(x2, 1.0 / alpha, w), 1.0 / alpha);
      const auto var = inhom_qvar_dist(x1, x2, alpha, w);
      for (int k = 1; k <= levels; ++k) {
        om += std::pow(ratio(var[k - 1], mixed.per_level[k - 1]), 1.0 / (alpha * k));
      }
      x1.increment_into(w.first, w.last, i1);
      x2.increment_into(w.first, w.last, i2);
      double omp = std::pow(homogeneous_norm(i1), 1.0 / alpha) + std::pow(homogeneous_norm(i2), 1.0 / alpha);
      for (int k = 1; k <= levels; ++k) {
        const double diff = level_norm(i1 - i2, k);
        omp += std::pow(ratio(diff, hat.per_level[k - 1]), 1.0 / (alpha * k));
      }
      omega[j].push_back(om);
      ++rec.intervals;
      if (omp > om * (1.0 + kControlTolerance)) {
        ++rec.omega_prime_violations;
        rec.worst_excess = std::max(rec.worst_excess, om == 0.0 ? INFINITY : (omp - om) / om);
      }
    }
  }
  const IntervalFunction f(depth, 1, [&omega, depth](std::size_t a, std::size_t b) {
    const std::size_t len = b - a;
    int j                 = depth;
    while ((std::size_t{1} << (depth - j)) < len) --j;
    return Eigen::VectorXd::Constant(1, omega[j][a / len]);
  });
  rec.omega = control_check(f);
  return rec;
}

namespace {

struct PairInput
{
  Eigen::VectorXd y0;
  const PolyVectorField * v;
  const SampledRoughPath * x;
};

SweepRecord compare(const PairInput & a, const PairInput & b, const SobolevParams & params, double gamma,
                    const Ball & ball)
{
  SweepRecord rec;
  const auto hat    = inhom_sobolev_dist(*a.x, *b.x, params.alpha, params.p);
  rec.rho_hat       = hat.per_level;
  rec.rho_hat_total = hat.total;
  rec.rho_tilde     = mixed_dist(*a.x, *b.x, params.alpha, params.p).total;
  rec.initial_gap   = (a.y0 - b.y0).norm();
  rec.field_gap     = (*a.v - *b.v).lip(gamma - 1.0);
  rec.distance      = rec.field_gap + rec.initial_gap + rec.rho_hat_total + rec.rho_tilde;
  try {
    const auto s1 = solve_euler(a.y0, *a.v, *a.x, a.x->depth());
    const auto s2 = solve_euler(b.y0, *b.v, *b.x, b.x->depth());
    const auto dy = difference(s1.y, s2.y);
    rec.solution_gap = dy.front().norm() + dyadic_seminorm(dy, params.alpha, params.p);
    rec.inside_ball  = inside(s1.y, ball) && inside(s2.y, ball);
  } catch (const NumericError & e) {
    rec.error = e.what();
    return rec;
  }
  if (rec.distance == 0.0) {
    rec.skipped = true;
  } else {
    rec.ratio = rec.solution_gap / rec.distance;
  }
  return rec;
}

}  // namespace

SweepReport lipschitz_sweep(const SweepConfig & c)
{
  validate_params(c.params);
  if (c.eps.empty() || c.seeds < 1) throw InputError("lipschitz_sweep: need at least one seed and one eps");
  const int level    = c.params.step();
  const double gamma = certified_gamma(c.params);
  SweepReport rep;
  rep.gamma = gamma;
  const Channel channels[] = {Channel::initial, Channel::field, Channel::driver, Channel::mixed};

  for (int s = 0; s < c.seeds; ++s) {
    const std::uint64_t seed = c.seed + static_cast<std::uint64_t>(s);
    DriverFamily fam;
    fam.seed         = seed;
    fam.dim          = c.dim;
    fam.level        = level;
    fam.depth        = c.depth;
    fam.roughness    = c.roughness;
    fam.knot_depth   = c.knot_depth;
    const auto xs    = sample_driver(fam);
    const auto x1    = lift_smooth(xs, level, c.params);
    const auto v1    = random_field(c.state_dim, c.dim, c.field_degree, c.field_scale, seed ^ 0x9e3779b97f4a7c15ULL, c.ball);
    const auto w_raw = random_field(c.state_dim, c.dim, c.field_degree, 1.0, seed ^ 0x5851f42d4c957f2dULL, c.ball);
    const double wl  = w_raw.lip(gamma - 1.0);
    std::mt19937_64 rng(seed);
    const Eigen::VectorXd y01 = 0.5 * unit_vector(rng, c.state_dim);
    const Eigen::VectorXd uy  = unit_vector(rng, c.state_dim);
    const Eigen::VectorXd ux  = unit_vector(rng, c.dim);

    for (double eps : c.eps) {
      const PolyVectorField v2(combine(v1.map(), w_raw.map(), eps / wl), c.ball);
      const auto x2 = lift_smooth(perturb_samples(xs, eps, ux), level, c.params);
      for (Channel ch : channels) {
        const bool dy = ch == Channel::initial || ch == Channel::mixed;
        const bool dv = ch == Channel::field || ch == Channel::mixed;
        const bool dx = ch == Channel::driver || ch == Channel::mixed;
        const PairInput a{y01, &v1, &x1};
        const PairInput b{dy ? Eigen::VectorXd(y01 + eps * uy) : y01, dv ? &v2 : &v1, dx ? &x2 : &x1};
        auto rec    = compare(a, b, c.params, gamma, c.ball);
        rec.channel = ch;
        rec.seed    = seed;
        rec.eps     = eps;
        rep.records.push_back(std::move(rec));
      }
      if (c.check_controls) {
        auto cc = check_controls(x1, x2, c.params.alpha, c.params.p);
        cc.seed = seed;
        cc.eps  = eps;
        rep.controls.push_back(cc);
      }
    }
  }

  for (Channel ch : channels) {
    double first_max = 0.0;
    double last_max  = 0.0;
    for (std::size_t k = 0; k < c.eps.size(); ++k) {
      SweepSummary sum;
      sum.channel = ch;
      sum.eps     = c.eps[k];
      std::vector<double> ratios;
      for (const auto & r : rep.records) {
        if (r.channel != ch || r.eps != c.eps[k]) continue;
        if (!r.error.empty()) {
          ++sum.failures;
          continue;
        }
        if (!r.skipped) ratios.push_back(r.ratio);
      }
      sum.count = static_cast<int>(ratios.size());
      if (!ratios.empty()) {
        sum.max_ratio = *std::max_element(ratios.begin(), ratios.end());
        sum.q50       = quantile(ratios, 0.5);
        sum.q90       = quantile(ratios, 0.9);
      }
      if (k == 0) first_max = sum.max_ratio;
      if (k + 1 == c.eps.size()) last_max = sum.max_ratio;
      rep.summaries.push_back(sum);
    }
    rep.growth.emplace_back(ch, first_max == 0.0 ? INFINITY : last_max / first_max);
  }

  // fixed rows on the first seed's driver
  DriverFamily fam;
  fam.seed       = c.seed;
  fam.dim        = c.dim;
  fam.level      = level;
  fam.depth      = c.depth;
  fam.roughness  = c.roughness;
  fam.knot_depth = c.knot_depth;
  const auto x   = lift_smooth(sample_driver(fam), level, c.params);
  const auto v   = random_field(c.state_dim, c.dim, c.field_degree, c.field_scale, c.seed ^ 0x9e3779b97f4a7c15ULL, c.ball);
  const Eigen::VectorXd y0 = Eigen::VectorXd::Constant(c.state_dim, 0.25);
  const Eigen::VectorXd y1 = Eigen::VectorXd::Constant(c.state_dim, 0.5);
  rep.identical            = compare({y0, &v, &x}, {y0, &v, &x}, c.params, gamma, c.ball);
  const auto zero          = PolyVectorField::zero(c.state_dim, c.dim);
  rep.zero_field           = compare({y0, &zero, &x}, {y1, &zero, &x}, c.params, gamma, c.ball);
  Eigen::MatrixXd cm       = Eigen::MatrixXd::Zero(c.state_dim, c.dim);
  for (int r = 0; r < c.state_dim; ++r) {
    for (int k = 0; k < c.dim; ++k) cm(r, k) = 0.5 * (r + 1) - 0.25 * k;
  }
  const auto constant    = PolyVectorField::constant(cm);
  rep.constant_field     = compare({y0, &constant, &x}, {y1, &constant, &x}, c.params, gamma, c.ball);
  rep.identical.channel  = Channel::mixed;
  rep.zero_field.channel = Channel::initial;
  rep.constant_field.channel = Channel::initial;
  return rep;
}

StabilityReport stability_study(const StabilityConfig & c, bool composition)
{
  validate_params(c.params);
  StabilityReport rep;
  rep.operation = composition ? "composition" : "integration";
  rep.eps       = c.eps;
  rep.max_ratio.assign(c.eps.size(), 0.0);
  const double a = c.params.alpha;
  const double p = c.params.p;
  // integrand map G: R^2 -> L(R^2, R), outer map F: R^2 -> R^2
  const SmoothMap g(2, 1, 2, {{0, 0, 1.0, {0, 1}}, {0, 1, -0.5, {1, 0}}, {0, 1, 0.3, {2, 0}}, {0, 0, 0.2, {1, 1}}});
  const SmoothMap h(2, 1, 2, {{0, 0, 1.0, {1, 0}}, {0, 1, 1.0, {0, 2}}});
  const SmoothMap f(2, 2, 1, {{0, 0, 1.0, {1, 1}}, {1, 0, 1.0, {0, 0}}, {1, 0, -0.5, {2, 0}}, {0, 0, 0.7, {0, 1}}});
  auto remainder_size = [&](const IntervalFunction & r) {
    return remainder_norm_tildeV(r, a, p) + remainder_norm_hatW(r, a, p);
  };
  for (int s = 0; s < c.seeds; ++s) {
    DriverFamily fam;
    fam.seed       = c.seed + static_cast<std::uint64_t>(s);
    fam.depth      = c.depth;
    fam.knot_depth = std::min(c.depth, 6);
    const auto xs  = sample_driver(fam);
    std::mt19937_64 rng(fam.seed);
    const Eigen::VectorXd u = unit_vector(rng, 2);
    auto controlled_of = [&](const std::vector<Eigen::VectorXd> & pts, const SmoothMap & map) {
      auto x = std::make_shared<const SampledRoughPath>(lift_smooth(pts, 2, c.params));
      const ControlledPath base(x, x->level1(),
                                std::vector<Eigen::MatrixXd>(pts.size(), Eigen::MatrixXd::Identity(2, 2)));
      return compose_smooth(map, base);
    };
    for (std::size_t k = 0; k < c.eps.size(); ++k) {
      const double eps = c.eps[k];
      const auto xs2   = perturb_samples(xs, eps, u);
      // integration: Y = G(x); composition: Y = (G(x), H(x)) stacked as R^2 path
      ControlledPath y1 = controlled_of(xs, g);
      ControlledPath y2 = controlled_of(xs2, combine(g, h, eps));
      if (composition) {
        auto stack = [&](const std::vector<Eigen::VectorXd> & pts, double e) {
          const SmoothMap m(2, 2, 1, {{0, 0, 1.0, {0, 1}}, {1, 0, 1.0, {1, 0}}, {0, 0, e, {1, 0}}, {1, 0, -0.4, {1, 1}}});
          return controlled_of(pts, m);
        };
        y1 = stack(xs, 0.0);
        y2 = stack(xs2, eps);
      }
      const auto r1 = remainder(y1);
      const auto r2 = remainder(y2);
      double right  = inhom_sobolev_dist(y1.driver(), y2.driver(), a, p).total
                     + mixed_dist(y1.driver(), y2.driver(), a, p).total + (y1.y()[0] - y2.y()[0]).norm()
                     + (y1.yprime()[0] - y2.yprime()[0]).norm() + remainder_size(r1 - r2);
      std::vector<Eigen::VectorXd> dp;
      for (std::size_t i = 0; i < y1.size(); ++i) {
        const Eigen::MatrixXd m = y1.yprime()[i] - y2.yprime()[i];
        dp.push_back(Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()));
      }
      right += dyadic_seminorm(dp, a, p);
      double left = 0.0;
      if (composition) {
        left = remainder_size(remainder(compose_smooth(f, y1)) - remainder(compose_smooth(f, y2)));
      } else {
        left = remainder_size(remainder(rough_integral(y1).path) - remainder(rough_integral(y2).path));
      }
      if (right > 0.0) rep.max_ratio[k] = std::max(rep.max_ratio[k], left / right);
    }
  }
  for (double r : rep.max_ratio) rep.constant = std::max(rep.constant, r);
  return rep;
}

}  // namespace srp
