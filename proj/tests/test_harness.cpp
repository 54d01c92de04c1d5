#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "support.hpp"
#include "srp/errors.hpp"
#include "srp/harness.hpp"

using namespace srp;
using srp::testing::Gen;

namespace {

PolyVectorField scalar_linear() { return PolyVectorField::linear({Eigen::MatrixXd::Identity(1, 1)}); }

double closed_integral(double a, double p)
{
  return std::pow(2.0 / (p * (1 - a) * (p * (1 - a) + 1)), 1.0 / p);
}

}  // namespace

TEST_CASE("smooth driver")
{
  const SmoothDriver x(2, 3, 7);
  // derivative against central differences
  for (double t : {0.0, 0.13, 0.5, 0.91}) {
    const double h             = 1e-6;
    const Eigen::VectorXd diff = (x.value(t + h) - x.value(t - h)) / (2 * h);
    CHECK((diff - x.derivative(t)).norm() < 1e-6);
  }
  const auto lin = SmoothDriver::linear(Eigen::Vector2d(1.0, -2.0));
  CHECK(lin.value(0.25) == Eigen::Vector2d(0.25, -0.5));
  const auto bent = lin.perturbed(0.1, Eigen::Vector2d(1.0, 0.0));
  CHECK(bent.value(0.25)[0] == doctest::Approx(0.35).epsilon(1e-15));
  CHECK(bent.value(0.5)[0] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("ode oracle")
{
  SUBCASE("zero field keeps the initial value")
  {
    const auto sol = ode_oracle(Eigen::Vector2d(1, 2), PolyVectorField::zero(2, 2), SmoothDriver(2, 3, 1), 4, 8);
    for (const auto & y : sol.y) CHECK(y == Eigen::Vector2d(1, 2));
    CHECK(sol.error_estimate == 0.0);
  }
  SUBCASE("exponential at refinement 64")
  {
    const auto x   = SmoothDriver::linear(Eigen::VectorXd::Ones(1));
    const auto sol = ode_oracle(Eigen::VectorXd::Ones(1), scalar_linear(), x, 4, 64);
    REQUIRE(sol.y.size() == 17);
    for (std::size_t i = 0; i < sol.y.size(); ++i) {
      CHECK(std::abs(sol.y[i][0] - std::exp(static_cast<double>(i) / 16)) < 1e-10);
    }
  }
  SUBCASE("fourth order")
  {
    const auto x  = SmoothDriver::linear(Eigen::VectorXd::Ones(1));
    const auto e1 = std::abs(ode_oracle(Eigen::VectorXd::Ones(1), scalar_linear(), x, 0, 8).y.back()[0] - std::numbers::e);
    const auto e2 = std::abs(ode_oracle(Eigen::VectorXd::Ones(1), scalar_linear(), x, 0, 16).y.back()[0] - std::numbers::e);
    CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.05));
  }
  SUBCASE("blow-up")
  {
    const PolyVectorField v(SmoothMap(1, 1, 1, {{0, 0, 1.0, {2}}}));
    const auto x = SmoothDriver::linear(Eigen::VectorXd::Constant(1, 1e3));
    CHECK_THROWS_AS(ode_oracle(Eigen::VectorXd::Constant(1, 1e100), v, x, 2, 4), NumericError);
  }
  CHECK_THROWS_AS(ode_oracle(Eigen::VectorXd::Ones(2), scalar_linear(), SmoothDriver(1, 1, 1), 2, 2), InputError);
}

TEST_CASE("driver families")
{
  DriverFamily f;
  f.seed = 11;
  const auto a = sample_driver(f);
  CHECK(a == sample_driver(f));
  REQUIRE(a.size() == 257);

  SUBCASE("the walk is the same polyline at every depth")
  {
    f.depth      = 10;
    const auto b = sample_driver(f);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - b[4 * i]).norm() < 1e-15);
    f.depth      = 4;
    const auto c = sample_driver(f);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(c[i] == a[16 * i]);
  }
  SUBCASE("lifts are geometric")
  {
    for (auto kind : {DriverKind::random_walk, DriverKind::smooth_trig}) {
      f.kind       = kind;
      f.level      = 3;
      const auto x = lift_smooth(sample_driver(f), 3);
      for (std::size_t i = 0; i < x.size(); i += 17) CHECK(check_geometric(x[i]).geometric);
    }
  }
  SUBCASE("constant samples lift to the identity")
  {
    const auto x = lift_smooth(std::vector<Eigen::VectorXd>(9, Eigen::Vector2d(3, 4)), 2);
    for (const auto & n : x.nodes()) CHECK(n.is_identity());
  }
  SUBCASE("linear samples lift to exponentials")
  {
    const Eigen::Vector2d v(0.7, -1.1);
    const auto x = lift_smooth(sample_smooth(SmoothDriver::linear(v), 3), 3);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto g = group_exp(LieElement::from_vector(x.time(i) * v, 3));
      CHECK(testing::max_diff(x[i].tensor(), g.tensor()) < 1e-14);
    }
  }
  SUBCASE("perturbation vanishes at the ends")
  {
    const auto p = perturb_samples(a, 0.1, Eigen::Vector2d(1, 0));
    CHECK((p.front() - a.front()).norm() < 1e-17);
    CHECK((p.back() - a.back()).norm() < 1e-15);
    CHECK((p[64] - a[64])[0] == doctest::Approx(0.1).epsilon(1e-15));
  }
  f.kind      = DriverKind::random_walk;
  f.roughness = 1.0;
  CHECK_THROWS_AS(sample_driver(f), InputError);
  CHECK_THROWS_AS(lift_smooth(std::vector<Eigen::VectorXd>(6, Eigen::Vector2d(0, 0)), 2), InputError);
}

TEST_CASE("random fields")
{
  const auto v = random_field(2, 3, 2, 0.5, 4, Ball{Eigen::Vector2d::Zero(), 2.0});
  CHECK(v.state_dim() == 2);
  CHECK(v.driver_dim() == 3);
  CHECK(v.map().self_test(1) < 1e-6);
  const auto w = random_field(2, 3, 2, 0.5, 4, Ball{Eigen::Vector2d::Zero(), 2.0});
  CHECK(v.lip(2.0) == w.lip(2.0));
  CHECK(random_field(2, 3, 0, 1.0, 4, Ball{}).lip(2.0) > 0.0);
  CHECK_THROWS_AS(random_field(2, 2, 4, 1.0, 1, Ball{}), InputError);
}

TEST_CASE("quantile")
{
  CHECK(quantile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(quantile({0.0, 10.0}, 0.9) == doctest::Approx(9.0));
  CHECK(quantile({5.0}, 0.3) == 5.0);
  CHECK_THROWS_AS(quantile({}, 0.5), InputError);
}

TEST_CASE("equivalence study")
{
  EquivalenceConfig c;
  c.paths  = 6;
  c.depths = {6, 8};
  const auto rep = equivalence_study(c);
  CHECK(rep.rows.size() == 6);
  CHECK(rep.ratio.lo > 0.0);
  CHECK(rep.ratio.hi / rep.ratio.lo < 20.0);
  CHECK(rep.linear_closed_form == doctest::Approx(0.6676).epsilon(1e-3));
  CHECK(rep.linear_ratio == doctest::Approx(rep.linear_closed_form).epsilon(0.01));
  CHECK(equivalence_study(c).ratio.hi == rep.ratio.hi);
}

TEST_CASE("embedding study")
{
  SUBCASE("linear path closed form")
  {
    const double a = 0.4;
    const double p = 4.0;
    const auto x   = lift_smooth(sample_smooth(SmoothDriver::linear(Eigen::VectorXd::Ones(1)), 10), 2);
    for (int j : {0, 1, 2}) {
      const std::size_t len = std::size_t{1} << (10 - j);
      const GridWindow w{0, len};
      const double t   = static_cast<double>(len) * x.step();
      const double lhs = std::pow(qvar_norm(x, 1 / a, w), 1 / a);
      // level-2 lift of t: |pi_1| + |pi_2|^{1/2} = (1 + 2^{-1/2}) t
      CHECK(lhs == doctest::Approx(std::pow((1 + std::sqrt(0.5)) * t, 1 / a)).epsilon(1e-12));
      const double rhs = std::pow(sobolev_norm_integral(x, a, p, w), 1 / a) * std::pow(t, 1 - 1 / (a * p));
      CHECK(lhs / rhs == doctest::Approx(std::pow(closed_integral(a, p), -1 / a)).epsilon(0.02));
    }
  }
  EmbeddingConfig c;
  c.paths        = 10;
  c.depth        = 5;
  const auto fit = embedding_study(c);
  CHECK(fit.safety == 1.25);
  CHECK(fit.constant == fit.calibration_max * 1.25);
  CHECK(fit.calibration_samples == 5 * 63);
  CHECK(fit.heldout_samples == 5 * 63);
  CHECK(fit.heldout_violations == 0);
}

TEST_CASE("a priori bound study")
{
  AprioriConfig c;
  c.paths        = 6;
  c.depth        = 6;
  const auto rep = apriori_study(c);
  CHECK(rep.total == 6);
  CHECK(rep.gamma == doctest::Approx(2.99));
  CHECK(rep.fit.calibration_samples == 3);
  CHECK(rep.fit.constant > 0.0);
  CHECK(std::isfinite(rep.fit.heldout_max));
}

TEST_CASE("convergence study")
{
  ConvergenceConfig c;
  SUBCASE("constant field is exact")
  {
    c.field        = "constant";
    const auto rep = convergence_study(c);
    for (const auto & row : rep.rows) {
      for (double e : row.errors) CHECK(e == 0.0);
      CHECK(std::isinf(row.order));
    }
  }
  SUBCASE("second level beats the first")
  {
    for (const char * field : {"linear", "scalar-exp"}) {
      c.field        = field;
      const auto rep = convergence_study(c);
      REQUIRE(rep.rows.size() == 2);
      CHECK(rep.rows[0].order == doctest::Approx(1.0).epsilon(0.1));
      CHECK(rep.rows[1].order >= 1.9);
      CHECK(rep.rows[1].order > rep.rows[0].order);
      CHECK(rep.rows[1].monotone);
      CHECK(rep.oracle_error < 1e-10);
    }
  }
  c.field = "cubic";
  CHECK_THROWS_AS(convergence_study(c), InputError);
}

TEST_CASE("lipschitz sweep")
{
  SweepConfig c;
  c.seeds        = 2;
  c.depth        = 6;
  const auto rep = lipschitz_sweep(c);
  CHECK(rep.records.size() == 2 * 3 * 4);
  CHECK(rep.summaries.size() == 12);
  CHECK(rep.controls.size() == 6);
  for (const auto & r : rep.records) {
    CHECK(r.error.empty());
    CHECK(std::isfinite(r.ratio));
    CHECK(r.ratio > 0.0);
  }
  CHECK(rep.identical.skipped);
  CHECK(rep.identical.solution_gap == 0.0);
  CHECK(rep.identical.distance == 0.0);
  CHECK(rep.zero_field.ratio == 1.0);
  CHECK(std::abs(rep.constant_field.ratio - 1.0) < 1e-12);
  for (const auto & cc : rep.controls) CHECK(cc.omega.superadditive);

  const auto again = lipschitz_sweep(c);
  REQUIRE(again.records.size() == rep.records.size());
  for (std::size_t i = 0; i < rep.records.size(); ++i) CHECK(again.records[i].ratio == rep.records[i].ratio);
}

TEST_CASE("control functions")
{
  Gen g(9);
  const double a = 0.4;
  const auto x1  = testing::lift(g.walk(2, 5), 2, {a, 4.0});
  std::vector<Eigen::VectorXd> pts2 = x1.level1();
  for (auto & v : pts2) v += g.vector(2, 0.05);
  pts2.front().setZero();
  const auto x2  = testing::lift(pts2, 2, {a, 4.0});
  const auto rec = check_controls(x1, x2, a, 4.0);
  CHECK(rec.intervals == 63);
  CHECK(rec.omega.superadditive);
  CHECK(rec.omega_prime_violations <= rec.intervals);

  // termwise parts of omega' <= omega that follow from the definitions
  for (int j = 0; j <= 5; ++j) {
    const std::size_t len = std::size_t{1} << (5 - j);
    for (std::size_t i = 0; i < (std::size_t{1} << j); ++i) {
      const GridWindow w{i * len, (i + 1) * len};
      const auto inc1 = x1.increment(w.first, w.last);
      const auto inc2 = x2.increment(w.first, w.last);
      CHECK(homogeneous_norm(inc1) <= qvar_norm(x1, 1 / a, w) * (1 + 1e-12));
      const auto var = inhom_qvar_dist(x1, x2, a, w);
      for (int k = 1; k <= 2; ++k) {
        CHECK(level_norm(inc1.tensor() - inc2.tensor(), k) <= var[k - 1] * (1 + 1e-12));
      }
    }
  }
  const auto same = check_controls(x1, x1, a, 4.0);
  CHECK(same.omega.superadditive);
  CHECK(same.omega_prime_violations == 0);
}

TEST_CASE("stability of integration and composition")
{
  StabilityConfig c;
  c.seeds = 2;
  c.depth = 6;
  for (bool comp : {false, true}) {
    const auto rep = stability_study(c, comp);
    CHECK(rep.operation == (comp ? "composition" : "integration"));
    REQUIRE(rep.max_ratio.size() == 3);
    for (double r : rep.max_ratio) {
      CHECK(std::isfinite(r));
      CHECK(r > 0.0);
    }
    CHECK(rep.max_ratio.back() <= 2 * rep.max_ratio.front());
  }
}
