#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <numbers>

#include "support.hpp"
#include "srp/errors.hpp"
#include "srp/rde.hpp"

using namespace srp;
using srp::testing::Gen;
using srp::testing::lift;
using srp::testing::scalar_points;

namespace {

std::shared_ptr<const SampledRoughPath> linear_driver(int depth, int level = 2)
{
  std::vector<double> xs;
  for (std::size_t i = 0; i <= (std::size_t{1} << depth); ++i) xs.push_back(static_cast<double>(i) * pow2(-depth));
  return std::make_shared<const SampledRoughPath>(lift(scalar_points(xs), level));
}

PolyVectorField scalar_linear() { return PolyVectorField::linear({Eigen::MatrixXd::Identity(1, 1)}); }

Eigen::VectorXd s1(double v) { return Eigen::VectorXd::Constant(1, v); }

// V_1(y) = (-y2, y1), V_2(y) = (y1 y2, 1): non-commuting, nonlinear
PolyVectorField rotation_field()
{
  return PolyVectorField(SmoothMap(2, 2, 2,
    {{0, 0, -1.0, {0, 1}}, {1, 0, 1.0, {1, 0}}, {0, 1, 1.0, {1, 1}}, {1, 1, 1.0, {0, 0}}}));
}

}  // namespace

TEST_CASE("vector field construction")
{
  CHECK_THROWS_AS(PolyVectorField(SmoothMap(2, 3, 1, std::vector<SmoothMap::Term>{})), InputError);
  const auto v = rotation_field();
  CHECK(v.state_dim() == 2);
  CHECK(v.driver_dim() == 2);
  const Eigen::MatrixXd at = v(Eigen::Vector2d(2.0, 3.0));
  CHECK(at(0, 0) == -3.0);
  CHECK(at(1, 0) == 2.0);
  CHECK(at(0, 1) == 6.0);
  CHECK(at(1, 1) == 1.0);
  CHECK(v.lip(1.99) > 0.0);
  CHECK((v - v).lip(2.99) == 0.0);
}

TEST_CASE("operator products compose right to left")
{
  const auto v = rotation_field();
  const EulerScheme scheme(v, 2);
  const Eigen::Vector2d y(0.7, -1.3);
  // V_{i}(V_{j} I) = DV_j(y) V_i(y)
  const Eigen::MatrixXd vy = v(y);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      Eigen::MatrixXd dvj(2, 2);
      for (int r = 0; r < 2; ++r) {
        for (int s = 0; s < 2; ++s) dvj(r, s) = v.map().jacobian(y)(r * 2 + j, s);
      }
      const Eigen::Vector2d expect = dvj * vy.col(i);
      const auto & p = scheme.product(2, static_cast<std::size_t>(i * 2 + j));
      CHECK(p[0](y) == doctest::Approx(expect[0]).epsilon(1e-14));
      CHECK(p[1](y) == doctest::Approx(expect[1]).epsilon(1e-14));
    }
  }
}

TEST_CASE("euler step")
{
  Gen g(1);
  SUBCASE("constant field")
  {
    Eigen::MatrixXd c(2, 3);
    c << 1, 2, 3, -1, 0.5, 0;
    const auto v = PolyVectorField::constant(c);
    const auto x = g.group(3, 3);
    const Eigen::Vector2d y(0.1, 0.2);
    const Eigen::Map<const Eigen::VectorXd> x1(x[1].data(), 3);
    CHECK((euler_step(v, y, x) - (y + c * x1)).norm() < 1e-15);
  }
  SUBCASE("scalar linear field")
  {
    const double h = 0.3;
    const auto gx  = group_exp(LieElement::from_vector(s1(h), 2));
    CHECK(euler_step(scalar_linear(), s1(2.0), gx)[0] == doctest::Approx(2.0 * (1 + h + h * h / 2)).epsilon(1e-15));
  }
  SUBCASE("identity increment")
  {
    const Eigen::Vector2d y(0.3, -2.0);
    CHECK(euler_step(rotation_field(), y, GroupElement::identity(2, 3)) == y);
  }
}

TEST_CASE("euler solver")
{
  Gen g(2);
  const auto x = std::make_shared<const SampledRoughPath>(lift(g.walk(2, 6), 2));
  SUBCASE("zero field")
  {
    const auto sol = solve_euler(Eigen::Vector2d(1, 2), PolyVectorField::zero(2, 2), *x, 6);
    for (const auto & y : sol.y) CHECK(y == Eigen::Vector2d(1, 2));
  }
  SUBCASE("constant field telescopes at every depth")
  {
    Eigen::MatrixXd c(2, 2);
    c << 1, -2, 0.5, 3;
    const auto v   = PolyVectorField::constant(c);
    const auto pts = x->level1();
    for (int j : {0, 3, 6}) {
      const auto sol = solve_euler(Eigen::Vector2d(1, 2), v, *x, j);
      CHECK(sol.y.size() == (std::size_t{1} << j) + 1);
      const std::size_t stride = std::size_t{1} << (6 - j);
      for (std::size_t m = 0; m < sol.y.size(); ++m) {
        CHECK((sol.y[m] - (Eigen::Vector2d(1, 2) + c * pts[m * stride])).norm() < 1e-13);
      }
    }
  }
  SUBCASE("exponential growth")
  {
    const auto xl = linear_driver(10);
    double prev   = INFINITY;
    for (int j = 4; j <= 10; ++j) {
      const auto sol   = solve_euler(s1(1.0), scalar_linear(), *xl, j);
      const double err = std::abs(sol.y.back()[0] - std::numbers::e);
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 1e-6);
  }
  SUBCASE("blow-up is reported with its step")
  {
    // y' = y^2 from y0 = 1 leaves every bound before t = 1
    const PolyVectorField v(SmoothMap(1, 1, 1, {{0, 0, 1.0, {2}}}));
    const auto xl = linear_driver(3);
    std::vector<GroupElement> nodes;
    for (const auto & n : xl->nodes()) nodes.push_back(dilate(n, 1e3));
    const SampledRoughPath fast(3, nodes, xl->params());
    try {
      solve_euler(s1(1e100), v, fast, 3);
      FAIL("expected blow-up");
    } catch (const NumericError & e) {
      CHECK(e.step().has_value());
    }
  }
  CHECK_THROWS_AS(solve_euler(s1(1.0), scalar_linear(), *linear_driver(3), 4), InputError);
  CHECK_THROWS_AS(solve_euler(s1(1.0), scalar_linear(), *linear_driver(3), 3, 3), InputError);
}

TEST_CASE("picard solver")
{
  Gen g(3);
  const auto x = std::make_shared<const SampledRoughPath>(lift(g.walk(2, 5), 2));
  SUBCASE("zero field converges at once")
  {
    const auto sol = solve_picard_level2(Eigen::Vector2d(1, -1), PolyVectorField::zero(2, 2), x);
    CHECK(sol.iterations == 1);
    CHECK(sol.residual == 0.0);
    for (const auto & y : sol.y) CHECK(y == Eigen::Vector2d(1, -1));
  }
  SUBCASE("constant field needs two iterations")
  {
    Eigen::MatrixXd c(2, 2);
    c << 1, -2, 0.5, 3;
    const auto sol = solve_picard_level2(Eigen::Vector2d(1, 2), PolyVectorField::constant(c), x);
    CHECK(sol.iterations == 2);
    CHECK(sol.residual < kPicardTolerance);
    const auto pts = x->level1();
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((sol.y[i] - (Eigen::Vector2d(1, 2) + c * pts[i])).norm() < 1e-13);
  }
  SUBCASE("linear field agrees with euler and the exponential")
  {
    const auto xl  = linear_driver(10);
    const auto pic = solve_picard_level2(s1(1.0), scalar_linear(), xl);
    const auto eul = solve_euler(s1(1.0), scalar_linear(), *xl, 10);
    CHECK(std::abs(pic.y.back()[0] - eul.y.back()[0]) < 1e-6);
    CHECK(std::abs(pic.y.back()[0] - std::numbers::e) < 1e-6);
  }
  SUBCASE("one more map application barely moves the fixed point")
  {
    const auto v   = rotation_field();
    const Eigen::Vector2d y0(0.2, 0.1);
    const auto sol = solve_picard_level2(y0, v, x);
    const ControlledPath fixed(x, sol.y, sol.yprime);
    const auto again = picard_map(y0, v, fixed);
    CHECK(controlled_norm(again - fixed).total < 2 * kPicardTolerance);
  }
  SUBCASE("non-convergence carries the residual")
  {
    try {
      solve_picard_level2(Eigen::Vector2d(0.2, 0.1), rotation_field(), x, 1e-9, 2);
      FAIL("expected non-convergence");
    } catch (const NumericError & e) {
      REQUIRE(e.residual().has_value());
      CHECK(*e.residual() > 1e-9);
    }
  }
}

TEST_CASE("windowed solve")
{
  Gen g(5);
  const auto x = std::make_shared<const SampledRoughPath>(lift(g.walk(2, 6), 2));
  std::vector<Eigen::MatrixXd> a{Eigen::MatrixXd(2, 2), Eigen::MatrixXd(2, 2)};
  a[0] << 0, -1, 1, 0;
  a[1] << 0.5, 0.2, -0.3, 0.1;
  const auto v = PolyVectorField::linear(a);
  const Eigen::Vector2d y0(1.0, 0.5);
  const auto whole = solve_picard_level2(y0, v, x);

  const auto single = windowed_solve(y0, v, x, {0, 64});
  REQUIRE(single.y.size() == whole.y.size());
  for (std::size_t i = 0; i < whole.y.size(); ++i) CHECK(single.y[i] == whole.y[i]);

  const auto two = windowed_solve(y0, v, x, {0, 32, 64});
  REQUIRE(two.y.size() == whole.y.size());
  for (std::size_t i = 0; i < whole.y.size(); ++i) CHECK((two.y[i] - whole.y[i]).norm() < 1e-8);

  CHECK_THROWS_AS(windowed_solve(y0, v, x, {0, 24, 64}), InputError);
  CHECK_THROWS_AS(windowed_solve(y0, v, x, {0, 32}), InputError);
}
