#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "cli_support.hpp"
#include "srp/cli.hpp"
#include "srp/errors.hpp"

using namespace srp;
using namespace srp::cli;
using nlohmann::json;
using srp::testing::run_tool;

namespace {

std::filesystem::path scratch(const std::string & name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("srp_cli_test_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string write_file(const std::string & name, const std::string & text)
{
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p.string();
}

std::string input_error(const std::string & text)
{
  std::istringstream in(text);
  try {
    read_csv(in, "f.csv");
  } catch (const InputError & e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("csv ingestion")
{
  SUBCASE("two rows give the linear path")
  {
    std::istringstream in("t,x1\n0,0\n1,1\n");
    const auto g = resample(read_csv(in), 4);
    REQUIRE(g.values.size() == 17);
    for (std::size_t i = 0; i < 17; ++i) CHECK(g.values[i][0] == static_cast<double>(i) / 16);
    CHECK(g.max_displacement == 0.0);
  }
  SUBCASE("time is rescaled to the unit interval")
  {
    std::istringstream in("t,x1,x2\n2,1,0\n4,3,-2\n");
    const auto s = read_csv(in);
    CHECK(s.t == std::vector<double>{0.0, 1.0});
    const auto g = resample(s, 1);
    CHECK(g.values[1] == Eigen::Vector2d(2, -1));
  }
  SUBCASE("errors name the line")
  {
    CHECK(input_error("t,x1\n0,0\n0.1,1\n0.2,1\n0.15,2\n").find("f.csv:5:") != std::string::npos);
    CHECK(input_error("t,x1\n0,0\n0.1,1\n0.1,1\n").find("f.csv:4:") != std::string::npos);
    CHECK(input_error("t,x1\n0,0\n0.1,1,3\n").find("f.csv:3:") != std::string::npos);
    CHECK(input_error("t,x1\n0,0\n0.1,abc\n").find("f.csv:3:") != std::string::npos);
    CHECK(input_error("t,x1\n0,0\n0.1,nan\n").find("f.csv:3:") != std::string::npos);
    CHECK(input_error("t,y\n0,0\n1,1\n").find("f.csv:1:") != std::string::npos);
    CHECK_FALSE(input_error("t,x1\n0,0\n").empty());
    CHECK_FALSE(input_error("").empty());
  }
  SUBCASE("smooth samples stay within the interpolation bound")
  {
    std::ostringstream csv;
    csv << "t,x1\n";
    for (int i = 0; i < 100; ++i) {
      const double t = i / 99.0;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", t, std::sin(2 * std::numbers::pi * t));
      csv << buf;
    }
    std::istringstream in(csv.str());
    const auto s = read_csv(in);
    for (int depth : {6, 8, 10}) {
      const auto g = resample(s, depth);
      const double h     = std::ldexp(1.0, -depth);
      // chord against a polyline whose slopes drift by at most H * max|x''| per knot
      const double big   = 1.0 / 99;
      const double bound = h / 4 * (h + 2 * big) * 4 * std::numbers::pi * std::numbers::pi;
      CHECK(g.max_displacement > 0.0);
      CHECK(g.max_displacement <= bound);
      CHECK(g.source_points == 100);
    }
  }
}

TEST_CASE("round trip through the grid")
{
  const std::string src = write_file("walk.csv", "t,x1,x2\n0,0,0\n0.3,0.7,-0.1\n0.35,0.2,0.4\n1,1.5,0.25\n");
  RunConfig c;
  c.subcommand = "lift";
  c.input      = src;
  c.depth      = 6;
  resolve(c);
  const auto rep  = dispatch(c);
  const auto grid = rep["results"]["computed"]["grid"];
  std::vector<Eigen::VectorXd> values;
  for (const auto & row : grid) values.push_back(Eigen::Vector2d(row[1].get<double>(), row[2].get<double>()));

  std::ostringstream out;
  write_csv(out, values);
  const auto again = ingest_csv(write_file("again.csv", out.str()), 6);
  const auto first = ingest_csv(src, 6);
  REQUIRE(again.values.size() == first.values.size());
  for (std::size_t i = 0; i < again.values.size(); ++i) {
    CHECK(again.values[i] == first.values[i]);
    CHECK(again.values[i] == values[i]);
  }
  CHECK(again.max_displacement == 0.0);
}

TEST_CASE("configuration")
{
  CHECK(std::isinf(parse_p("inf")));
  CHECK(parse_p("4.5") == 4.5);
  CHECK_THROWS_AS(parse_p("4x"), InputError);

  RunConfig c;
  apply_json(c, json{{"alpha", 0.3}, {"p", "inf"}, {"tolerance", {{"max_iter", 5}}}});
  CHECK(c.params.alpha == 0.3);
  CHECK(c.max_iter == 5);
  resolve(c);
  CHECK(c.level == 3);
  CHECK(c.warnings.empty());

  RunConfig o;
  o.level = 1;
  resolve(o);
  REQUIRE(o.warnings.size() == 1);
  CHECK(o.warnings[0].find("overrides") != std::string::npos);

  RunConfig bad;
  bad.params = {0.2, 4.0};
  CHECK_THROWS_AS(resolve(bad), InputError);
  CHECK_THROWS_AS(apply_json(bad, json{{"alpah", 0.4}}), InputError);
  CHECK_THROWS_AS(apply_json(bad, json{{"depth", "deep"}}), InputError);
  CHECK_THROWS_AS(apply_json(bad, json::array()), InputError);
}

TEST_CASE("field specs")
{
  const json spec = {{"dim_state", 2},
                     {"dim_driver", 2},
                     {"terms", {{{"row", 0}, {"col", 0}, {"coef", -1.0}, {"powers", {0, 1}}},
                                {{"row", 1}, {"col", 1}, {"coef", 2.0}, {"powers", {2, 0}}}}},
                     {"ball", {{"center", {0.5, 0.0}}, {"radius", 2.0}}}};
  const auto v = field_from_json(spec);
  CHECK(v.state_dim() == 2);
  CHECK(v.ball().radius == 2.0);
  const Eigen::MatrixXd at = v(Eigen::Vector2d(3.0, 4.0));
  CHECK(at(0, 0) == -4.0);
  CHECK(at(1, 1) == 18.0);
  const auto back = field_from_json(field_to_json(v));
  CHECK(back(Eigen::Vector2d(0.3, -0.2)) == v(Eigen::Vector2d(0.3, -0.2)));
  CHECK(back.ball().center == v.ball().center);

  CHECK_THROWS_AS(field_from_json(json{{"dim_state", 2}}), InputError);
  CHECK_THROWS_AS(field_from_json(json{{"dim_state", 1}, {"dim_driver", 1}, {"color", 1}}), InputError);
  CHECK_THROWS_AS(field_from_json(json{{"dim_state", 1}, {"dim_driver", 1},
                                       {"terms", {{{"row", 3}, {"coef", 1.0}, {"powers", {1}}}}}}),
                  InputError);
}

TEST_CASE("reports")
{
  SUBCASE("norm of the linear path")
  {
    RunConfig c;
    c.subcommand = "norm";
    c.family     = "linear";
    c.dim        = 1;
    c.level      = 1;
    c.depth      = 10;
    resolve(c);
    const auto r = dispatch(c);
    CHECK(r["version"] == kVersion);
    CHECK(r["results"]["computed"]["integral_norm"].get<double>() == doctest::Approx(0.7036).epsilon(0.01));
    CHECK(r["results"]["computed"]["dyadic_norm"].get<double>() == doctest::Approx(1.0540).epsilon(0.01));
    CHECK(r["diagnostics"]["warnings"].size() == 1);
  }
  SUBCASE("zero field solve is constant")
  {
    RunConfig c;
    c.subcommand = "solve";
    c.depth      = 5;
    c.y0         = {0.5, -1.0};
    resolve(c);
    const auto r = dispatch(c);
    for (const auto & y : r["results"]["computed"]["y"]) CHECK(y == json{0.5, -1.0});
    CHECK(r["results"]["computed"]["sobolev_seminorm"] == 0.0);
  }
  SUBCASE("integration of the linear path")
  {
    RunConfig c;
    c.subcommand = "integrate";
    c.family     = "linear";
    c.dim        = 1;
    c.depth      = 6;
    resolve(c);
    const auto r = dispatch(c);
    CHECK(r["results"]["computed"]["value"][0].get<double>() == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("infinity is null")
  {
    RunConfig c;
    c.subcommand = "norm";
    c.params.p   = INFINITY;
    c.depth      = 4;
    resolve(c);
    const auto r = dispatch(c);
    CHECK(r["config"]["p"] == "inf");
    CHECK(r["results"]["computed"]["dyadic_norm"].is_null());
  }
}

TEST_CASE("binary: schema, determinism, exit codes")
{
  const srp::testing::SchemaCheck schema(SRP_SCHEMA_PATH);
  REQUIRE(schema.loaded());

  const std::vector<std::vector<std::string>> commands = {
    {"lift", "--depth", "5"},
    {"norm", "--depth", "6"},
    {"norm", "--depth", "5", "--p", "inf"},
    {"dist", "--depth", "5"},
    {"integrate", "--depth", "6", "--family", "smooth"},
    {"solve", "--depth", "5", "--scheme", "picard"},
    {"sweep", "--depth", "5", "--seeds", "2"},
    {"study", "--kind", "equivalence", "--paths", "4", "--depth", "5"},
    {"study", "--kind", "embedding", "--paths", "4", "--depth", "5"},
    {"study", "--kind", "apriori", "--paths", "4", "--depth", "5"},
    {"study", "--kind", "convergence-constant"},
    {"study", "--kind", "stability-composition", "--depth", "5"},
  };
  for (const auto & args : commands) {
    CAPTURE(args[0]);
    const auto r = run_tool(args);
    REQUIRE(r.code == 0);
    CHECK(schema.validate(r.out).empty());
  }

  SUBCASE("tampered reports are rejected")
  {
    auto doc = json::parse(run_tool({"norm", "--depth", "4"}).out);
    doc["results"]["computed"].erase("dyadic_norm");
    CHECK_FALSE(schema.validate(doc.dump()).empty());
    doc = json::parse(run_tool({"norm", "--depth", "4"}).out);
    doc["version"] = "one";
    CHECK_FALSE(schema.validate(doc.dump()).empty());
  }
  SUBCASE("same seed, same bytes")
  {
    const auto a = run_tool({"sweep", "--depth", "5", "--seeds", "2", "--seed", "7"});
    const auto b = run_tool({"sweep", "--depth", "5", "--seeds", "2", "--seed", "7"});
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    const auto c = run_tool({"sweep", "--depth", "5", "--seeds", "2", "--seed", "8"});
    CHECK(a.out != c.out);
    const auto out = scratch("report.json").string();
    CHECK(run_tool({"sweep", "--depth", "5", "--seeds", "2", "--seed", "7", "--out", out}).code == 0);
    CHECK(srp::testing::slurp(out) == a.out);
  }
  SUBCASE("config file overrides flags")
  {
    const auto cfg = write_file("cfg.json", R"({"depth": 4, "alpha": 0.45})");
    const auto r   = run_tool({"norm", "--depth", "7", "--config", cfg});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(doc["config"]["depth"] == 4);
    CHECK(doc["config"]["alpha"] == 0.45);
  }
  SUBCASE("fault injection")
  {
    const auto decreasing = write_file("dec.csv", "t,x1\n0,0\n0.1,1\n0.2,1\n0.15,2\n");
    const auto blowup     = write_file("blow.json", R"({"field": {"dim_state": 1, "dim_driver": 1,
      "terms": [{"coef": 1, "powers": [2]}]}, "y0": [1e200], "family": "linear", "dim": 1})");
    const auto stall      = write_file("stall.json", R"({"field": {"dim_state": 2, "dim_driver": 2,
      "terms": [{"row": 0, "col": 0, "coef": -1, "powers": [0, 1]}, {"row": 1, "col": 0, "coef": 1, "powers": [1, 0]},
                {"row": 0, "col": 1, "coef": 1, "powers": [1, 1]}]}, "y0": [0.2, 0.1], "tolerance": {"max_iter": 2}})");
    const auto broken     = write_file("broken.json", "{\"depth\": ");
    const auto unknown    = write_file("unknown.json", R"({"colour": 1})");
    struct Case
    {
      std::vector<std::string> args;
      int code;
      std::string message;
    };
    const std::vector<Case> cases = {
      {{"frobnicate"}, 1, ""},
      {{}, 1, "subcommand"},
      {{"norm", "--alpha", "0.2"}, 1, "alpha > 1/p"},
      {{"norm", "--p", "four"}, 1, "p must be"},
      {{"norm", "--input", decreasing}, 1, ":5:"},
      {{"norm", "--input", scratch("missing.csv").string()}, 1, "cannot open"},
      {{"norm", "--config", broken}, 1, "not valid JSON"},
      {{"norm", "--config", unknown}, 1, "unknown key"},
      {{"norm", "--family", "brownian"}, 1, "unknown family"},
      {{"study", "--kind", "nothing"}, 1, "unknown study"},
      {{"solve", "--scheme", "rk4"}, 1, "unknown scheme"},
      {{"solve", "--depth", "3", "--config", blowup}, 2, "blew up"},
      {{"solve", "--depth", "5", "--scheme", "picard", "--config", stall}, 2, "residual"},
      {{"norm", "--depth", "3"}, 0, ""},
      {{"--help"}, 0, ""},
    };
    for (const auto & c : cases) {
      CAPTURE(c.args.empty() ? std::string("<none>") : c.args[0]);
      CAPTURE(c.message);
      const auto r = run_tool(c.args);
      CHECK(r.code == c.code);
      CHECK(r.err.find(c.message) != std::string::npos);
      if (c.code != 0) CHECK(r.out.empty());
    }
  }
}
