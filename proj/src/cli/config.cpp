#include <cmath>
#include <limits>
#include <string>

#include "srp/cli.hpp"
#include "srp/errors.hpp"

namespace srp::cli {

using nlohmann::json;

namespace {

template<class T>
T get(const json & j, const char * key)
{
  try {
    return j.get<T>();
  } catch (const json::exception &) {
    throw InputError(std::string("config: '") + key + "' has the wrong type");
  }
}

json p_to_json(double p)
{
  return std::isinf(p) ? json("inf") : json(p);
}

}  // namespace

double parse_p(const std::string & text)
{
  if (text == "inf" || text == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double v         = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception &) {
    throw InputError("p must be a number or \"inf\", got '" + text + "'");
  }
  if (used != text.size()) throw InputError("p must be a number or \"inf\", got '" + text + "'");
  return v;
}

json RunConfig::echo() const
{
  json j;
  j["subcommand"] = subcommand;
  j["alpha"]      = params.alpha;
  j["p"]          = p_to_json(params.p);
  j["level"]      = level;
  j["depth"]      = depth;
  j["seed"]       = seed;
  j["dim"]        = dim;
  j["input"]      = input;
  j["input2"]     = input2;
  j["family"]     = family;
  j["kind"]       = kind;
  j["scheme"]     = scheme;
  j["eps"]        = eps;
  j["eps_list"]   = eps_list;
  j["seeds"]      = seeds;
  j["paths"]      = paths;
  j["tolerance"]  = {{"picard", picard_tol}, {"max_iter", max_iter}};
  j["field"]      = field;
  j["integrand"]  = integrand;
  j["y0"]         = y0;
  return j;
}

void apply_json(RunConfig & c, const json & o)
{
  if (!o.is_object()) throw InputError("config: top level must be an object");
  for (const auto & [key, value] : o.items()) {
    const char * k = key.c_str();
    if (key == "alpha") {
      c.params.alpha = get<double>(value, k);
    } else if (key == "p") {
      c.params.p = value.is_string() ? parse_p(value.get<std::string>()) : get<double>(value, k);
    } else if (key == "level") {
      c.level            = get<int>(value, k);
      c.level_overridden = c.level != 0;
    } else if (key == "depth") {
      c.depth = get<int>(value, k);
    } else if (key == "seed") {
      c.seed = get<std::uint64_t>(value, k);
    } else if (key == "dim") {
      c.dim = get<int>(value, k);
    } else if (key == "input") {
      c.input = get<std::string>(value, k);
    } else if (key == "input2") {
      c.input2 = get<std::string>(value, k);
    } else if (key == "family") {
      c.family = get<std::string>(value, k);
    } else if (key == "kind") {
      c.kind = get<std::string>(value, k);
    } else if (key == "scheme") {
      c.scheme = get<std::string>(value, k);
    } else if (key == "eps") {
      c.eps = get<double>(value, k);
    } else if (key == "eps_list") {
      c.eps_list = get<std::vector<double>>(value, k);
    } else if (key == "seeds") {
      c.seeds = get<int>(value, k);
    } else if (key == "paths") {
      c.paths = get<int>(value, k);
    } else if (key == "tolerance") {
      if (!value.is_object()) throw InputError("config: 'tolerance' must be an object");
      for (const auto & [tk, tv] : value.items()) {
        if (tk == "picard") {
          c.picard_tol = get<double>(tv, "tolerance.picard");
        } else if (tk == "max_iter") {
          c.max_iter = get<int>(tv, "tolerance.max_iter");
        } else {
          throw InputError("config: unknown key 'tolerance." + tk + "'");
        }
      }
    } else if (key == "field") {
      c.field = value;
    } else if (key == "integrand") {
      c.integrand = value;
    } else if (key == "y0") {
      c.y0 = get<std::vector<double>>(value, k);
    } else {
      throw InputError("config: unknown key '" + key + "'");
    }
  }
}

void resolve(RunConfig & c)
{
  validate_params(c.params);
  const int natural = c.params.step();
  if (c.level == 0) {
    c.level            = natural;
    c.level_overridden = false;
  }
  if (c.level < 1 || c.level > 3) throw InputError("level must lie in 1..3");
  if (c.level != natural) {
    c.warnings.push_back("level " + std::to_string(c.level) + " overrides [1/alpha] = " + std::to_string(natural));
  }
  if (c.depth < 0 || c.depth > 16) throw InputError("depth must lie in 0..16");
  if (c.dim < 1 || c.dim > 8) throw InputError("dim must lie in 1..8");
  if (c.seeds < 1 || c.paths < 2) throw InputError("seeds must be >= 1 and paths >= 2");
  if (!(c.eps > 0.0)) throw InputError("eps must be positive");
  for (double e : c.eps_list) {
    if (!(e > 0.0)) throw InputError("eps_list entries must be positive");
  }
  if (c.eps_list.empty()) throw InputError("eps_list must not be empty");
  if (!(c.picard_tol > 0.0) || c.max_iter < 1) throw InputError("tolerance.picard must be positive, max_iter >= 1");
}

SmoothMap map_from_json(const json & spec, int in_dim)
{
  if (!spec.is_object()) throw InputError("map spec must be an object");
  if (!spec.contains("rows") || !spec.contains("cols")) throw InputError("map spec needs 'rows' and 'cols'");
  const int rows = get<int>(spec["rows"], "rows");
  const int cols = get<int>(spec["cols"], "cols");
  if (rows < 1 || cols < 1) throw InputError("map spec: rows and cols must be positive");
  std::vector<SmoothMap::Term> terms;
  if (spec.contains("terms")) {
    for (const auto & t : spec["terms"]) {
      if (!t.is_object() || !t.contains("coef") || !t.contains("powers")) {
        throw InputError("map spec: each term needs 'coef' and 'powers'");
      }
      SmoothMap::Term term;
      term.row    = t.contains("row") ? get<int>(t["row"], "row") : 0;
      term.col    = t.contains("col") ? get<int>(t["col"], "col") : 0;
      term.coef   = get<double>(t["coef"], "coef");
      term.powers = get<std::vector<int>>(t["powers"], "powers");
      terms.push_back(std::move(term));
    }
  }
  return SmoothMap(in_dim, rows, cols, terms);
}

PolyVectorField field_from_json(const json & spec)
{
  if (!spec.is_object() || !spec.contains("dim_state") || !spec.contains("dim_driver")) {
    throw InputError("field spec needs 'dim_state' and 'dim_driver'");
  }
  const int e = get<int>(spec["dim_state"], "dim_state");
  json as_map = {{"rows", e}, {"cols", spec["dim_driver"]}};
  if (spec.contains("terms")) as_map["terms"] = spec["terms"];
  for (const auto & [key, value] : spec.items()) {
    if (key != "dim_state" && key != "dim_driver" && key != "terms" && key != "ball") {
      throw InputError("field spec: unknown key '" + key + "'");
    }
  }
  if (e < 1) throw InputError("field spec: dim_state must be positive");
  Ball ball;
  if (spec.contains("ball")) {
    const auto & b = spec["ball"];
    if (b.contains("center")) {
      const auto c = get<std::vector<double>>(b["center"], "ball.center");
      ball.center  = Eigen::Map<const Eigen::VectorXd>(c.data(), static_cast<Eigen::Index>(c.size()));
    }
    if (b.contains("radius")) ball.radius = get<double>(b["radius"], "ball.radius");
  }
  return PolyVectorField(map_from_json(as_map, e), ball);
}

json field_to_json(const PolyVectorField & v)
{
  json terms = json::array();
  for (const auto & t : v.map().to_terms()) {
    terms.push_back({{"row", t.row}, {"col", t.col}, {"coef", t.coef}, {"powers", t.powers}});
  }
  std::vector<double> center(v.ball().center.data(), v.ball().center.data() + v.ball().center.size());
  return {{"dim_state", v.state_dim()},
          {"dim_driver", v.driver_dim()},
          {"terms", terms},
          {"ball", {{"center", center}, {"radius", v.ball().radius}}}};
}

}  // namespace srp::cli
