#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "CLI11.hpp"
#include "srp/cli.hpp"
#include "srp/controlled.hpp"
#include "srp/errors.hpp"
#include "srp/harness.hpp"

namespace srp::cli {

using nlohmann::json;

namespace {

json to_json(const Eigen::VectorXd & v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const std::vector<Eigen::VectorXd> & vs)
{
  json out = json::array();
  for (const auto & v : vs) out.push_back(to_json(v));
  return out;
}

json to_json(const LevelDistances & d) { return {{"per_level", d.per_level}, {"total", d.total}}; }

json to_json(const ControlledNorm & n)
{
  return {{"derivative", n.derivative}, {"tildeV", n.tildeV}, {"hatW", n.hatW},
          {"y0", n.y0},                 {"yprime0", n.yprime0}, {"total", n.total}};
}

json to_json(const FitReport & f)
{
  return {{"constant", f.constant},
          {"calibration_max", f.calibration_max},
          {"safety", f.safety},
          {"calibration_samples", f.calibration_samples}};
}

json heldout_json(const FitReport & f)
{
  return {{"heldout_samples", f.heldout_samples},
          {"heldout_violations", f.heldout_violations},
          {"heldout_max", f.heldout_max}};
}

json to_json(const SweepRecord & r)
{
  return {{"channel", channel_name(r.channel)},
          {"seed", r.seed},
          {"eps", r.eps},
          {"rho_hat", r.rho_hat},
          {"rho_hat_total", r.rho_hat_total},
          {"rho_tilde", r.rho_tilde},
          {"initial_gap", r.initial_gap},
          {"field_gap", r.field_gap},
          {"solution_gap", r.solution_gap},
          {"distance", r.distance},
          {"ratio", r.skipped ? json(nullptr) : json(r.ratio)},
          {"skipped", r.skipped},
          {"inside_ball", r.inside_ball},
          {"error", r.error}};
}

struct Driver
{
  std::vector<Eigen::VectorXd> samples;
  json source;
};

Driver load_driver(const RunConfig & c, const std::string & input, std::uint64_t seed)
{
  Driver d;
  if (!input.empty()) {
    auto g    = ingest_csv(input, c.depth);
    d.samples = std::move(g.values);
    d.source  = {{"kind", "csv"},
                 {"file", input},
                 {"points", g.source_points},
                 {"max_displacement", g.max_displacement}};
    return d;
  }
  if (c.family == "linear") {
    d.samples = sample_smooth(SmoothDriver::linear(Eigen::VectorXd::Ones(c.dim)), c.depth);
  } else if (c.family == "walk" || c.family == "smooth") {
    DriverFamily f;
    f.kind    = c.family == "walk" ? DriverKind::random_walk : DriverKind::smooth_trig;
    f.seed    = seed;
    f.dim     = c.dim;
    f.level   = c.level;
    f.depth   = c.depth;
    d.samples = sample_driver(f);
  } else {
    throw InputError("unknown family '" + c.family + "' (linear, walk, smooth)");
  }
  d.source = {{"kind", "family"}, {"family", c.family}, {"seed", seed}};
  return d;
}

Eigen::VectorXd direction(std::uint64_t seed, int dim)
{
  std::mt19937_64 rng(seed ^ 0xa0761d6478bd642fULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd u(dim);
  do {
    for (int i = 0; i < dim; ++i) u[i] = normal(rng);
  } while (u.norm() < 1e-3);
  return u / u.norm();
}

json flatten(const GroupElement & g)
{
  std::vector<double> out;
  for (int k = 1; k <= g.level(); ++k) {
    const auto lv = g.tensor()[k];
    out.insert(out.end(), lv.begin(), lv.end());
  }
  return out;
}

json cmd_lift(RunConfig & c, json & diag)
{
  const auto d = load_driver(c, c.input, c.seed);
  diag["source"] = d.source;
  const auto x   = lift_smooth(d.samples, c.level, c.params);
  json grid      = json::array();
  json nodes     = json::array();
  double geo     = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> row{x.time(i)};
    row.insert(row.end(), d.samples[i].data(), d.samples[i].data() + d.samples[i].size());
    grid.push_back(row);
    nodes.push_back(flatten(x[i]));
    geo = std::max(geo, check_geometric(x[i]).violation);
  }
  return {{"computed",
           {{"dim", x.dim()}, {"level", x.level()}, {"depth", x.depth()}, {"grid", grid}, {"nodes", nodes},
            {"geometric_violation", geo}}},
          {"fitted", json::object()}};
}

json cmd_norm(RunConfig & c, json & diag)
{
  const auto d = load_driver(c, c.input, c.seed);
  diag["source"] = d.source;
  const auto x   = lift_smooth(d.samples, c.level, c.params);
  const double a = c.params.alpha;
  const double p = c.params.p;
  json out;
  out["integral_norm"] = sobolev_norm_integral(x, a, p);
  out["holder_norm"]   = holder_norm(x, a);
  out["qvar_norm"]     = qvar_norm(x, 1.0 / a);
  out["max_node_norm"] = max_node_norm(x);
  if (c.params.holder()) {
    out["dyadic_norm"] = nullptr;
    c.warnings.push_back("dyadic norm needs finite p; integral_norm is the Hoelder norm");
  } else {
    const auto dy              = sobolev_norm_dyadic(x, a, p);
    out["dyadic_norm"]         = dy.value;
    diag["dyadic_last_level"]  = dy.last_level_term;
  }
  return {{"computed", out}, {"fitted", json::object()}};
}

json cmd_dist(RunConfig & c, json & diag)
{
  const auto d1 = load_driver(c, c.input, c.seed);
  std::vector<Eigen::VectorXd> s2;
  if (!c.input2.empty()) {
    auto d2 = load_driver(c, c.input2, c.seed);
    if (d2.samples.front().size() != d1.samples.front().size()) throw InputError("dist: paths differ in dimension");
    s2                = std::move(d2.samples);
    diag["source2"]   = d2.source;
  } else {
    s2              = perturb_samples(d1.samples, c.eps, direction(c.seed, static_cast<int>(d1.samples.front().size())));
    diag["source2"] = {{"kind", "perturbation"}, {"eps", c.eps}};
  }
  diag["source"] = d1.source;
  const auto x1  = lift_smooth(d1.samples, c.level, c.params);
  const auto x2  = lift_smooth(s2, c.level, c.params);
  const double a = c.params.alpha;
  const double p = c.params.p;
  if (c.params.holder()) throw InputError("dist: the inhomogeneous distances need finite p");
  double sup = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) sup = std::max(sup, rho_metric(x1[i], x2[i]));
  const auto controls = check_controls(x1, x2, a, p);
  json out;
  out["rho_hat"]         = to_json(inhom_sobolev_dist(x1, x2, a, p));
  out["rho_tilde"]       = to_json(mixed_dist(x1, x2, a, p));
  out["qvar_dist"]       = inhom_qvar_dist(x1, x2, a);
  out["sup_rho"]         = sup;
  out["omega_superadditive"] = controls.omega.superadditive;
  out["omega_prime_violations"] = controls.omega_prime_violations;
  out["dyadic_intervals"] = controls.intervals;
  return {{"computed", out}, {"fitted", json::object()}};
}

json cmd_integrate(RunConfig & c, json & diag)
{
  if (c.level != 2) throw InputError("integrate: needs a level-2 driver");
  const auto d = load_driver(c, c.input, c.seed);
  diag["source"] = d.source;
  const int dim  = static_cast<int>(d.samples.front().size());
  json spec      = c.integrand;
  if (spec.is_null()) {
    // default integrand x -> x^T, i.e. int <X, dX>
    spec = {{"rows", 1}, {"cols", dim}, {"terms", json::array()}};
    for (int i = 0; i < dim; ++i) {
      std::vector<int> powers(static_cast<std::size_t>(dim), 0);
      powers[static_cast<std::size_t>(i)] = 1;
      spec["terms"].push_back({{"row", 0}, {"col", i}, {"coef", 1.0}, {"powers", powers}});
    }
    c.integrand = spec;
  }
  const auto g = map_from_json(spec, dim);
  require_self_test(g);
  if (g.cols() != dim) throw InputError("integrate: integrand must have cols = driver dimension");
  auto x = std::make_shared<const SampledRoughPath>(lift_smooth(d.samples, 2, c.params));
  const ControlledPath base(x, x->level1(), std::vector<Eigen::MatrixXd>(x->size(), Eigen::MatrixXd::Identity(dim, dim)));
  const auto integral = rough_integral(compose_smooth(g, base));
  json out;
  out["value"]            = to_json(integral.path.y().back());
  out["path"]             = to_json(integral.path.y());
  out["refinement_gaps"]  = integral.refinement_gaps;
  out["refinement_order"] = integral.refinement_order;
  if (!c.params.holder()) out["controlled_norm"] = to_json(controlled_norm(integral.path));
  return {{"computed", out}, {"fitted", json::object()}};
}

json cmd_solve(RunConfig & c, json & diag)
{
  const auto d = load_driver(c, c.input, c.seed);
  diag["source"] = d.source;
  const int dim  = static_cast<int>(d.samples.front().size());
  if (c.field.is_null()) {
    const int e = c.y0.empty() ? 1 : static_cast<int>(c.y0.size());
    c.field     = {{"dim_state", e}, {"dim_driver", dim}, {"terms", json::array()}};
  }
  const auto v = field_from_json(c.field);
  if (c.y0.empty()) c.y0.assign(static_cast<std::size_t>(v.state_dim()), 1.0);
  const Eigen::VectorXd y0 = Eigen::Map<const Eigen::VectorXd>(c.y0.data(), static_cast<Eigen::Index>(c.y0.size()));
  auto x = std::make_shared<const SampledRoughPath>(lift_smooth(d.samples, c.level, c.params));
  RdeSolution sol;
  if (c.scheme == "euler") {
    sol = solve_euler(y0, v, *x, c.depth, c.level);
  } else if (c.scheme == "picard") {
    if (c.level != 2) throw InputError("solve: picard needs a level-2 driver");
    sol = solve_picard_level2(y0, v, x, c.picard_tol, c.max_iter);
  } else {
    throw InputError("unknown scheme '" + c.scheme + "' (euler, picard)");
  }
  json out;
  out["scheme"]     = sol.scheme;
  out["y"]          = to_json(sol.y);
  out["y_end"]      = to_json(sol.y.back());
  out["iterations"] = sol.iterations;
  out["residual"]   = sol.residual;
  out["max_step"]   = sol.step_norms.empty() ? 0.0 : *std::max_element(sol.step_norms.begin(), sol.step_norms.end());
  if (!c.params.holder()) {
    out["sobolev_seminorm"] = sobolev_norm_dyadic(std::span<const Eigen::VectorXd>(sol.y), c.params.alpha, c.params.p).value;
  }
  diag["ball"] = field_to_json(v)["ball"];
  return {{"computed", out}, {"fitted", json::object()}};
}

json cmd_sweep(RunConfig & c, json &)
{
  if (c.params.holder()) throw InputError("sweep: needs finite p");
  if (c.level != c.params.step()) throw InputError("sweep: the level must be [1/alpha]");
  SweepConfig s;
  s.seeds  = c.seeds;
  s.eps    = c.eps_list;
  s.depth  = c.depth;
  s.params = c.params;
  s.dim    = c.dim;
  s.seed   = c.seed;
  const auto rep = lipschitz_sweep(s);
  json records   = json::array();
  for (const auto & r : rep.records) records.push_back(to_json(r));
  json summaries = json::array();
  for (const auto & m : rep.summaries) {
    summaries.push_back({{"channel", channel_name(m.channel)}, {"eps", m.eps}, {"max_ratio", m.max_ratio},
                         {"q50", m.q50}, {"q90", m.q90}, {"count", m.count}, {"failures", m.failures}});
  }
  json growth    = json::object();
  json constants = json::object();
  for (const auto & [ch, g] : rep.growth) growth[channel_name(ch)] = g;
  for (const auto & m : rep.summaries) {
    const char * name = channel_name(m.channel);
    constants[name]   = std::max(constants.value(name, 0.0), m.max_ratio);
  }
  int violations = 0;
  int intervals  = 0;
  bool superadd  = true;
  double worst   = 0.0;
  for (const auto & cc : rep.controls) {
    violations += cc.omega_prime_violations;
    intervals += cc.intervals;
    superadd = superadd && cc.omega.superadditive;
    worst    = std::max(worst, cc.worst_excess);
  }
  json out;
  out["gamma"]     = rep.gamma;
  out["records"]   = records;
  out["summaries"] = summaries;
  out["growth"]    = growth;
  out["identical"] = to_json(rep.identical);
  out["zero_field"] = to_json(rep.zero_field);
  out["constant_field"] = to_json(rep.constant_field);
  out["controls"] = {{"omega_superadditive", superadd},
                     {"omega_prime_violations", violations},
                     {"intervals", intervals},
                     {"worst_excess", worst}};
  return {{"computed", out}, {"fitted", {{"lipschitz_constant", constants}}}};
}

json cmd_study(RunConfig & c, json &)
{
  const std::string & k = c.kind;
  json out;
  json fitted = json::object();
  if (k == "equivalence") {
    EquivalenceConfig e;
    e.paths  = c.paths;
    e.depths = {c.depth, c.depth + 2};
    e.params = {c.params};
    e.dim    = c.dim;
    e.level  = c.level;
    e.seed   = c.seed;
    const auto rep = equivalence_study(e);
    json rows      = json::array();
    for (const auto & r : rep.rows) rows.push_back({{"family", r.family}, {"seed", r.seed}, {"ratios", r.ratios}});
    out = {{"rows", rows},
           {"ratio_min", rep.ratio.lo},
           {"ratio_max", rep.ratio.hi},
           {"max_relative_change", rep.max_relative_change},
           {"linear_ratio", rep.linear_ratio},
           {"linear_closed_form", rep.linear_closed_form}};
  } else if (k == "embedding") {
    EmbeddingConfig e;
    e.paths  = c.paths;
    e.depth  = c.depth;
    e.params = c.params;
    e.dim    = c.dim;
    e.level  = c.level;
    e.seed   = c.seed;
    const auto fit = embedding_study(e);
    out    = heldout_json(fit);
    fitted = to_json(fit);
  } else if (k == "apriori") {
    AprioriConfig a;
    a.paths  = c.paths;
    a.depth  = c.depth;
    a.params = c.params;
    a.dim    = c.dim;
    a.seed   = c.seed;
    const auto rep = apriori_study(a);
    out            = heldout_json(rep.fit);
    out["gamma"]   = rep.gamma;
    out["inside_ball"] = rep.inside_ball;
    out["total"]   = rep.total;
    fitted         = to_json(rep.fit);
  } else if (k == "convergence" || k == "convergence-exp" || k == "convergence-constant") {
    ConvergenceConfig cc;
    cc.field = k == "convergence" ? "linear" : k == "convergence-exp" ? "scalar-exp" : "constant";
    cc.seed  = c.seed;
    const auto rep = convergence_study(cc);
    json rows      = json::array();
    for (const auto & r : rep.rows) {
      rows.push_back({{"level", r.level}, {"depths", r.depths}, {"errors", r.errors},
                      {"order", r.order}, {"monotone", r.monotone}});
    }
    out = {{"rows", rows}, {"oracle_error", rep.oracle_error}};
  } else if (k == "stability-integration" || k == "stability-composition") {
    StabilityConfig s;
    s.eps    = c.eps_list;
    s.depth  = c.depth;
    s.params = c.params;
    s.seed   = c.seed;
    const auto rep = stability_study(s, k == "stability-composition");
    out    = {{"operation", rep.operation}, {"eps", rep.eps}, {"max_ratio", rep.max_ratio}};
    fitted = {{"constant", rep.constant}};
  } else {
    throw InputError("unknown study kind '" + k
                     + "' (equivalence, embedding, apriori, convergence, convergence-exp, convergence-constant, "
                       "stability-integration, stability-composition)");
  }
  return {{"computed", out}, {"fitted", fitted}};
}

void write_atomic(const std::string & path, const std::string & text)
{
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write '" + tmp + "'");
    f << text;
    if (!f.flush()) throw InputError("cannot write '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot move report to '" + path + "': " + ec.message());
  }
}

}  // namespace

json dispatch(RunConfig & c)
{
  json diag = json::object();
  json results;
  const auto & s = c.subcommand;
  if (s == "lift") {
    results = cmd_lift(c, diag);
  } else if (s == "norm") {
    results = cmd_norm(c, diag);
  } else if (s == "dist") {
    results = cmd_dist(c, diag);
  } else if (s == "integrate") {
    results = cmd_integrate(c, diag);
  } else if (s == "solve") {
    results = cmd_solve(c, diag);
  } else if (s == "sweep") {
    results = cmd_sweep(c, diag);
  } else if (s == "study") {
    results = cmd_study(c, diag);
  } else {
    throw InputError("unknown subcommand '" + s + "'");
  }
  diag["warnings"] = c.warnings;
  return {{"version", kVersion}, {"config", c.echo()}, {"results", results}, {"diagnostics", diag}};
}

int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err)
{
  CLI::App app{"Sobolev rough path toolkit", "srp"};
  app.fallthrough();
  app.require_subcommand(1);
  double alpha = 0.4;
  std::string p_text = "4";
  int level = 0;
  RunConfig c;
  std::string config_file;
  std::string out_file;
  app.add_option("--alpha", alpha, "Sobolev regularity alpha in (0, 1)");
  app.add_option("--p", p_text, "Integrability p in (1, inf], or \"inf\"");
  app.add_option("--level", level, "Truncation level N (default [1/alpha])");
  app.add_option("--depth", c.depth, "Dyadic grid depth J");
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--dim", c.dim, "Driver dimension for generated families");
  app.add_option("--config", config_file, "JSON config; its keys override flags");
  app.add_option("--out", out_file, "Report file (default stdout)");
  app.add_option("--input", c.input, "CSV path t,x1,...,xd");
  app.add_option("--input2", c.input2, "Second CSV path (dist)");
  app.add_option("--family", c.family, "Generated driver: linear, walk, smooth");
  app.add_option("--kind", c.kind, "Study kind");
  app.add_option("--scheme", c.scheme, "Solver: euler, picard");
  app.add_option("--eps", c.eps, "Perturbation size (dist)");
  app.add_option("--seeds", c.seeds, "Seeds per sweep");
  app.add_option("--paths", c.paths, "Paths per study");
  const std::pair<const char *, const char *> subcommands[] = {
    {"lift", "Signature lift of a driver on the dyadic grid"},
    {"norm", "Sobolev, Hoelder and variation norms of a lifted driver"},
    {"dist", "Inhomogeneous distances between two drivers"},
    {"integrate", "Rough integral of a polynomial one-form"},
    {"solve", "Solve an RDE with a polynomial vector field"},
    {"sweep", "Lipschitz sweep over perturbation channels"},
    {"study", "Run a named study (--kind)"},
  };
  for (const auto & [name, help] : subcommands) app.add_subcommand(name, help);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError & e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 1;
  }

  try {
    c.subcommand   = app.get_subcommands().front()->get_name();
    c.params.alpha = alpha;
    c.params.p     = parse_p(p_text);
    c.level        = level;
    c.level_overridden = level != 0;
    if (!config_file.empty()) {
      std::ifstream f(config_file);
      if (!f) throw InputError("cannot open config '" + config_file + "'");
      json j;
      try {
        j = json::parse(f);
      } catch (const json::parse_error & e) {
        throw InputError("config '" + config_file + "' is not valid JSON: " + e.what());
      }
      apply_json(c, j);
    }
    resolve(c);
    const std::string text = dispatch(c).dump(2) + "\n";
    if (out_file.empty()) {
      out << text;
    } else {
      write_atomic(out_file, text);
    }
    return 0;
  } catch (const InputError & e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError & e) {
    err << "numeric failure: " << e.what();
    if (e.step()) err << " (step " << *e.step() << ")";
    if (e.residual()) err << " (residual " << *e.residual() << ")";
    err << "\n";
    return 2;
  } catch (const json::exception & e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception & e) {
    err << "internal failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace srp::cli
