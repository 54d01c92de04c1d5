#ifndef SRP_CLI_HPP_
#define SRP_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "srp/pathspace.hpp"
#include "srp/rde.hpp"

namespace srp::cli {

inline constexpr const char * kVersion = "0.1.0";

/// Raw CSV samples, t already rescaled to [0, 1].
struct CsvSamples
{
  std::vector<double> t;
  std::vector<Eigen::VectorXd> x;
};

/// Header `t,x1,...,xd`, strictly increasing finite t, finite cells. Errors name the line.
CsvSamples read_csv(std::istream & in, const std::string & source = "<input>");

struct GridSamples
{
  int depth = 0;
  std::vector<Eigen::VectorXd> values;  // 2^depth + 1 points
  /// max over the source points of |x_k - grid polyline(t_k)|
  double max_displacement = 0.0;
  std::size_t source_points = 0;
};

/// Linear interpolation of the samples onto i 2^-depth.
GridSamples resample(const CsvSamples & samples, int depth);

GridSamples ingest_csv(const std::string & path, int depth);

/// `t,x1,...` rows on the dyadic grid with 17 significant digits.
void write_csv(std::ostream & out, const std::vector<Eigen::VectorXd> & grid);

struct RunConfig
{
  std::string subcommand;
  SobolevParams params;
  int level = 0;  // resolved; [1/alpha] unless overridden
  bool level_overridden = false;
  int depth = 8;
  std::uint64_t seed = 1;
  int dim = 2;
  std::string input;
  std::string input2;
  std::string family = "walk";  // linear | walk | smooth
  std::string kind;             // study selector
  std::string scheme = "euler";
  double eps = 1e-2;
  std::vector<double> eps_list{1e-1, 1e-2, 1e-3};
  int seeds = 16;
  int paths = 200;
  double picard_tol = kPicardTolerance;
  int max_iter = kPicardMaxIterations;
  nlohmann::json field;      // vector field spec
  nlohmann::json integrand;  // integrand spec
  std::vector<double> y0;
  std::vector<std::string> warnings;

  nlohmann::json echo() const;
};

/// "inf" or a decimal.
double parse_p(const std::string & text);

/// Overrides fields from a JSON object; unknown keys are input errors.
void apply_json(RunConfig & config, const nlohmann::json & overrides);

/// Validates (alpha, p) and fills in the level.
void resolve(RunConfig & config);

/**
 * Polynomial map from JSON:
 * {"rows": r, "cols": c, "terms": [{"row", "col", "coef", "powers": [...]}]}.
 * A vector field uses {"dim_state": e, "dim_driver": d, "terms": ..., "ball": {"center", "radius"}}.
 */
SmoothMap map_from_json(const nlohmann::json & spec, int in_dim);
PolyVectorField field_from_json(const nlohmann::json & spec);
nlohmann::json field_to_json(const PolyVectorField & v);

/// Runs the command line; returns the process exit code (0 ok, 1 input error, 2 numeric failure).
int run(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

/// Report for an already resolved configuration.
nlohmann::json dispatch(RunConfig & config);

}  // namespace srp::cli

#endif  // SRP_CLI_HPP_
