#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "minv/fixtures.hpp"
#include "minv/solvers.hpp"

namespace minv::cli {

/// Exit statuses shared by every command.
enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kSolverFailed = 3 };

/// A problem-spec error; `field` names the offending key (or stage).
class SpecError : public std::runtime_error {
 public:
  SpecError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Flags accepted by every subcommand. Set values override the spec file.
struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> samples;
  std::optional<OtMethod> ot;
  bool quiet = false;
};

/// "exact" or "sinkhorn:<eps>".
OtMethod parse_ot(const std::string& text);

/// Flat `key = value` file with dotted keys; `#` starts a comment.
std::map<std::string, std::string> parse_key_values(const std::string& text);

struct ProblemSpec {
  // map
  std::string map_kind;  ///< empty: take the map from data.fixture
  Matrix matrix;
  std::size_t identity_dim = 0;
  std::vector<std::string> components;
  std::size_t in_dim = 0;
  std::optional<Domain> domain;
  // data
  std::string fixture;
  std::filesystem::path particles_path;
  std::filesystem::path grid_path;
  std::optional<std::vector<std::size_t>> data_bins;
  std::optional<Vector> data_lower;
  std::optional<Vector> data_upper;
  // problem
  Formulation formulation = Formulation::Conditional;
  std::string divergence = "kl";
  double p = 2.0;
  std::optional<double> alpha;
  double reg_p = 2.0;
  std::string prior;
  std::optional<std::vector<std::size_t>> grid_shape;
  std::optional<Vector> grid_lower;
  std::optional<Vector> grid_upper;
  double range_tol = 1e-9;
  std::optional<OtMethod> ot;
  // outputs
  std::filesystem::path report_path;
  std::filesystem::path measure_path;
  // fixture options
  FixtureOptions fixture_options;
};

/// Parses and checks a spec; relative paths resolve against `base_dir`.
/// Throws SpecError naming the failing key.
ProblemSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir, const GlobalOptions& opts = {});

/// Resolved inputs, ready for a solver.
struct Problem {
  ForwardMap map;
  std::optional<ParticleMeasure> particles;
  std::optional<GridMeasure> grid_data;
  std::optional<GridSpec> theta_grid;
  RegularizationConfig reg;
};

/// Loads data and builds the map; input failures surface as SpecError.
Problem resolve(const ProblemSpec& spec);

/// Runs the spec's formulation on resolved inputs.
SolveReport run_solver(const ProblemSpec& spec, const Problem& problem);

/// JSON report for a finished solve.
std::string report_json(const ProblemSpec& spec, const SolveReport& report);

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  [[nodiscard]] bool pass() const { return value <= tolerance; }
};

/// Solver-versus-closed-form checks for one named fixture; throws
/// InvalidArgument for an unknown name.
std::vector<Check> validate_fixture(const std::string& name, const FixtureOptions& opts,
                                    const TransportOptions& transport = {});

/// File name to contents for one figure (1 to 4); throws InvalidArgument otherwise.
std::map<std::string, std::string> figure_files(int id, const FixtureOptions& opts);

int cmd_solve(const std::filesystem::path& spec_path, const GlobalOptions& opts, std::ostream& out,
              std::ostream& err);
int cmd_validate(const std::string& fixture, const GlobalOptions& opts, std::ostream& out, std::ostream& err);
int cmd_figure(int id, const std::filesystem::path& out_dir, const GlobalOptions& opts, std::ostream& out,
               std::ostream& err);

/// Full command line, as called from main().
int run(int argc, char** argv);

/// Fixture options with the global flags applied.
FixtureOptions fixture_options(const GlobalOptions& opts);

}  // namespace minv::cli
