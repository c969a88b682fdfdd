#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "minv/cli/cli.hpp"
#include "minv/error.hpp"
#include "minv/measure_io.hpp"

namespace minv::cli {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return buf;
}

}  // namespace

FixtureOptions fixture_options(const GlobalOptions& opts) {
  FixtureOptions f;
  if (opts.seed) f.seed = *opts.seed;
  if (opts.grid) f.grid = *opts.grid;
  if (opts.samples) f.samples = *opts.samples;
  return f;
}

int cmd_validate(const std::string& fixture, const GlobalOptions& opts, std::ostream& out, std::ostream& err) {
  const auto& names = fixture_names();
  if (std::find(names.begin(), names.end(), fixture) == names.end()) {
    err << "minv validate: unknown fixture '" << fixture << "'; known:";
    for (const auto& n : names) err << ' ' << n;
    err << "\n";
    return kUsage;
  }
  TransportOptions transport;
  transport.force = opts.ot;
  std::vector<Check> checks;
  try {
    checks = validate_fixture(fixture, fixture_options(opts), transport);
  } catch (const Error& e) {
    err << "minv validate: " << fixture << ": " << e.what() << "\n";
    return kCheckFailed;
  }
  bool ok = true;
  if (!opts.quiet) {
    out << "fixture " << fixture << "\n";
    char line[128];
    std::snprintf(line, sizeof(line), "  %-24s %-11s %-11s %s\n", "check", "value", "tolerance", "result");
    out << line;
  }
  for (const auto& c : checks) {
    ok = ok && c.pass();
    if (opts.quiet) continue;
    char line[160];
    std::snprintf(line, sizeof(line), "  %-24s %-11s %-11s %s\n", c.name.c_str(), sci(c.value).c_str(),
                  sci(c.tolerance).c_str(), c.pass() ? "PASS" : "FAIL");
    out << line;
  }
  if (!opts.quiet) out << (ok ? "all checks passed\n" : "some checks FAILED\n");
  return ok ? kOk : kCheckFailed;
}

int cmd_figure(int id, const std::filesystem::path& out_dir, const GlobalOptions& opts, std::ostream& out,
               std::ostream& err) {
  if (id < 1 || id > 4) {
    err << "minv figure: unknown figure " << id << " (1 to 4)\n";
    return kUsage;
  }
  std::map<std::string, std::string> files;
  try {
    files = figure_files(id, fixture_options(opts));
  } catch (const Error& e) {
    err << "minv figure: " << e.what() << "\n";
    return kSolverFailed;
  }
  try {
    for (const auto& [name, contents] : files) {
      write_file_atomic(out_dir / name, contents);
      if (!opts.quiet) out << (out_dir / name).string() << "\n";
    }
  } catch (const std::exception& e) {
    err << "minv figure: output error: " << e.what() << "\n";
    return kSolverFailed;
  }
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Inverse problems over probability measures"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "minv 0.1.0");

  GlobalOptions opts;
  std::uint64_t seed = 0;
  std::size_t grid = 0;
  std::size_t samples = 0;
  std::string ot;
  auto* seed_opt = app.add_option("--seed", seed, "root seed for all sampled data");
  auto* grid_opt = app.add_option("--grid", grid, "parameter grid cells per axis")->check(CLI::PositiveNumber);
  auto* samples_opt = app.add_option("--samples", samples, "particle count")->check(CLI::PositiveNumber);
  auto* ot_opt = app.add_option("--ot", ot, "transport evaluation: exact or sinkhorn:<eps>");
  app.add_flag("--quiet", opts.quiet, "suppress progress output");

  std::string spec_path;
  auto* solve = app.add_subcommand("solve", "solve a problem spec");
  solve->add_option("spec", spec_path, "problem spec file")->required();

  std::string fixture;
  auto* validate = app.add_subcommand("validate", "check a fixture against its closed form");
  validate->add_option("fixture", fixture, "fixture name")->required();

  int fig = 0;
  std::string out_dir = ".";
  auto* figure = app.add_subcommand("figure", "emit plot data for a figure");
  figure->add_option("id", fig, "figure number (1 to 4)")->required();
  figure->add_option("--out", out_dir, "output directory");

  for (auto* sub : {solve, validate, figure}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (*seed_opt) opts.seed = seed;
  if (*grid_opt) opts.grid = grid;
  if (*samples_opt) opts.samples = samples;
  if (*ot_opt) {
    try {
      opts.ot = parse_ot(ot);
    } catch (const SpecError& e) {
      std::cerr << "minv: --ot: " << e.what() << "\n";
      return kUsage;
    }
  }

  if (*solve) return cmd_solve(spec_path, opts, std::cout, std::cerr);
  if (*validate) return cmd_validate(fixture, opts, std::cout, std::cerr);
  return cmd_figure(fig, out_dir, opts, std::cout, std::cerr);
}

}  // namespace minv::cli
