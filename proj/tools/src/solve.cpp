#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "minv/cli/cli.hpp"
#include "minv/error.hpp"
#include "minv/measure_io.hpp"

namespace minv::cli {

namespace {

bool grid_formulation(Formulation f) { return f == Formulation::Entropy || f == Formulation::RegEntropy; }

ForwardMap build_map(const ProblemSpec& s) {
  try {
    if (s.map_kind == "polar") return s.domain ? polar_map().with_domain(*s.domain) : polar_map();
    if (s.map_kind == "offset-polar") return s.domain ? offset_polar_map().with_domain(*s.domain) : offset_polar_map();
    if (s.map_kind == "linear") return s.domain ? linear_map(s.matrix, *s.domain) : linear_map(s.matrix);
    if (s.map_kind == "identity") {
      return s.domain ? identity_map(s.identity_dim).with_domain(*s.domain) : identity_map(s.identity_dim);
    }
    return expression_map(s.components, s.in_dim, s.domain ? *s.domain : Domain::whole(s.in_dim));
  } catch (const Error& e) {
    throw SpecError("map", e.what());
  }
}

GridSpec theta_grid_for(const ProblemSpec& s, const ForwardMap& g, const std::optional<GridSpec>& fixture_grid) {
  if (!s.grid_shape && !s.grid_lower && !s.grid_upper && fixture_grid) return *fixture_grid;
  const std::size_t d = g.in_dim();
  std::vector<std::size_t> shape = s.grid_shape ? *s.grid_shape : std::vector<std::size_t>(d, s.fixture_options.grid);
  if (shape.size() != d) throw SpecError("grid.shape", "needs " + std::to_string(d) + " entries");
  Box box = g.theta().bounded() ? g.theta().bounding_box() : Box(Vector::Zero(0), Vector::Zero(0));
  if (s.grid_lower || s.grid_upper) {
    if (!s.grid_lower || !s.grid_upper) throw SpecError("grid.lower", "give both grid.lower and grid.upper");
    if (static_cast<std::size_t>(s.grid_lower->size()) != d || static_cast<std::size_t>(s.grid_upper->size()) != d) {
      throw SpecError("grid.lower", "bounds need " + std::to_string(d) + " entries");
    }
    try {
      box = Box(*s.grid_lower, *s.grid_upper);
    } catch (const Error& e) {
      throw SpecError("grid.lower", e.what());
    }
  } else if (!g.theta().bounded()) {
    throw SpecError("grid.lower", "unbounded parameter domain needs grid.lower and grid.upper");
  }
  try {
    return GridSpec(box, shape);
  } catch (const Error& e) {
    throw SpecError("grid.shape", e.what());
  }
}

GridMeasure histogram(const ProblemSpec& s, const ParticleMeasure& m) {
  if (!s.data_bins) throw SpecError("data.bins", "particle data for a grid formulation needs data.bins");
  if (!s.data_lower || !s.data_upper) throw SpecError("data.lower", "data.bins needs data.lower and data.upper");
  try {
    return GridMeasure::from_particles(GridSpec(Box(*s.data_lower, *s.data_upper), *s.data_bins), normalize(m));
  } catch (const Error& e) {
    throw SpecError("data.bins", e.what());
  }
}

PhiKind phi_of(const std::string& name) {
  if (name == "chi2") return PhiKind::chi_squared();
  if (name == "tv") return PhiKind::total_variation();
  return PhiKind::kl();
}

}  // namespace

Problem resolve(const ProblemSpec& s) {
  std::optional<Fixture> fx;
  if (!s.fixture.empty()) {
    try {
      fx = make_fixture(s.fixture, s.fixture_options);
    } catch (const Error& e) {
      throw SpecError("data.fixture", e.what());
    }
  }
  Problem pr{s.map_kind.empty() ? fx->map : build_map(s), {}, {}, {}, {}};

  if (fx) {
    pr.particles = fx->particles;
    pr.grid_data = fx->grid_data;
    pr.reg = fx->reg;
  }
  try {
    if (!s.particles_path.empty()) pr.particles = load_particles(s.particles_path);
  } catch (const Error& e) {
    throw SpecError("data.particles", e.what());
  }
  try {
    if (!s.grid_path.empty()) pr.grid_data = load_grid(s.grid_path);
  } catch (const Error& e) {
    throw SpecError("data.grid", e.what());
  }

  const std::size_t out_dim = pr.map.out_dim();
  if (grid_formulation(s.formulation)) {
    if (!pr.grid_data) pr.grid_data = histogram(s, *pr.particles);
    if (pr.grid_data->grid().dim() != out_dim) throw SpecError("data", "data dimension differs from the map output");
    pr.theta_grid = theta_grid_for(s, pr.map, fx ? fx->theta_grid : std::nullopt);
  } else if (s.formulation == Formulation::Conditional) {
    const std::size_t dim = pr.particles ? pr.particles->dim() : pr.grid_data->grid().dim();
    if (dim != out_dim) throw SpecError("data", "data dimension differs from the map output");
  } else {
    if (!pr.particles) pr.particles = pr.grid_data->to_particles();
    if (pr.particles->dim() != out_dim) throw SpecError("data", "data dimension differs from the map output");
  }

  if (s.alpha) pr.reg.alpha = *s.alpha;
  pr.reg.p = s.reg_p;
  if (s.formulation == Formulation::RegEntropy) {
    const GridSpec& grid = *pr.theta_grid;
    const Domain& theta = pr.map.theta();
    try {
      if (s.prior == "uniform") {
        pr.reg.prior = normalize(GridMeasure::from_density(grid, theta, [](const Vector&) { return 1.0; }));
      } else if (s.prior == "gaussian") {
        pr.reg.prior = normalize(
            GridMeasure::from_density(grid, theta, [](const Vector& x) { return std::exp(-0.5 * x.squaredNorm()); }));
      } else if (!s.prior.empty()) {
        pr.reg.prior = load_grid(s.prior);
      }
    } catch (const Error& e) {
      throw SpecError("reg.prior", e.what());
    }
    if (!pr.reg.prior || !(pr.reg.prior->grid() == grid)) {
      throw SpecError("reg.prior", "prior must live on the parameter grid");
    }
  } else {
    pr.reg.prior.reset();
  }
  try {
    pr.reg.validate();
  } catch (const Error& e) {
    throw SpecError("reg.alpha", e.what());
  }
  return pr;
}

SolveReport run_solver(const ProblemSpec& s, const Problem& pr) {
  TransportOptions transport;
  transport.force = s.ot;
  switch (s.formulation) {
    case Formulation::Conditional: {
      const auto range = range_predicate(pr.map, s.range_tol);
      if (pr.particles) return conditional_reconstruction(pr.map, *pr.particles, range, phi_of(s.divergence));
      return conditional_reconstruction(pr.map, *pr.grid_data, range, phi_of(s.divergence));
    }
    case Formulation::Marginal: return marginal_reconstruction(pr.map, *pr.particles, s.p, transport);
    case Formulation::Entropy: return entropy_solution(pr.map, *pr.theta_grid, *pr.grid_data);
    case Formulation::Moment: return moment_solution(pr.map, *pr.particles);
    case Formulation::RegEntropy: return reg_entropy_solution(pr.map, *pr.theta_grid, *pr.grid_data, pr.reg);
    case Formulation::RegWasserstein: return reg_wp_solution(pr.map, *pr.particles, pr.reg, transport);
  }
  throw Error(ErrorCode::InvalidArgument, "unhandled formulation");
}

std::string report_json(const ProblemSpec& s, const SolveReport& rep) {
  nlohmann::ordered_json j;
  j["formulation"] = std::string(to_string(rep.method));
  if (!s.fixture.empty()) {
    j["data"] = "fixture:" + s.fixture;
  } else {
    j["data"] = (s.particles_path.empty() ? s.grid_path : s.particles_path).generic_string();
  }
  j["seed"] = s.fixture_options.seed;
  j["objective"] = rep.objective;
  j["ot_method"] = rep.ot_method;
  nlohmann::ordered_json opt;
  opt["path"] = s.measure_path.generic_string();
  if (const auto* pm = std::get_if<ParticleMeasure>(&rep.optimizer)) {
    opt["format"] = "particles-csv";
    opt["points"] = pm->size();
  } else {
    opt["format"] = "grid";
    opt["cells"] = std::get<GridMeasure>(rep.optimizer).size();
  }
  j["optimizer"] = opt;
  nlohmann::ordered_json diag = nlohmann::ordered_json::object();
  for (const auto& [k, v] : rep.diagnostics) diag[k] = v;
  j["diagnostics"] = diag;
  return j.dump(2) + "\n";
}

int cmd_solve(const std::filesystem::path& spec_path, const GlobalOptions& opts, std::ostream& out,
              std::ostream& err) {
  ProblemSpec spec;
  Problem problem{identity_map(1), {}, {}, {}, {}};
  try {
    std::ifstream in(spec_path);
    if (!in) throw SpecError("spec", "cannot read " + spec_path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    spec = parse_spec(buf.str(), spec_path.parent_path(), opts);
    problem = resolve(spec);
  } catch (const SpecError& e) {
    err << "minv solve: spec error: " << e.what() << "\n";
    return kUsage;
  }

  SolveReport rep;
  try {
    rep = run_solver(spec, problem);
  } catch (const Error& e) {
    err << "minv solve: solver error: " << e.what() << "\n";
    return kSolverFailed;
  }

  try {
    if (const auto* pm = std::get_if<ParticleMeasure>(&rep.optimizer)) {
      save_particles(spec.measure_path, *pm);
    } else {
      save_grid(spec.measure_path, std::get<GridMeasure>(rep.optimizer));
    }
    write_file_atomic(spec.report_path, report_json(spec, rep));
  } catch (const std::exception& e) {
    err << "minv solve: output error: " << e.what() << "\n";
    return kSolverFailed;
  }
  if (!opts.quiet) {
    out << to_string(rep.method) << ": objective " << rep.objective << " (" << rep.ot_method << ")\n"
        << "report:    " << spec.report_path.string() << "\n"
        << "optimizer: " << spec.measure_path.string() << "\n";
  }
  return kOk;
}

}  // namespace minv::cli
