#include <charconv>
#include <sstream>

#include "minv/cli/cli.hpp"
#include "minv/error.hpp"
#include "minv/measure_io.hpp"

namespace minv::cli {

namespace {

std::string num(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf, ptr);
}

std::string particles_csv(const ParticleMeasure& m) {
  std::ostringstream os;
  write_particles(os, m);
  return os.str();
}

// x1,...,xd,density[,analytic] for every masked cell.
std::string grid_csv(const GridMeasure& m, const std::function<double(const Vector&)>& analytic = {}) {
  std::ostringstream os;
  for (std::size_t k = 0; k < m.grid().dim(); ++k) os << 'x' << (k + 1) << ',';
  os << "density" << (analytic ? ",analytic" : "") << '\n';
  for (std::size_t c = 0; c < m.size(); ++c) {
    if (!m.masked(c)) continue;
    const Vector x = m.grid().center(c);
    for (Eigen::Index k = 0; k < x.size(); ++k) os << num(x[k]) << ',';
    os << num(m.value(c));
    if (analytic) os << ',' << num(analytic(x));
    os << '\n';
  }
  return os.str();
}

}  // namespace

std::map<std::string, std::string> figure_files(int id, const FixtureOptions& opts) {
  std::map<std::string, std::string> files;
  switch (id) {
    case 1: {
      const Fixture f = make_fixture("polar-over", opts);
      const auto cond = conditional_reconstruction(f.map, *f.particles, range_predicate(f.map), PhiKind::kl());
      const auto marg = marginal_reconstruction(f.map, *f.particles, 2.0);
      files["fig1_data.csv"] = particles_csv(*f.particles);
      files["fig1_conditional.csv"] = particles_csv(std::get<ParticleMeasure>(cond.pushforward_of_optimizer));
      files["fig1_marginal.csv"] = particles_csv(std::get<ParticleMeasure>(marg.pushforward_of_optimizer));
      break;
    }
    case 2: {
      const Fixture f = make_fixture("offset-polar-under", opts);
      const auto ent = entropy_solution(f.map, *f.theta_grid, *f.grid_data);
      const auto mom = moment_solution(f.map, *f.particles);
      files["fig2_entropy.csv"] = grid_csv(std::get<GridMeasure>(ent.optimizer), f.analytic_density);
      files["fig2_moment.csv"] = particles_csv(std::get<ParticleMeasure>(mom.optimizer));
      break;
    }
    case 3: {
      const Fixture f = make_fixture("offset-polar-reg-kl", opts);
      const Fixture plain = make_fixture("offset-polar-under", opts);
      const auto a0 = entropy_solution(plain.map, *plain.theta_grid, *plain.grid_data);
      const auto a1 = reg_entropy_solution(f.map, *f.theta_grid, *f.grid_data, f.reg);
      files["fig3_alpha0.csv"] = grid_csv(std::get<GridMeasure>(a0.optimizer), plain.analytic_density);
      files["fig3_alpha1.csv"] = grid_csv(std::get<GridMeasure>(a1.optimizer), f.analytic_density);
      break;
    }
    case 4: {
      const Fixture f = make_fixture("offset-polar-reg-w2", opts);
      const Fixture plain = make_fixture("offset-polar-under", opts);
      const auto a0 = moment_solution(plain.map, *f.particles);
      const auto a1 = reg_wp_solution(f.map, *f.particles, f.reg);
      files["fig4_alpha0.csv"] = particles_csv(std::get<ParticleMeasure>(a0.optimizer));
      files["fig4_alpha1.csv"] = particles_csv(std::get<ParticleMeasure>(a1.optimizer));
      break;
    }
    default:
      throw Error(ErrorCode::InvalidArgument, "unknown figure " + std::to_string(id) + " (1 to 4)");
  }
  return files;
}

}  // namespace minv::cli
