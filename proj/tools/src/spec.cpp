#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "minv/cli/cli.hpp"
#include "minv/error.hpp"
#include "minv/measure_io.hpp"

namespace minv::cli {

namespace {

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw SpecError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw SpecError(key, "expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

Vector to_vector(const std::string& key, const std::string& text) {
  const auto parts = split(text, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = to_double(key, parts[i]);
  return v;
}

std::vector<std::size_t> to_shape(const std::string& key, const std::string& text) {
  std::vector<std::size_t> shape;
  for (const auto& part : split(text, ',')) {
    const auto k = to_uint(key, part);
    if (k == 0) throw SpecError(key, "cell counts must be positive");
    shape.push_back(static_cast<std::size_t>(k));
  }
  return shape;
}

Matrix to_matrix(const std::string& key, const std::string& text) {
  const auto rows = split(text, ';');
  std::vector<Vector> parsed;
  for (const auto& r : rows) parsed.push_back(to_vector(key, r));
  if (parsed.empty() || parsed.front().size() == 0) throw SpecError(key, "empty matrix");
  Matrix a(static_cast<Eigen::Index>(parsed.size()), parsed.front().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    if (parsed[i].size() != a.cols()) throw SpecError(key, "ragged matrix rows");
    a.row(static_cast<Eigen::Index>(i)) = parsed[i].transpose();
  }
  return a;
}

Formulation to_formulation(const std::string& text) {
  for (auto f : {Formulation::Conditional, Formulation::Marginal, Formulation::Entropy, Formulation::Moment,
                 Formulation::RegEntropy, Formulation::RegWasserstein}) {
    if (to_string(f) == text) return f;
  }
  throw SpecError("formulation", "unknown formulation '" + text +
                                     "' (conditional, marginal, entropy, moment, reg-entropy, reg-wp)");
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "map.kind",          "map.matrix",       "map.dim",         "map.components",   "map.in_dim",
      "map.domain",        "map.domain.lower", "map.domain.upper", "map.domain.center", "map.domain.radius",
      "data.fixture",      "data.particles",   "data.grid",       "data.bins",        "data.lower",
      "data.upper",        "formulation",      "divergence",      "p",                "reg.alpha",
      "reg.p",             "reg.prior",        "grid.shape",      "grid.lower",       "grid.upper",
      "range.tol",         "ot",               "output.report",   "output.measure",   "seed",
      "samples",           "fixture.grid",     "fixture.bins"};
  return keys;
}

Domain parse_domain(const std::map<std::string, std::string>& kv, std::size_t dim) {
  const auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  const std::string kind = get("map.domain") ? *get("map.domain") : "whole";
  if (kind == "whole") return Domain::whole(dim);
  try {
    if (kind == "box") {
      if (!get("map.domain.lower") || !get("map.domain.upper")) {
        throw SpecError("map.domain", "box needs map.domain.lower and map.domain.upper");
      }
      Vector lo = to_vector("map.domain.lower", *get("map.domain.lower"));
      Vector hi = to_vector("map.domain.upper", *get("map.domain.upper"));
      if (static_cast<std::size_t>(lo.size()) != dim || static_cast<std::size_t>(hi.size()) != dim) {
        throw SpecError("map.domain", "bounds must have " + std::to_string(dim) + " entries");
      }
      return Domain::box(std::move(lo), std::move(hi));
    }
    if (kind == "ball") {
      if (!get("map.domain.center") || !get("map.domain.radius")) {
        throw SpecError("map.domain", "ball needs map.domain.center and map.domain.radius");
      }
      Vector c = to_vector("map.domain.center", *get("map.domain.center"));
      if (static_cast<std::size_t>(c.size()) != dim) {
        throw SpecError("map.domain.center", "needs " + std::to_string(dim) + " entries");
      }
      return Domain::ball(std::move(c), to_double("map.domain.radius", *get("map.domain.radius")));
    }
  } catch (const Error& e) {
    throw SpecError("map.domain", e.what());
  }
  throw SpecError("map.domain", "unknown domain '" + kind + "' (whole, box, ball)");
}

}  // namespace

OtMethod parse_ot(const std::string& text) {
  if (text == "exact") return OtMethod::exact();
  const std::string prefix = "sinkhorn:";
  if (text.rfind(prefix, 0) == 0) {
    const double eps = to_double("ot", text.substr(prefix.size()));
    if (!(eps > 0.0)) throw SpecError("ot", "sinkhorn epsilon must be positive");
    return OtMethod::entropic(eps);
  }
  throw SpecError("ot", "expected 'exact' or 'sinkhorn:<eps>', got '" + text + "'");
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw SpecError("line " + std::to_string(lineno), "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw SpecError("line " + std::to_string(lineno), "empty key");
    if (!known_keys().count(key)) throw SpecError(key, "unknown key");
    if (!kv.emplace(key, value).second) throw SpecError(key, "given more than once");
  }
  return kv;
}

ProblemSpec parse_spec(const std::string& text, const std::filesystem::path& base_dir, const GlobalOptions& opts) {
  const auto kv = parse_key_values(text);
  const auto get = [&](const std::string& k) -> const std::string* {
    auto it = kv.find(k);
    return it == kv.end() ? nullptr : &it->second;
  };
  const auto path_of = [&](const std::string& k) {
    std::filesystem::path p(*get(k));
    if (p.empty()) throw SpecError(k, "empty path");
    return p.is_absolute() ? p : base_dir / p;
  };

  ProblemSpec s;
  if (const auto* v = get("seed")) s.fixture_options.seed = to_uint("seed", *v);
  if (const auto* v = get("samples")) s.fixture_options.samples = static_cast<std::size_t>(to_uint("samples", *v));
  if (const auto* v = get("fixture.grid")) s.fixture_options.grid = static_cast<std::size_t>(to_uint("fixture.grid", *v));
  if (const auto* v = get("fixture.bins")) s.fixture_options.bins = static_cast<std::size_t>(to_uint("fixture.bins", *v));
  if (opts.seed) s.fixture_options.seed = *opts.seed;
  if (opts.samples) s.fixture_options.samples = *opts.samples;
  if (opts.grid) s.fixture_options.grid = *opts.grid;

  if (!get("formulation")) throw SpecError("formulation", "required");
  s.formulation = to_formulation(*get("formulation"));

  // data
  const int sources = (get("data.fixture") ? 1 : 0) + (get("data.particles") ? 1 : 0) + (get("data.grid") ? 1 : 0);
  if (sources != 1) throw SpecError("data", "give exactly one of data.fixture, data.particles, data.grid");
  if (const auto* v = get("data.fixture")) {
    s.fixture = *v;
    const auto& names = fixture_names();
    if (std::find(names.begin(), names.end(), s.fixture) == names.end()) {
      throw SpecError("data.fixture", "unknown fixture '" + s.fixture + "'");
    }
  }
  if (get("data.particles")) s.particles_path = path_of("data.particles");
  if (get("data.grid")) s.grid_path = path_of("data.grid");
  if (const auto* v = get("data.bins")) s.data_bins = to_shape("data.bins", *v);
  if (const auto* v = get("data.lower")) s.data_lower = to_vector("data.lower", *v);
  if (const auto* v = get("data.upper")) s.data_upper = to_vector("data.upper", *v);

  // map
  if (const auto* v = get("map.kind")) {
    s.map_kind = *v;
  } else if (s.fixture.empty()) {
    throw SpecError("map.kind", "required unless data.fixture supplies the map");
  }
  if (s.map_kind == "linear") {
    if (!get("map.matrix")) throw SpecError("map.matrix", "required for map.kind=linear");
    s.matrix = to_matrix("map.matrix", *get("map.matrix"));
    s.in_dim = static_cast<std::size_t>(s.matrix.cols());
  } else if (s.map_kind == "identity") {
    if (!get("map.dim")) throw SpecError("map.dim", "required for map.kind=identity");
    s.identity_dim = static_cast<std::size_t>(to_uint("map.dim", *get("map.dim")));
    if (s.identity_dim == 0) throw SpecError("map.dim", "must be positive");
    s.in_dim = s.identity_dim;
  } else if (s.map_kind == "expression") {
    if (!get("map.components")) throw SpecError("map.components", "required for map.kind=expression");
    if (!get("map.in_dim")) throw SpecError("map.in_dim", "required for map.kind=expression");
    s.components = split(*get("map.components"), ';');
    s.in_dim = static_cast<std::size_t>(to_uint("map.in_dim", *get("map.in_dim")));
    if (s.in_dim == 0) throw SpecError("map.in_dim", "must be positive");
  } else if (s.map_kind == "polar" || s.map_kind == "offset-polar") {
    s.in_dim = 2;
  } else if (!s.map_kind.empty()) {
    throw SpecError("map.kind", "unknown map '" + s.map_kind + "' (polar, offset-polar, linear, identity, expression)");
  }
  if (get("map.domain")) {
    if (s.map_kind.empty()) throw SpecError("map.domain", "needs map.kind");
    s.domain = parse_domain(kv, s.in_dim);
  }

  // problem parameters
  if (const auto* v = get("divergence")) {
    s.divergence = *v;
    if (s.divergence != "kl" && s.divergence != "chi2" && s.divergence != "tv") {
      throw SpecError("divergence", "unknown divergence '" + *v + "' (kl, chi2, tv)");
    }
  }
  if (const auto* v = get("p")) {
    s.p = to_double("p", *v);
    if (!(s.p >= 1.0)) throw SpecError("p", "must be >= 1");
  }
  if (const auto* v = get("reg.alpha")) {
    s.alpha = to_double("reg.alpha", *v);
    if (!(*s.alpha >= 0.0)) throw SpecError("reg.alpha", "must be >= 0");
  }
  if (const auto* v = get("reg.p")) {
    s.reg_p = to_double("reg.p", *v);
    if (!(s.reg_p >= 1.0)) throw SpecError("reg.p", "must be >= 1");
  }
  if (const auto* v = get("reg.prior")) {
    s.prior = *v;
    if (s.prior != "uniform" && s.prior != "gaussian") s.prior = path_of("reg.prior").string();
  }
  if (const auto* v = get("grid.shape")) s.grid_shape = to_shape("grid.shape", *v);
  if (const auto* v = get("grid.lower")) s.grid_lower = to_vector("grid.lower", *v);
  if (const auto* v = get("grid.upper")) s.grid_upper = to_vector("grid.upper", *v);
  if (const auto* v = get("range.tol")) {
    s.range_tol = to_double("range.tol", *v);
    if (!(s.range_tol > 0.0)) throw SpecError("range.tol", "must be positive");
  }
  if (const auto* v = get("ot")) s.ot = parse_ot(*v);
  if (opts.ot) s.ot = *opts.ot;

  const bool regularized = s.formulation == Formulation::RegEntropy || s.formulation == Formulation::RegWasserstein;
  if (regularized && !s.alpha && s.fixture.empty()) throw SpecError("reg.alpha", "required for " + std::string(to_string(s.formulation)));
  if (s.formulation == Formulation::RegEntropy && s.prior.empty() && s.fixture != "offset-polar-reg-kl") {
    throw SpecError("reg.prior", "required for reg-entropy");
  }
  if (!regularized && (s.alpha || !s.prior.empty())) {
    throw SpecError("reg.alpha", "regularization keys only apply to reg-entropy and reg-wp");
  }

  // outputs
  if (!get("output.report")) throw SpecError("output.report", "required");
  s.report_path = path_of("output.report");
  if (get("output.measure")) {
    s.measure_path = path_of("output.measure");
  } else {
    s.measure_path = s.report_path;
    const bool grid_out = s.formulation == Formulation::Entropy || s.formulation == Formulation::RegEntropy;
    s.measure_path.replace_extension(grid_out ? ".grid" : ".csv");
  }
  if (s.measure_path == s.report_path) throw SpecError("output.measure", "must differ from output.report");
  return s;
}

}  // namespace minv::cli
