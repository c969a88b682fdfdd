#include "minv/measure_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include "minv/error.hpp"

namespace minv {

namespace {

std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "cannot format number");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s, const std::string& what) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ParseError, "malformed number '" + std::string(s) + "' in " + what);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view field(std::string_view token, std::string_view key) {
  if (token.substr(0, key.size()) != key) {
    throw Error(ErrorCode::ParseError, "grid header: expected '" + std::string(key) + "'");
  }
  return token.substr(key.size());
}

}  // namespace

void write_grid(std::ostream& os, const GridMeasure& m) {
  const GridSpec& g = m.grid();
  os << "grid d=" << g.dim() << " shape=";
  for (std::size_t a = 0; a < g.dim(); ++a) os << (a ? "," : "") << g.shape[a];
  os << " box=";
  for (std::size_t a = 0; a < g.dim(); ++a) {
    const auto i = static_cast<Eigen::Index>(a);
    os << (a ? ";" : "") << fmt(g.box.lower[i]) << ',' << fmt(g.box.upper[i]);
  }
  os << '\n';
  for (std::size_t c = 0; c < m.size(); ++c) os << fmt(m.masked(c) ? m.value(c) : 0.0) << '\n';
}

GridMeasure read_grid(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw Error(ErrorCode::ParseError, "grid file is empty");
  if (!header.empty() && header.back() == '\r') header.pop_back();
  std::istringstream hs(header);
  std::string tag, dtok, stok, btok;
  hs >> tag >> dtok >> stok >> btok;
  if (tag != "grid") throw Error(ErrorCode::ParseError, "grid header must start with 'grid'");
  const auto d = static_cast<std::size_t>(parse_double(field(dtok, "d="), "grid header d"));
  std::vector<std::size_t> shape;
  for (auto s : split(field(stok, "shape="), ',')) {
    shape.push_back(static_cast<std::size_t>(parse_double(s, "grid header shape")));
  }
  const auto axes = split(field(btok, "box="), ';');
  if (shape.size() != d || axes.size() != d) throw Error(ErrorCode::ParseError, "grid header dimension mismatch");
  Vector lo(static_cast<Eigen::Index>(d)), hi(static_cast<Eigen::Index>(d));
  for (std::size_t a = 0; a < d; ++a) {
    const auto pair = split(axes[a], ',');
    if (pair.size() != 2) throw Error(ErrorCode::ParseError, "grid header box needs lo,hi per axis");
    lo[static_cast<Eigen::Index>(a)] = parse_double(pair[0], "grid box");
    hi[static_cast<Eigen::Index>(a)] = parse_double(pair[1], "grid box");
  }
  GridSpec grid(Box(lo, hi), shape);
  std::vector<double> values;
  values.reserve(grid.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    values.push_back(parse_double(line, "grid values"));
  }
  if (values.size() != grid.size()) {
    throw Error(ErrorCode::ParseError, "grid file has " + std::to_string(values.size()) + " values, expected " +
                                           std::to_string(grid.size()));
  }
  return GridMeasure(std::move(grid), std::move(values));
}

void write_particles(std::ostream& os, const ParticleMeasure& m) {
  for (std::size_t a = 0; a < m.dim(); ++a) os << 'x' << (a + 1) << ',';
  os << "w\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index a = 0; a < m.points().cols(); ++a) os << fmt(m.points()(r, a)) << ',';
    os << fmt(m.weights()[r]) << '\n';
  }
}

ParticleMeasure read_particles(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (first) {
      first = false;
      if (line.front() == 'x' || line.front() == 'w') continue;
    }
    std::vector<double> row;
    for (auto tok : split(line, ',')) row.push_back(parse_double(tok, "particle CSV"));
    if (row.size() < 2) throw Error(ErrorCode::ParseError, "particle CSV rows need at least one coordinate and a weight");
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::ParseError, "particle CSV rows have inconsistent column counts");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::ParseError, "particle CSV has no data rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size() - 1);
  Matrix pts(n, d);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index a = 0; a < d; ++a) pts(i, a) = row[static_cast<std::size_t>(a)];
    w[i] = row.back();
  }
  return ParticleMeasure(std::move(pts), std::move(w));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

void save_grid(const std::filesystem::path& path, const GridMeasure& m) {
  std::ostringstream os;
  write_grid(os, m);
  write_file_atomic(path, os.str());
}

GridMeasure load_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open grid file " + path.string());
  return read_grid(in);
}

void save_particles(const std::filesystem::path& path, const ParticleMeasure& m) {
  std::ostringstream os;
  write_particles(os, m);
  write_file_atomic(path, os.str());
}

ParticleMeasure load_particles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open particle file " + path.string());
  return read_particles(in);
}

}  // namespace minv
