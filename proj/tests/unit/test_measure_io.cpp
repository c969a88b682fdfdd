#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "minv/error.hpp"
#include "minv/measure_io.hpp"
#include "minv/rng.hpp"

using namespace minv;

namespace {

Vector v2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "minv_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("grid text format round trip") {
  const GridSpec grid(Box(v2(-1, 0), v2(1, 3)), {3, 4});
  auto rng = make_rng(12, "io/grid");
  std::vector<double> vals(grid.size());
  for (auto& v : vals) v = uniform01(rng) / 3.0;
  const auto m = normalize(GridMeasure(grid, vals));
  std::stringstream ss;
  write_grid(ss, m);
  std::string header;
  std::getline(std::stringstream(ss.str()), header);
  CHECK(header == "grid d=2 shape=3,4 box=-1,1;0,3");
  const auto back = read_grid(ss);
  CHECK(back.grid() == grid);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(back.value(i) == m.value(i));
  CHECK(back.is_normalized());
}

TEST_CASE("particle CSV round trip") {
  auto rng = make_rng(13, "io/particles");
  Matrix pts(5, 3);
  for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = standard_normal(rng);
  const auto m = ParticleMeasure::uniform(pts);
  std::stringstream ss;
  write_particles(ss, m);
  CHECK(ss.str().rfind("x1,x2,x3,w\n", 0) == 0);
  const auto back = read_particles(ss);
  CHECK(back.points() == m.points());
  CHECK(back.weights() == m.weights());
}

TEST_CASE("malformed inputs") {
  std::stringstream bad_header("grid d=2 shape=3 box=0,1;0,1\n1\n");
  CHECK_THROWS_AS(read_grid(bad_header), Error);
  std::stringstream short_body("grid d=1 shape=3 box=0,1\n1\n1\n");
  CHECK_THROWS_AS(read_grid(short_body), Error);
  std::stringstream ragged("x1,w\n0,0.5\n1,0.25,7\n");
  CHECK_THROWS_AS(read_particles(ragged), Error);
  std::stringstream negative("x1,w\n0,-1\n");
  CHECK_THROWS_AS(read_particles(negative), Error);
}

TEST_CASE("files are written atomically and reload") {
  const auto path = scratch("m.csv");
  Matrix pts(2, 1);
  pts << 0.25, 0.75;
  save_particles(path, ParticleMeasure::uniform(pts));
  CHECK(load_particles(path).size() == 2);
  CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  CHECK_THROWS_AS(load_grid(scratch("missing.grid")), Error);
}
