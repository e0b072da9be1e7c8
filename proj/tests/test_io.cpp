#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "convfold/corpus.hpp"
#include "convfold/io.hpp"

using namespace convfold;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("convfold_io_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ScalarField affine_on_square() {
  auto mesh = mesh_polygon(builtin_domain("square"), 0.1);
  Eigen::VectorXd v(mesh->n_points());
  for (std::size_t i = 0; i < mesh->n_points(); ++i) v[i] = 1 + 2 * mesh->points()[i].x() - mesh->points()[i].y();
  return ScalarField(mesh, v);
}

}  // namespace

TEST(Svg, MapsPlaneToPixelsWithYUp) {
  Svg svg(Vec2(0, 0), Vec2(1, 1), 100);
  svg.point(Vec2(0, 1), "red");
  svg.polygon(builtin_domain("square"), "black");
  svg.line(Vec2(1, 0), 0.5, "blue");
  svg.text(Vec2(0.5, 0.5), "a<b");
  const auto s = svg.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("</svg>"), std::string::npos);
  EXPECT_NE(s.find("cx=\"0.00\" cy=\"0.00\""), std::string::npos);
  EXPECT_NE(s.find("a&lt;b"), std::string::npos);
  EXPECT_NE(s.find("<polygon"), std::string::npos);
}

TEST(Svg, PaddedBoxContainsPolygon) {
  const auto k = builtin_domain("rectangle3");
  const auto [lo, hi] = padded_box(k, 0.1);
  for (const auto& v : k.vertices()) {
    EXPECT_LT(lo.x(), v.x());
    EXPECT_LT(lo.y(), v.y());
    EXPECT_GT(hi.x(), v.x());
    EXPECT_GT(hi.y(), v.y());
  }
}

TEST(FieldCsv, RoundTripsNodalValuesExactly) {
  const auto u = affine_on_square();
  const auto path = temp_path("field.csv");
  write_field_csv(u, path);
  std::istringstream in(slurp(path));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x,y,u");
  std::size_t i = 0;
  while (std::getline(in, line)) {
    double x, y, v;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &y, &v), 3);
    EXPECT_EQ(x, u.mesh().points()[i].x());
    EXPECT_EQ(y, u.mesh().points()[i].y());
    EXPECT_EQ(v, u.values()[i]);
    ++i;
  }
  EXPECT_EQ(i, u.mesh().n_points());
  std::filesystem::remove(path);
}

TEST(GridDump, ResampleReproducesAffineFieldAndMarksOutside) {
  const auto u = affine_on_square();
  const auto g = resample(u, 11, 6);
  ASSERT_EQ(g.values.size(), 66u);
  for (std::uint32_t j = 0; j < g.ny; ++j) {
    for (std::uint32_t i = 0; i < g.nx; ++i) {
      const double x = g.x0 + i * g.dx, y = g.y0 + j * g.dy;
      EXPECT_NEAR(g.values[j * g.nx + i], 1 + 2 * x - y, 1e-12);
    }
  }
  auto disk = mesh_polygon(builtin_domain("disk"), 0.2);
  const auto gd = resample(ScalarField(disk, Eigen::VectorXd::Ones(disk->n_points())), 5, 5);
  EXPECT_TRUE(std::isnan(gd.values.front()));
  EXPECT_EQ(gd.values[12], 1.0);
  EXPECT_THROW(resample(u, 1, 5), Error);
}

TEST(GridDump, BinaryRoundTripIsBitExact) {
  const auto g = resample(affine_on_square(), 7, 9);
  const auto path = temp_path("grid.bin");
  write_grid_binary(g, path);
  const auto raw = slurp(path);
  EXPECT_EQ(raw.substr(0, 8), "PLAPGRID");
  EXPECT_EQ(raw.size(), 8 + 12 + 32 + 8 * 63u);
  const auto back = read_grid_binary(path);
  EXPECT_EQ(back.nx, 7u);
  EXPECT_EQ(back.ny, 9u);
  EXPECT_EQ(back.x0, g.x0);
  EXPECT_EQ(back.dy, g.dy);
  EXPECT_EQ(back.values, g.values);
  std::ofstream(path, std::ios::binary) << raw.substr(0, raw.size() - 3);
  EXPECT_THROW(read_grid_binary(path), Error);
  std::ofstream(path, std::ios::binary) << "NOTAGRID" << raw.substr(8);
  EXPECT_THROW(read_grid_binary(path), Error);
  std::filesystem::remove(path);
}

TEST(Config, ParsesScalarsListsQuotesAndComments) {
  const auto c = parse_config(R"(# experiment
domain = square
n-directions = 720   # trailing comment
label = "a # b"
p = [1.5, 2, 3]
domains = ["random:5:7", disk]
empty = []
)");
  EXPECT_EQ(c.at("domain"), std::vector<std::string>{"square"});
  EXPECT_EQ(c.at("n_directions"), std::vector<std::string>{"720"});
  EXPECT_EQ(c.at("label"), std::vector<std::string>{"a # b"});
  EXPECT_EQ(c.at("p"), (std::vector<std::string>{"1.5", "2", "3"}));
  EXPECT_EQ(c.at("domains"), (std::vector<std::string>{"random:5:7", "disk"}));
  EXPECT_TRUE(c.at("empty").empty());
}

TEST(Config, RejectsMalformedInput) {
  for (const char* bad : {"novalue", "a = ", "a = [1, 2", "a = 1\na = 2", "= 3", "a = [1,,2]", "a b = 1"}) {
    try {
      parse_config(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig) << bad;
    }
  }
  EXPECT_THROW(read_config_file(temp_path("missing.toml")), Error);
}
