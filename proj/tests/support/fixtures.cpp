#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"

namespace border_forge::fixtures {

double free_value() { return pixel_to_occupancy(254, false); }

OccupancyGridMap lab_map() {
  OccupancyGridMap map(kLabWidth, kLabHeight, kLabResolution, {}, free_value());
  for (int row = 0; row < kLabHeight; ++row) {
    for (int col = 0; col < kLabWidth; ++col) {
      const bool wall = col < 2 || row < 2 || col >= kLabWidth - 2 || row >= kLabHeight - 2;
      if (wall) map.set({col, row}, 1.0);
    }
  }
  return map;
}

OccupancyGridMap free_map(int width, int height, double resolution) {
  return OccupancyGridMap(width, height, resolution, {}, free_value());
}

std::vector<WorldPoint> carpet_corners() {
  const double cx = 3.05, cy = 1.75, hw = 1.0, hh = 0.625;
  return {{cx - hw, cy - hh}, {cx + hw, cy - hh}, {cx + hw, cy + hh}, {cx - hw, cy + hh}};
}

VirtualBorder carpet_border(double delta) {
  return {{carpet_corners(), true}, {3.05, 1.75}, delta};
}

VirtualBorder window_border(double delta) {
  return {{{{1.0, 3.0}, {3.0, 3.1}, {5.0, 3.0}}, false}, {3.0, 3.3}, delta};
}

CellMask carpet_mask(const OccupancyGridMap& map) {
  CellMask mask = map.empty_mask();
  const auto corners = carpet_corners();
  for (int row = 0; row < map.height(); ++row) {
    for (int col = 0; col < map.width(); ++col) {
      const WorldPoint center{(col + 0.5) * map.resolution(), (row + 0.5) * map.resolution()};
      if (oracle::point_in_polygon(corners, center)) mask.insert({col, row});
    }
  }
  return mask;
}

std::vector<WorldPoint> random_star_polygon(std::mt19937_64& rng, WorldPoint center, int vertices,
                                            double r_min, double r_max) {
  std::uniform_real_distribution<double> radius(r_min, r_max);
  std::uniform_real_distribution<double> jitter(0.3, 0.7);
  std::vector<WorldPoint> pts;
  const double sector = 2.0 * std::numbers::pi / vertices;
  for (int i = 0; i < vertices; ++i) {
    // One vertex per angular sector keeps the polygon simple and star-shaped.
    const double angle = sector * (i + jitter(rng));
    const double r = radius(rng);
    pts.push_back({center.x + r * std::cos(angle), center.y + r * std::sin(angle)});
  }
  return pts;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("border_forge_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace border_forge::fixtures
