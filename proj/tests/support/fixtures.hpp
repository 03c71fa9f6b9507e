#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "border_forge/border_engine.hpp"
#include "border_forge/gridmap.hpp"

namespace border_forge::fixtures {

// 6.1 m x 3.5 m lab at 2.5 cm per cell: 244 x 140 cells.
inline constexpr int kLabWidth = 244;
inline constexpr int kLabHeight = 140;
inline constexpr double kLabResolution = 0.025;

// Free value a SLAM map typically stores (pixel 254).
double free_value();

// Lab map: free interior surrounded by a two-cell occupied wall.
OccupancyGridMap lab_map();

// Uniform free map of the given size.
OccupancyGridMap free_map(int width, int height, double resolution);

// 2.00 m x 1.25 m carpet centered in the lab.
VirtualBorder carpet_border(double delta = 1.0);
std::vector<WorldPoint> carpet_corners();

// Open separating curve fencing off the window strip along the top wall.
VirtualBorder window_border(double delta = 1.0);

inline constexpr WorldPoint kLabStart{0.4, 1.75};
inline constexpr WorldPoint kLabGoal{5.7, 1.75};

// Cells whose centers fall inside the carpet rectangle.
CellMask carpet_mask(const OccupancyGridMap& map);

// Star-shaped simple polygon around `center` with radii in [r_min, r_max].
std::vector<WorldPoint> random_star_polygon(std::mt19937_64& rng, WorldPoint center, int vertices,
                                            double r_min, double r_max);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

}  // namespace border_forge::fixtures
