#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "border_forge/gridmap.hpp"

namespace border_forge {

using Rgb = std::array<std::uint8_t, 3>;

namespace colors {
inline constexpr Rgb kGreen{0, 200, 0};
inline constexpr Rgb kYellow{255, 215, 0};
inline constexpr Rgb kRed{220, 0, 0};
inline constexpr Rgb kBlue{30, 90, 255};
inline constexpr Rgb kMagenta{200, 0, 200};
}  // namespace colors

// 8-bit RGB raster, rows top-down.
class RgbImage {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {0, 0, 0});

  int width() const { return width_; }
  int height() const { return height_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb color);
  const std::vector<std::uint8_t>& data() const { return data_; }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

// Grayscale rendering of the map with one pixel per cell (unknown -> 205).
RgbImage render_map(const OccupancyGridMap& map);

// Paints a map cell, handling the vertical flip between grid rows and image rows.
void paint_cell(RgbImage& image, CellIndex c, Rgb color);

std::vector<std::uint8_t> encode_png(const RgbImage& image);
void write_png(const RgbImage& image, const std::filesystem::path& path);
RgbImage decode_png(const std::vector<std::uint8_t>& bytes);
RgbImage read_png(const std::filesystem::path& path);

}  // namespace border_forge
