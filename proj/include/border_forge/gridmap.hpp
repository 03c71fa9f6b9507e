#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace border_forge {

struct WorldPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const WorldPoint&, const WorldPoint&) = default;
};

struct CellIndex {
  int col = 0;
  int row = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

// Planar pose of the grid's lower-left corner in the Map frame.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Continuous coordinates in cell units, relative to the grid corner.
struct GridPoint {
  double u = 0.0;
  double v = 0.0;
};

enum class LoadMode { kTrinary, kRaw };

// Dense boolean layer over a grid geometry. Used for barriers, partition
// areas and evaluation regions.
class CellMask {
 public:
  CellMask() = default;
  CellMask(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(CellIndex c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  bool contains(CellIndex c) const;
  void insert(CellIndex c);
  void erase(CellIndex c);

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  // Row-major order (row, then col ascending).
  std::vector<CellIndex> cells() const;

  bool same_geometry(const CellMask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  CellMask& operator|=(const CellMask& other);
  CellMask& operator&=(const CellMask& other);
  CellMask& subtract(const CellMask& other);

  std::span<const std::uint8_t> bits() const { return bits_; }

  friend bool operator==(const CellMask&, const CellMask&) = default;

 private:
  std::size_t offset(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Occupancy grid map. Cell (0,0) is the lower-left cell; rows grow along the
// grid's +y axis. Values are occupancy probabilities in [0,1] or kUnknown.
class OccupancyGridMap {
 public:
  static constexpr double kUnknown = -1.0;
  static constexpr double kDefaultFreeThresh = 0.196;
  static constexpr double kDefaultOccupiedThresh = 0.65;

  OccupancyGridMap(int width, int height, double resolution, Pose2 origin = {},
                   double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2& origin() const { return origin_; }
  double free_thresh() const { return free_thresh_; }
  double occupied_thresh() const { return occupied_thresh_; }
  bool negate() const { return negate_; }
  LoadMode mode() const { return mode_; }

  void set_thresholds(double free_thresh, double occupied_thresh);
  void set_negate(bool negate) { negate_ = negate; }
  void set_mode(LoadMode mode) { mode_ = mode; }

  std::size_t cell_count() const { return values_.size(); }
  bool in_bounds(CellIndex c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }

  double at(CellIndex c) const { return values_[offset(c)]; }
  void set(CellIndex c, double value);

  bool is_unknown(CellIndex c) const { return at(c) < 0.0; }
  bool is_occupied(CellIndex c) const {
    return !is_unknown(c) && at(c) >= occupied_thresh_;
  }
  // Usable by the flood fill and the planner.
  bool is_traversable(CellIndex c) const {
    return !is_unknown(c) && at(c) < occupied_thresh_;
  }

  std::span<const double> values() const { return values_; }

  // Extent of the grid rectangle in meters.
  double extent_x() const { return width_ * resolution_; }
  double extent_y() const { return height_ * resolution_; }

  bool same_geometry(const OccupancyGridMap& other) const;
  CellMask empty_mask() const { return CellMask(width_, height_); }

  friend bool operator==(const OccupancyGridMap&, const OccupancyGridMap&) = default;

 private:
  std::size_t offset(CellIndex c) const {
    return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.col);
  }

  int width_;
  int height_;
  double resolution_;
  Pose2 origin_;
  double free_thresh_ = kDefaultFreeThresh;
  double occupied_thresh_ = kDefaultOccupiedThresh;
  bool negate_ = false;
  LoadMode mode_ = LoadMode::kTrinary;
  std::vector<double> values_;
};

// Map frame -> grid frame, in cell units. No bounds check.
GridPoint world_to_grid(const OccupancyGridMap& map, WorldPoint p);
WorldPoint grid_to_world(const OccupancyGridMap& map, GridPoint g);

// True when p lies in the closed grid rectangle (with a 1e-9 cell tolerance).
bool in_extent(const OccupancyGridMap& map, WorldPoint p);

// Cell containing p using floor(). Points on the far edge of the rectangle map
// to the last row/column. Throws kOutOfBounds outside the extent.
CellIndex world_to_cell(const OccupancyGridMap& map, WorldPoint p);

// Center of cell c. Throws kOutOfBounds for cells outside the grid.
WorldPoint cell_to_world(const OccupancyGridMap& map, CellIndex c);

// Pixel <-> occupancy conversion used by the PGM codec.
std::uint8_t occupancy_to_pixel(double value, bool negate);
double pixel_to_occupancy(std::uint8_t pixel, bool negate);
// Unknown is stored as 205; negated maps use its mirror so it still decodes
// into the band between the default thresholds.
inline constexpr std::uint8_t kUnknownPixel = 205;
inline constexpr std::uint8_t kUnknownPixelNegated = 255 - kUnknownPixel;

// Raw 8-bit grayscale image, rows stored top-down as in the file.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;
};

GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const GrayImage& image, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);

// Quantized image of the map (unknown -> 205), rows top-down.
GrayImage map_to_image(const OccupancyGridMap& map);

// Loads YAML metadata plus the referenced image. `mode_override` replaces the
// file's mode field.
OccupancyGridMap load_map(const std::filesystem::path& metadata_path,
                          std::optional<LoadMode> mode_override = std::nullopt);

// Writes <stem>.yaml metadata and <stem>.pgm next to it. `metadata_path` must
// end in .yaml; the image name is derived from its stem.
void save_map(const OccupancyGridMap& map, const std::filesystem::path& metadata_path);

std::string format_double(double value);

}  // namespace border_forge
