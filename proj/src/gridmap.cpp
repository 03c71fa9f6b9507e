#include "border_forge/gridmap.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "border_forge/error.hpp"

namespace border_forge {

namespace {

constexpr double kExtentTolerance = 1e-9;  // in cells

void check_dimensions(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kInvalidMap, "map dimensions must be positive");
  }
}

}  // namespace

CellMask::CellMask(int width, int height)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) *
                static_cast<std::size_t>(std::max(height, 0)),
            0) {}

bool CellMask::contains(CellIndex c) const {
  return in_bounds(c) && bits_[offset(c)] != 0;
}

void CellMask::insert(CellIndex c) {
  if (!in_bounds(c)) {
    throw Error(ErrorCode::kOutOfBounds, "mask cell out of bounds");
  }
  bits_[offset(c)] = 1;
}

void CellMask::erase(CellIndex c) {
  if (in_bounds(c)) bits_[offset(c)] = 0;
}

std::size_t CellMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::vector<CellIndex> CellMask::cells() const {
  std::vector<CellIndex> out;
  for (int row = 0; row < height_; ++row) {
    for (int col = 0; col < width_; ++col) {
      if (bits_[offset({col, row})]) out.push_back({col, row});
    }
  }
  return out;
}

CellMask& CellMask::operator|=(const CellMask& other) {
  if (!same_geometry(other)) throw Error(ErrorCode::kGeometryMismatch, "mask geometry mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] |= other.bits_[i];
  return *this;
}

CellMask& CellMask::operator&=(const CellMask& other) {
  if (!same_geometry(other)) throw Error(ErrorCode::kGeometryMismatch, "mask geometry mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) bits_[i] &= other.bits_[i];
  return *this;
}

CellMask& CellMask::subtract(const CellMask& other) {
  if (!same_geometry(other)) throw Error(ErrorCode::kGeometryMismatch, "mask geometry mismatch");
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (other.bits_[i]) bits_[i] = 0;
  }
  return *this;
}

OccupancyGridMap::OccupancyGridMap(int width, int height, double resolution, Pose2 origin,
                                   double fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
  check_dimensions(width, height);
  if (!(resolution > 0.0) || !std::isfinite(resolution)) {
    throw Error(ErrorCode::kInvalidMap, "resolution must be positive");
  }
  if (!(fill == kUnknown || (fill >= 0.0 && fill <= 1.0))) {
    throw Error(ErrorCode::kInvalidMap, "fill value must be a probability or unknown");
  }
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

void OccupancyGridMap::set_thresholds(double free_thresh, double occupied_thresh) {
  if (!(free_thresh >= 0.0 && free_thresh < occupied_thresh && occupied_thresh <= 1.0)) {
    throw Error(ErrorCode::kInvalidMap, "thresholds must satisfy 0 <= free < occupied <= 1");
  }
  free_thresh_ = free_thresh;
  occupied_thresh_ = occupied_thresh;
}

void OccupancyGridMap::set(CellIndex c, double value) {
  if (!in_bounds(c)) throw Error(ErrorCode::kOutOfBounds, "cell out of bounds");
  if (!(value == kUnknown || (value >= 0.0 && value <= 1.0))) {
    throw Error(ErrorCode::kInvalidArgument, "cell value must be in [0,1] or unknown");
  }
  values_[offset(c)] = value;
}

bool OccupancyGridMap::same_geometry(const OccupancyGridMap& other) const {
  return width_ == other.width_ && height_ == other.height_ &&
         resolution_ == other.resolution_ && origin_ == other.origin_;
}

GridPoint world_to_grid(const OccupancyGridMap& map, WorldPoint p) {
  const Pose2& o = map.origin();
  const double dx = p.x - o.x;
  const double dy = p.y - o.y;
  const double c = std::cos(o.yaw);
  const double s = std::sin(o.yaw);
  // Inverse rotation R(-yaw) applied to the offset.
  const double lx = c * dx + s * dy;
  const double ly = -s * dx + c * dy;
  return {lx / map.resolution(), ly / map.resolution()};
}

WorldPoint grid_to_world(const OccupancyGridMap& map, GridPoint g) {
  const Pose2& o = map.origin();
  const double lx = g.u * map.resolution();
  const double ly = g.v * map.resolution();
  const double c = std::cos(o.yaw);
  const double s = std::sin(o.yaw);
  return {o.x + c * lx - s * ly, o.y + s * lx + c * ly};
}

bool in_extent(const OccupancyGridMap& map, WorldPoint p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  const GridPoint g = world_to_grid(map, p);
  return g.u >= -kExtentTolerance && g.v >= -kExtentTolerance &&
         g.u <= map.width() + kExtentTolerance && g.v <= map.height() + kExtentTolerance;
}

CellIndex world_to_cell(const OccupancyGridMap& map, WorldPoint p) {
  if (!in_extent(map, p)) {
    throw Error(ErrorCode::kOutOfBounds, "point outside map extent",
                "(" + format_double(p.x) + ", " + format_double(p.y) + ")");
  }
  const GridPoint g = world_to_grid(map, p);
  const int col = std::clamp(static_cast<int>(std::floor(g.u)), 0, map.width() - 1);
  const int row = std::clamp(static_cast<int>(std::floor(g.v)), 0, map.height() - 1);
  return {col, row};
}

WorldPoint cell_to_world(const OccupancyGridMap& map, CellIndex c) {
  if (!map.in_bounds(c)) throw Error(ErrorCode::kOutOfBounds, "cell outside map");
  return grid_to_world(map, {c.col + 0.5, c.row + 0.5});
}

std::uint8_t occupancy_to_pixel(double value, bool negate) {
  if (value < 0.0) return negate ? kUnknownPixelNegated : kUnknownPixel;
  const double level = negate ? 255.0 * value : 255.0 * (1.0 - value);
  return static_cast<std::uint8_t>(std::clamp(std::lround(level), 0L, 255L));
}

double pixel_to_occupancy(std::uint8_t pixel, bool negate) {
  return negate ? pixel / 255.0 : (255.0 - pixel) / 255.0;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), end);
}

// --- PGM -----------------------------------------------------------------

namespace {

// Reads the next whitespace-delimited header token, skipping comments.
std::string next_token(const std::vector<std::uint8_t>& data, std::size_t& pos) {
  while (pos < data.size()) {
    const char ch = static_cast<char>(data[pos]);
    if (ch == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(ch))) {
      ++pos;
    } else {
      break;
    }
  }
  std::string token;
  while (pos < data.size() && !std::isspace(data[pos]) && data[pos] != '#') {
    token.push_back(static_cast<char>(data[pos++]));
  }
  return token;
}

int parse_header_int(const std::string& token, const char* what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw Error(ErrorCode::kParse, std::string("malformed PGM header: bad ") + what, token);
  }
  return value;
}

}  // namespace

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open image", path.string());
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  if (next_token(data, pos) != "P5") {
    throw Error(ErrorCode::kParse, "malformed PGM header: expected P5", path.string());
  }
  GrayImage image;
  image.width = parse_header_int(next_token(data, pos), "width");
  image.height = parse_header_int(next_token(data, pos), "height");
  const int maxval = parse_header_int(next_token(data, pos), "maxval");
  if (image.width <= 0 || image.height <= 0) {
    throw Error(ErrorCode::kParse, "malformed PGM header: non-positive size", path.string());
  }
  if (maxval != 255) {
    throw Error(ErrorCode::kParse, "unsupported PGM maxval (need 255)", std::to_string(maxval));
  }
  // Exactly one whitespace byte separates the header from the raster.
  if (pos >= data.size() || !std::isspace(data[pos])) {
    throw Error(ErrorCode::kParse, "malformed PGM header: missing raster separator");
  }
  ++pos;
  const std::size_t expected =
      static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  if (data.size() - pos != expected) {
    throw Error(ErrorCode::kParse, "PGM raster size inconsistent with header",
                "expected " + std::to_string(expected) + " bytes, found " +
                    std::to_string(data.size() - pos));
  }
  image.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
  return image;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header =
      "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  const auto bytes = encode_pgm(image);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write image", path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed", path.string());
}

GrayImage map_to_image(const OccupancyGridMap& map) {
  GrayImage image{map.width(), map.height(), {}};
  image.pixels.resize(map.cell_count());
  for (int row = 0; row < map.height(); ++row) {
    const int image_row = map.height() - 1 - row;
    for (int col = 0; col < map.width(); ++col) {
      image.pixels[static_cast<std::size_t>(image_row) * map.width() + col] =
          occupancy_to_pixel(map.at({col, row}), map.negate());
    }
  }
  return image;
}

// --- YAML metadata -----------------------------------------------------------

namespace {

template <typename T>
T required(const YAML::Node& root, const char* key) {
  const YAML::Node node = root[key];
  if (!node) throw Error(ErrorCode::kParse, std::string("map metadata missing field '") + key + "'");
  try {
    return node.as<T>();
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, std::string("map metadata field '") + key + "' malformed",
                e.what());
  }
}

}  // namespace

OccupancyGridMap load_map(const std::filesystem::path& metadata_path, std::optional<LoadMode> mode_override) {
  if (!std::filesystem::exists(metadata_path)) {
    throw Error(ErrorCode::kIo, "map metadata not found", metadata_path.string());
  }
  YAML::Node root;
  try {
    root = YAML::LoadFile(metadata_path.string());
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kParse, "malformed map metadata", e.what());
  }
  if (!root.IsMap()) throw Error(ErrorCode::kParse, "map metadata must be a mapping");

  const auto image_name = required<std::string>(root, "image");
  const auto resolution = required<double>(root, "resolution");
  const auto origin = required<std::vector<double>>(root, "origin");
  const auto negate = required<int>(root, "negate");
  const auto occupied_thresh = required<double>(root, "occupied_thresh");
  const auto free_thresh = required<double>(root, "free_thresh");
  LoadMode mode = LoadMode::kTrinary;
  if (root["mode"]) {
    const auto mode_name = required<std::string>(root, "mode");
    if (mode_name == "trinary") {
      mode = LoadMode::kTrinary;
    } else if (mode_name == "raw") {
      mode = LoadMode::kRaw;
    } else {
      throw Error(ErrorCode::kParse, "unsupported map mode", mode_name);
    }
  }
  if (mode_override) mode = *mode_override;
  if (origin.size() != 3) throw Error(ErrorCode::kParse, "origin must be [x, y, yaw]");
  if (negate != 0 && negate != 1) throw Error(ErrorCode::kParse, "negate must be 0 or 1");

  std::filesystem::path image_path = image_name;
  if (image_path.is_relative()) image_path = metadata_path.parent_path() / image_path;
  const GrayImage image = read_pgm(image_path);

  OccupancyGridMap map(image.width, image.height, resolution, {origin[0], origin[1], origin[2]});
  map.set_thresholds(free_thresh, occupied_thresh);
  map.set_negate(negate == 1);
  map.set_mode(mode);
  for (int image_row = 0; image_row < image.height; ++image_row) {
    const int row = image.height - 1 - image_row;
    for (int col = 0; col < image.width; ++col) {
      const std::uint8_t pixel =
          image.pixels[static_cast<std::size_t>(image_row) * image.width + col];
      double p = pixel_to_occupancy(pixel, negate == 1);
      if (mode == LoadMode::kTrinary && p > free_thresh && p < occupied_thresh) {
        p = OccupancyGridMap::kUnknown;
      }
      map.set({col, row}, p);
    }
  }
  return map;
}

void save_map(const OccupancyGridMap& map, const std::filesystem::path& metadata_path) {
  std::filesystem::path image_path = metadata_path;
  image_path.replace_extension(".pgm");
  write_pgm(map_to_image(map), image_path);

  std::ostringstream yaml;
  yaml << "image: " << image_path.filename().string() << "\n"
       << "resolution: " << format_double(map.resolution()) << "\n"
       << "origin: [" << format_double(map.origin().x) << ", " << format_double(map.origin().y)
       << ", " << format_double(map.origin().yaw) << "]\n"
       << "negate: " << (map.negate() ? 1 : 0) << "\n"
       << "occupied_thresh: " << format_double(map.occupied_thresh()) << "\n"
       << "free_thresh: " << format_double(map.free_thresh()) << "\n"
       << "mode: " << (map.mode() == LoadMode::kRaw ? "raw" : "trinary") << "\n";
  std::ofstream out(metadata_path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write map metadata", metadata_path.string());
  out << yaml.str();
  if (!out) throw Error(ErrorCode::kIo, "write failed", metadata_path.string());
}

}  // namespace border_forge
