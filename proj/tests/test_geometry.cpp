#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "border_forge/error.hpp"
#include "border_forge/geometry.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace border_forge;

namespace {

std::set<CellIndex> as_set(const CellMask& mask) {
  const auto cells = mask.cells();
  return {cells.begin(), cells.end()};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected border_forge::Error");
  return ErrorCode::kNotFound;
}

OccupancyGridMap lab() { return fixtures::free_map(244, 140, 0.025); }

}  // namespace

TEST_CASE("axis-aligned segment covers the cells it passes through") {
  const auto map = lab();
  const auto mask = rasterize_segment(map, {{0.0125, 0.0125}, {0.0875, 0.0125}});
  CHECK(as_set(mask) == std::set<CellIndex>{{0, 0}, {1, 0}, {2, 0}, {3, 0}});
}

TEST_CASE("exact diagonal picks up the cells touched at each corner") {
  // The segment passes exactly through lattice corners (1,1) and (2,2); every
  // closed cell square meeting those corners is touched.
  const auto map = lab();
  const WorldPoint a{0.0125, 0.0125}, b{0.0625, 0.0625};
  const auto mask = rasterize_segment(map, {a, b});
  const std::set<CellIndex> expected{{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}, {1, 2}, {2, 2}};
  CHECK(as_set(mask) == expected);
  CHECK(as_set(mask) == oracle::supercover(map.width(), map.height(), map.resolution(), a, b));
}

TEST_CASE("segment on a grid line takes both adjacent rows") {
  const auto map = lab();
  const auto mask = rasterize_segment(map, {{0.0125, 0.05}, {0.0625, 0.05}});
  CHECK(mask.count() == 6);
  CHECK(mask.contains({1, 1}));
  CHECK(mask.contains({1, 2}));
}

TEST_CASE("degenerate and out-of-extent segments are rejected") {
  const auto map = lab();
  CHECK(code_of([&] { rasterize_segment(map, {{1.0, 1.0}, {1.0, 1.0}}); }) == ErrorCode::kInvalidSegment);
  CHECK(code_of([&] { rasterize_segment(map, {{1.0, 1.0}, {7.0, 1.0}}); }) == ErrorCode::kOutOfBounds);
  CHECK(code_of([&] { rasterize_segment(map, {{-0.1, 1.0}, {1.0, 1.0}}); }) == ErrorCode::kOutOfBounds);
}

TEST_CASE("supercover: sub-cell samples always land in the mask") {
  const auto map = fixtures::free_map(60, 40, 0.05);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(0.0, map.extent_x()), uy(0.0, map.extent_y());
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const WorldPoint a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
    const auto mask = rasterize_segment(map, {a, b});
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    const int steps = static_cast<int>(std::ceil(len / (map.resolution() / 10.0)));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const WorldPoint p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      REQUIRE(mask.contains(world_to_cell(map, p)));
      ++checked;
    }
    if (trial < 200) {
      REQUIRE(as_set(mask) == oracle::supercover(map.width(), map.height(), map.resolution(), a, b));
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("rasterization does not depend on endpoint order") {
  const auto map = fixtures::free_map(50, 50, 0.1);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 300; ++trial) {
    const WorldPoint a{u(rng), u(rng)}, b{u(rng), u(rng)};
    REQUIRE(rasterize_segment(map, {a, b}) == rasterize_segment(map, {b, a}));
  }
  // Lattice-aligned endpoints exercise the tie cases.
  REQUIRE(rasterize_segment(map, {{0.1, 0.1}, {0.4, 0.3}}) == rasterize_segment(map, {{0.4, 0.3}, {0.1, 0.1}}));
}

TEST_CASE("closed square rasterizes to a ring") {
  const auto map = fixtures::free_map(20, 20, 0.1);
  const PolygonalChain square{{{0.55, 0.55}, {1.45, 0.55}, {1.45, 1.45}, {0.55, 1.45}}, true};
  const auto mask = rasterize_chain(map, square);
  // Cells 5..14 on each side: a 10x10 ring of 36 cells.
  CHECK(mask.count() == 36);
  for (int i = 5; i <= 14; ++i) {
    CHECK(mask.contains({i, 5}));
    CHECK(mask.contains({i, 14}));
    CHECK(mask.contains({5, i}));
    CHECK(mask.contains({14, i}));
  }
  const auto [labels, count] =
      oracle::label_components(20, 20, [&](CellIndex c) { return !mask.contains(c); });
  CHECK(count == 2);
}

TEST_CASE("open two-point chain equals its single segment") {
  const auto map = lab();
  const WorldPoint a{0.3, 0.7}, b{2.9, 1.3};
  CHECK(rasterize_chain(map, {{a, b}, false}) == rasterize_segment(map, {a, b}));
}

TEST_CASE("closed triangle splits the free cells into inside and outside") {
  const auto map = fixtures::free_map(80, 80, 0.05);
  const PolygonalChain tri{{{0.5, 0.5}, {3.5, 0.8}, {1.7, 3.3}}, true};
  const auto mask = rasterize_chain(map, tri);
  const auto [labels, count] =
      oracle::label_components(80, 80, [&](CellIndex c) { return !mask.contains(c); });
  CHECK(count == 2);
}

TEST_CASE("random star polygons always separate the grid") {
  const auto map = fixtures::free_map(100, 100, 0.05);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = fixtures::random_star_polygon(rng, {2.5, 2.5}, 3 + trial % 8, 0.4, 2.2);
    const auto mask = rasterize_chain(map, {pts, true});
    const auto [labels, count] =
        oracle::label_components(100, 100, [&](CellIndex c) { return !mask.contains(c); });
    REQUIRE(count >= 2);
  }
}

TEST_CASE("open chain extension reaches the map rectangle") {
  const auto map = fixtures::free_map(244, 140, 0.025);

  SUBCASE("horizontal chain") {
    const auto ext = extend_open_chain(map, {{{2.0, 1.0}, {4.0, 1.0}}, false});
    REQUIRE(ext.points.size() == 2);
    CHECK(ext.points[0].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ext.points[0].y == doctest::Approx(1.0));
    CHECK(ext.points[1].x == doctest::Approx(6.1));
    CHECK(ext.points[1].y == doctest::Approx(1.0));
  }

  SUBCASE("first point already on the boundary") {
    const auto ext = extend_open_chain(map, {{{0.0, 1.0}, {2.0, 1.5}}, false});
    CHECK(ext.points[0] == WorldPoint{0.0, 1.0});
    CHECK(ext.points[1].x == doctest::Approx(6.1));
    CHECK(ext.points[1].y == doctest::Approx(1.0 + 0.25 * 6.1));
  }

  SUBCASE("L-shaped chain uses only the terminal directions") {
    // Backward from (1,1) along (-1,-1) hits the corner (0,0); forward from
    // (3,1) along (1,-1) hits the bottom edge at (4,0).
    const auto ext = extend_open_chain(map, {{{1.0, 1.0}, {2.0, 2.0}, {3.0, 1.0}}, false});
    REQUIRE(ext.points.size() == 3);
    CHECK(ext.points[0].x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ext.points[0].y == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ext.points[1] == WorldPoint{2.0, 2.0});
    CHECK(ext.points[2].x == doctest::Approx(4.0));
    CHECK(ext.points[2].y == doctest::Approx(0.0).epsilon(1e-12));
  }

  SUBCASE("closed chains are rejected") {
    CHECK(code_of([&] {
            extend_open_chain(map, {{{1.0, 1.0}, {2.0, 1.0}, {2.0, 2.0}}, true});
          }) == ErrorCode::kInvalidChain);
  }
}

TEST_CASE("extension is idempotent") {
  const auto map = fixtures::free_map(244, 140, 0.025);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(0.2, 5.9), uy(0.2, 3.3);
  for (int trial = 0; trial < 200; ++trial) {
    const PolygonalChain chain{{{ux(rng), uy(rng)}, {ux(rng), uy(rng)}, {ux(rng), uy(rng)}}, false};
    const auto once = extend_open_chain(map, chain);
    const auto twice = extend_open_chain(map, once);
    REQUIRE(once.points.size() == twice.points.size());
    for (std::size_t i = 0; i < once.points.size(); ++i) {
      REQUIRE(std::abs(once.points[i].x - twice.points[i].x) <= 1e-9);
      REQUIRE(std::abs(once.points[i].y - twice.points[i].y) <= 1e-9);
    }
    CHECK(in_extent(map, once.points.front()));
    CHECK(in_extent(map, once.points.back()));
  }
}

TEST_CASE("chain validation") {
  CHECK(validate_chain({{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, true}).valid());

  const auto bowtie = validate_chain({{{0, 0}, {1, 1}, {1, 0}, {0, 1}}, true});
  CHECK(bowtie.has(ChainIssueKind::kSelfIntersection));

  CHECK(validate_chain({{{0, 0}}, false}).has(ChainIssueKind::kArity));
  CHECK(validate_chain({{{0, 0}, {1, 0}}, true}).has(ChainIssueKind::kArity));
  CHECK(validate_chain({{{0, 0}, {1, 0}, {1, 0}}, false}).has(ChainIssueKind::kRepeatedPoint));
  CHECK(validate_chain({{{0, 0}, {1, 0}, {1, 1}, {0, 0}}, true}).has(ChainIssueKind::kRepeatedPoint));
  CHECK(validate_chain({{{0, 0}, {NAN, 0}}, false}).has(ChainIssueKind::kNonFinite));
  // Folding back over the previous segment is a self-intersection.
  CHECK(validate_chain({{{0, 0}, {2, 0}, {1, 0}}, false}).has(ChainIssueKind::kSelfIntersection));
  // A plain zig-zag is a simple arc.
  CHECK(validate_chain({{{0, 0}, {1, 1}, {2, 0}, {3, 1}}, false}).valid());
  CHECK_FALSE(bowtie.summary().empty());

  CHECK(code_of([] { require_valid_chain({{{0, 0}}, false}); }) == ErrorCode::kInvalidChain);
}

TEST_CASE("segment intersection predicate") {
  CHECK(segments_intersect({0, 0}, {2, 2}, {0, 2}, {2, 0}));
  CHECK(segments_intersect({0, 0}, {1, 0}, {1, 0}, {2, 5}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {0, 1}, {1, 1}));
  CHECK(segments_intersect({0, 0}, {2, 0}, {1, 0}, {3, 0}));
  CHECK_FALSE(segments_intersect({0, 0}, {1, 0}, {2, 0}, {3, 0}));
}
