#include <hcx/geometry.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace hcx;

TEST_CASE("signed distance of a disk") {
  Disk d{{1.0, 2.0}, 0.5};
  CHECK(signed_distance(d, Vec2(1, 2)) == Catch::Approx(-0.5));
  CHECK(signed_distance(d, Vec2(1.5, 2)) == Catch::Approx(0.0).margin(1e-15));
  CHECK(signed_distance(d, Vec2(3, 2)) == Catch::Approx(1.5));
}

TEST_CASE("signed distance of a rectangle") {
  Rect r{0, 0, 2, 1};
  CHECK(signed_distance(r, Vec2(1, 0.5)) == Catch::Approx(-0.5));
  CHECK(signed_distance(r, Vec2(0.1, 0.5)) == Catch::Approx(-0.1));
  CHECK(signed_distance(r, Vec2(3, 0.5)) == Catch::Approx(1.0));
  CHECK(signed_distance(r, Vec2(3, 2)) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("polygon area and point membership") {
  Polygon square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK(polygon_signed_area(square.vertices) == Catch::Approx(1.0));
  std::vector<Vec2> cw(square.vertices.rbegin(), square.vertices.rend());
  CHECK(polygon_signed_area(cw) == Catch::Approx(-1.0));
  CHECK(point_in_polygon(Vec2(0.5, 0.5), square.vertices));
  CHECK_FALSE(point_in_polygon(Vec2(1.5, 0.5), square.vertices));
  CHECK(signed_distance(square, Vec2(0.5, 0.5)) == Catch::Approx(-0.5));
  CHECK(signed_distance(square, Vec2(2, 0.5)) == Catch::Approx(1.0));
}

TEST_CASE("segment distance clamps to endpoints") {
  CHECK(dist_point_segment(Vec2(2, 1), Vec2(0, 0), Vec2(1, 0)) == Catch::Approx(std::sqrt(2.0)));
  CHECK(dist_point_segment(Vec2(0.5, 1), Vec2(0, 0), Vec2(1, 0)) == Catch::Approx(1.0));
}

TEST_CASE("shape area and diameter") {
  CHECK(shape_area(InclusionShape(Disk{{0, 0}, 0.25})) == Catch::Approx(M_PI * 0.0625));
  Polygon tri{{{0, 0}, {2, 0}, {0, 1}}};
  CHECK(shape_area(InclusionShape(tri)) == Catch::Approx(1.0));
  CHECK(shape_diameter(InclusionShape(tri)) == Catch::Approx(std::sqrt(5.0)));
  CHECK(shape_diameter(InclusionShape(Disk{{0, 0}, 0.25})) == Catch::Approx(0.5));
}

TEST_CASE("disk pair gap") {
  InclusionShape a = Disk{{0, 0}, 0.5};
  InclusionShape b = Disk{{2, 0}, 0.5};
  CHECK(boundary_gap(a, b) == Catch::Approx(1.0));
}

TEST_CASE("geometry validation rejects bad input") {
  GeometrySpec spec;
  spec.outer = Rect{0, 0, 1, 1};
  spec.target_h = 0.05;

  SECTION("valid single disk passes") {
    spec.inclusions = {Disk{{0.5, 0.5}, 0.2}};
    CHECK_NOTHROW(validate_geometry(spec));
  }
  SECTION("nonpositive mesh size") {
    spec.target_h = 0;
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
  SECTION("degenerate outer rectangle") {
    spec.outer = Rect{0, 0, 0, 1};
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
  SECTION("inclusion too close to the outer boundary") {
    spec.inclusions = {Disk{{0.5, 0.95}, 0.04}};
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
  SECTION("overlapping inclusions") {
    spec.inclusions = {Disk{{0.4, 0.5}, 0.15}, Disk{{0.6, 0.5}, 0.15}};
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
  SECTION("clockwise polygon") {
    spec.inclusions = {Polygon{{{0.4, 0.4}, {0.4, 0.6}, {0.6, 0.6}, {0.6, 0.4}}}};
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
  SECTION("polygon with too few vertices") {
    spec.inclusions = {Polygon{{{0.4, 0.4}, {0.6, 0.4}}}};
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
  SECTION("nonpositive disk radius") {
    spec.inclusions = {Disk{{0.5, 0.5}, 0.0}};
    CHECK_THROWS_AS(validate_geometry(spec), GeometryError);
  }
}

TEST_CASE("ring layouts match the preset inclusion counts") {
  GeometrySpec d36 = preset_disk36();
  REQUIRE(d36.inclusions.size() == 36);
  CHECK(std::holds_alternative<Disk>(d36.outer));
  // Center inclusion at the origin, first ring at radius 0.26.
  const Disk& center = std::get<Disk>(d36.inclusions[0]);
  CHECK(center.center.norm() == Catch::Approx(0.0).margin(1e-15));
  CHECK(center.radius == Catch::Approx(0.07));
  const Disk& ring1 = std::get<Disk>(d36.inclusions[1]);
  CHECK(ring1.center.norm() == Catch::Approx(0.26));
  CHECK_NOTHROW(validate_geometry(d36));

  GeometrySpec d60 = preset_disk60();
  REQUIRE(d60.inclusions.size() == 60);
  CHECK_NOTHROW(validate_geometry(d60));

  GeometrySpec sq = preset_square_polygon();
  REQUIRE(sq.inclusions.size() == 1);
  CHECK(std::holds_alternative<Polygon>(sq.inclusions[0]));
  CHECK(sq.target_h == Catch::Approx(1.0 / 32));
  CHECK_NOTHROW(validate_geometry(sq));
}

TEST_CASE("geometry fingerprint is stable and sensitive") {
  GeometrySpec a = preset_disk36();
  GeometrySpec b = preset_disk36();
  CHECK(geometry_fingerprint(a) == geometry_fingerprint(b));
  b.target_h *= 2;
  CHECK(geometry_fingerprint(a) != geometry_fingerprint(b));
  GeometrySpec c = preset_disk36();
  std::get<Disk>(c.inclusions[3]).radius += 1e-9;
  CHECK(geometry_fingerprint(a) != geometry_fingerprint(c));
}

TEST_CASE("bounding box of outer shapes") {
  Rect bb = bounding_box(OuterShape(Disk{{1, 1}, 2}));
  CHECK(bb.x0 == Catch::Approx(-1));
  CHECK(bb.y1 == Catch::Approx(3));
}
