#include <lbs/geolocation.hpp>
#include <lbs/error.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lbs;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an lbs::Error";
  return ErrorCode::InternalError;
}

std::vector<BeaconObservation> exact_ranges(GeoPoint p, std::initializer_list<GeoPoint> beacons) {
  std::vector<BeaconObservation> out;
  for (auto b : beacons) out.push_back({b, std::hypot(p.x - b.x, p.y - b.y)});
  return out;
}

}  // namespace

TEST(Trilaterate, ExactRangesRecoverThePoint) {
  const std::vector<BeaconObservation> obs{{{0, 0}, 5.0}, {{10, 0}, std::sqrt(65.0)}, {{0, 10}, std::sqrt(45.0)}};
  const Fix fix = trilaterate(obs);
  EXPECT_NEAR(fix.point.x, 3.0, 1e-6);
  EXPECT_NEAR(fix.point.y, 4.0, 1e-6);
  EXPECT_NEAR(fix.rms_residual, 0.0, 1e-9);
}

TEST(Trilaterate, FewerThanThreeIsUnderdetermined) {
  const std::vector<BeaconObservation> two{{{0, 0}, 1.0}, {{10, 0}, 9.0}};
  EXPECT_EQ(code_of([&] { trilaterate(two); }), ErrorCode::Underdetermined);
  EXPECT_EQ(code_of([&] { trilaterate({}); }), ErrorCode::Underdetermined);
}

TEST(Trilaterate, CollinearBeaconsAreDegenerate) {
  const std::vector<BeaconObservation> obs{{{0, 0}, 1.0}, {{5, 0}, 4.0}, {{10, 0}, 9.0}};
  EXPECT_EQ(code_of([&] { trilaterate(obs); }), ErrorCode::DegenerateGeometry);
  const std::vector<BeaconObservation> same{{{1, 1}, 1.0}, {{1, 1}, 1.0}, {{1, 1}, 1.0}};
  EXPECT_EQ(code_of([&] { trilaterate(same); }), ErrorCode::DegenerateGeometry);
}

TEST(Trilaterate, RejectsNonFiniteOrNegativeInput) {
  std::vector<BeaconObservation> obs{{{0, 0}, 5.0}, {{10, 0}, -1.0}, {{0, 10}, 3.0}};
  EXPECT_EQ(code_of([&] { trilaterate(obs); }), ErrorCode::InvalidField);
  obs[1].distance = NAN;
  EXPECT_EQ(code_of([&] { trilaterate(obs); }), ErrorCode::InvalidField);
  obs[1] = {{INFINITY, 0}, 1.0};
  EXPECT_EQ(code_of([&] { trilaterate(obs); }), ErrorCode::InvalidField);
}

TEST(Trilaterate, NoisyCaseMatchesFullGridOracle) {
  const GeoPoint truth{3, 4};
  auto obs = exact_ranges(truth, {{0, 0}, {10, 0}, {0, 10}});
  obs[0].distance += 0.1;
  obs[1].distance -= 0.1;
  obs[2].distance += 0.05;
  const Fix fix = trilaterate(obs);
  const auto best = oracle::grid_search(obs, 0, 10, 0, 10, 0.001);
  EXPECT_LE(distance(fix.point, best.point), 0.05);
}

TEST(Trilaterate, OutputIsOptimalOnSurroundingMillimetreGrid) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> pos(0, 100), noise(-0.5, 0.5);
  int checked = 0;
  while (checked < 100) {
    std::vector<BeaconObservation> obs;
    for (int i = 0; i < 3 + checked % 3; ++i) obs.push_back({{pos(rng), pos(rng)}, 0});
    if (oracle::triangle_area(obs[0].beacon, obs[1].beacon, obs[2].beacon) < 10) continue;
    const GeoPoint truth{pos(rng), pos(rng)};
    for (auto& o : obs) o.distance = std::max(0.0, distance(truth, o.beacon) + noise(rng));
    ++checked;
    const Fix fix = trilaterate(obs);
    const double at = oracle::range_cost(fix.point.x, fix.point.y, obs);
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        const double around = oracle::range_cost(fix.point.x + dx * 1e-3, fix.point.y + dy * 1e-3, obs);
        EXPECT_LE(at, around + 1e-12) << "instance " << checked;
      }
    }
    const double rms = std::sqrt(at / static_cast<double>(obs.size()));
    EXPECT_NEAR(fix.rms_residual, rms, 1e-9);
  }
}

TEST(PointInPolygon, UnitSquareExamples) {
  const auto sq = fixture::rect(0, 0, 1, 1);
  EXPECT_TRUE(point_in_polygon({0.5, 0.5}, sq));
  EXPECT_FALSE(point_in_polygon({2, 2}, sq));
  EXPECT_TRUE(point_in_polygon({0, 0.5}, sq));
  EXPECT_TRUE(point_in_polygon({1, 1}, sq));
  EXPECT_FALSE(point_in_polygon({1 + 1e-6, 0.5}, sq));
}

TEST(PointInPolygon, ConcavePolygon) {
  // L shape: notch at the upper right.
  const std::vector<GeoPoint> l{{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}};
  EXPECT_TRUE(point_in_polygon({0.5, 1.5}, l));
  EXPECT_TRUE(point_in_polygon({1.5, 0.5}, l));
  EXPECT_FALSE(point_in_polygon({1.5, 1.5}, l));
  EXPECT_TRUE(point_in_polygon({1.5, 1}, l));
}

TEST(PointInPolygon, OrientationDoesNotMatter) {
  auto poly = fixture::rect(0, 0, 3, 2);
  std::vector<GeoPoint> cw(poly.rbegin(), poly.rend());
  EXPECT_TRUE(point_in_polygon({1, 1}, cw));
  EXPECT_FALSE(point_in_polygon({4, 1}, cw));
}

TEST(PointInPolygon, AgreesWithCrossingNumberOracle) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0, 100);
  std::uniform_int_distribution<int> npts(3, 12);
  int disagreements = 0, checked = 0;
  while (checked < 300) {
    std::vector<GeoPoint> pts(npts(rng));
    for (auto& p : pts) p = {u(rng), u(rng)};
    const auto hull = oracle::convex_hull(pts);
    if (hull.size() < 3) continue;
    const GeoPoint q{u(rng), u(rng)};
    if (oracle::distance_to_boundary(q, hull) < 1e-9) continue;
    ++checked;
    disagreements += point_in_polygon(q, hull) != oracle::crossing_number_inside(q, hull);
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(Polygon, AreaAndSimplicity) {
  EXPECT_DOUBLE_EQ(signed_area(fixture::rect(0, 0, 2, 3)), 6.0);
  const auto sq = fixture::rect(0, 0, 2, 3);
  EXPECT_DOUBLE_EQ(signed_area(std::vector<GeoPoint>(sq.rbegin(), sq.rend())), -6.0);
  EXPECT_TRUE(is_simple_polygon(sq));
  const std::vector<GeoPoint> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}};
  EXPECT_FALSE(is_simple_polygon(bowtie));
  const std::vector<GeoPoint> spike{{0, 0}, {2, 0}, {1, 0}, {1, 1}};
  EXPECT_FALSE(is_simple_polygon(spike));
}

TEST(ZoneMap, SortsZonesById) {
  const ZoneMap map({fixture::zone("b", fixture::rect(1, 0, 2, 1)), fixture::zone("a", fixture::rect(0, 0, 1, 1))}, {});
  ASSERT_EQ(map.zones().size(), 2u);
  EXPECT_EQ(map.zones()[0].zone_id, "a");
  EXPECT_TRUE(map.contains("b"));
  EXPECT_EQ(code_of([&] { map.at("c"); }), ErrorCode::UnknownZone);
}

TEST(ZoneMap, RejectsInvalidMaps) {
  using fixture::rect;
  using fixture::zone;
  auto bad = [](std::vector<Zone> zs, std::map<std::string, ZoneId> tags = {}) {
    return code_of([&] { ZoneMap(std::move(zs), std::move(tags)); });
  };
  EXPECT_EQ(bad({zone("a", rect(0, 0, 1, 1)), zone("a", rect(5, 5, 6, 6))}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", {{0, 0}, {1, 1}, {1, 0}, {0, 1}})}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", {{0, 0}, {1, 1}, {2, 2}})}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", {{0, 0}, {1, 1}})}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", rect(0, 0, 1, 1))}, {{"T-1", "b"}}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", rect(0, 0, 2, 2)), zone("b", rect(1, 1, 3, 3))}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", rect(0, 0, 4, 4)), zone("b", rect(1, 1, 2, 2))}), ErrorCode::ConfigError);
  EXPECT_EQ(bad({zone("a", rect(0, 0, 1, 1)), zone("b", rect(0, 0, 1, 1))}), ErrorCode::ConfigError);
}

TEST(ZoneMap, AdjacentZonesAreAllowed) {
  EXPECT_NO_THROW(ZoneMap({fixture::zone("a", fixture::rect(0, 0, 1, 1)), fixture::zone("b", fixture::rect(1, 0, 2, 1)),
                           fixture::zone("c", fixture::rect(0, 1, 2, 2))},
                          {}));
}

TEST(ResolveGps, ExactObservationsInsideZone) {
  const ZoneMap map({fixture::zone("A", fixture::rect(0, 0, 10, 10))}, {});
  const auto loc = resolve_gps(exact_ranges({3, 4}, {{0, 0}, {10, 0}, {0, 10}}), map);
  EXPECT_EQ(loc.zone_id, "A");
  EXPECT_NEAR(loc.point.x, 3, 1e-6);
  EXPECT_NEAR(loc.point.y, 4, 1e-6);
}

TEST(ResolveGps, OutsideEveryZoneIsNotCovered) {
  const ZoneMap map({fixture::zone("A", fixture::rect(0, 0, 10, 10))}, {});
  EXPECT_EQ(code_of([&] { resolve_gps(exact_ranges({50, 50}, {{0, 0}, {10, 0}, {0, 10}}), map); }),
            ErrorCode::NotCovered);
}

TEST(ResolveGps, SharedBoundaryGoesToSmallestZoneId) {
  const ZoneMap map({fixture::zone("B", fixture::rect(0, 0, 10, 10)), fixture::zone("A", fixture::rect(10, 0, 20, 10))}, {});
  EXPECT_EQ(zone_at({10, 5}, map), "A");
  EXPECT_EQ(zone_at({5, 5}, map), "B");
  EXPECT_EQ(resolve_gps(exact_ranges({10, 5}, {{0, 0}, {20, 0}, {0, 20}}), map).zone_id, "A");
}

TEST(ResolveGps, PropagatesTrilaterationErrors) {
  const ZoneMap map({fixture::zone("A", fixture::rect(0, 0, 10, 10))}, {});
  EXPECT_EQ(code_of([&] { resolve_gps(exact_ranges({3, 4}, {{0, 0}, {10, 0}}), map); }), ErrorCode::Underdetermined);
}

TEST(ResolveGps, EveryCoveredPointHasExactlyOneZone) {
  const ZoneMap map = fixture::strip_map(4);
  for (double x = 0; x <= 400; x += 12.5) {
    for (double y = 0; y <= 100; y += 12.5) {
      int containing = 0;
      for (const auto& z : map.zones()) containing += point_in_polygon({x, y}, z.polygon);
      ASSERT_GE(containing, 1);
      const ZoneId chosen = zone_at({x, y}, map);
      // On a shared edge the smallest id among containing zones wins.
      for (const auto& z : map.zones()) {
        if (point_in_polygon({x, y}, z.polygon)) {
          EXPECT_EQ(chosen, z.zone_id);
          break;
        }
      }
    }
  }
}

TEST(ResolveRfid, TableLookup) {
  const ZoneMap map({fixture::zone("downtown", fixture::rect(0, 0, 1, 1))}, {{"T-17", "downtown"}});
  EXPECT_EQ(resolve_rfid("T-17", map), "downtown");
  EXPECT_EQ(code_of([&] { resolve_rfid("missing", map); }), ErrorCode::UnknownTag);
}

TEST(ResolveRfid, SucceedsIffTagIsMapped) {
  const ZoneMap map = fixture::strip_map(5);
  for (const auto& [tag, zone] : map.rfid_tags()) EXPECT_EQ(resolve_rfid(tag, map), zone);
  for (const char* tag : {"", "T-z99", "t-z00", "T-z00 "}) {
    EXPECT_EQ(code_of([&] { resolve_rfid(tag, map); }), ErrorCode::UnknownTag) << tag;
  }
}
