#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lbs {

using ZoneId = std::string;

/// Planar position in meters relative to the map origin (x east, y north).
struct GeoPoint {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

double distance(GeoPoint a, GeoPoint b) noexcept;

struct Zone {
  ZoneId zone_id;
  std::string display_name;
  std::vector<GeoPoint> polygon;
};

/// The validated service map: zones plus the RFID tag table.
///
/// Construction enforces that zone ids are unique, every polygon is simple
/// with positive area, zone interiors do not overlap, and every tag points at
/// an existing zone. Violations throw Error(ConfigError).
class ZoneMap {
 public:
  ZoneMap() = default;
  ZoneMap(std::vector<Zone> zones, std::map<std::string, ZoneId> rfid_tags);

  /// Zones ordered by zone_id.
  const std::vector<Zone>& zones() const noexcept { return zones_; }
  const std::map<std::string, ZoneId>& rfid_tags() const noexcept { return rfid_tags_; }

  const Zone* find(std::string_view zone_id) const noexcept;
  bool contains(std::string_view zone_id) const noexcept { return find(zone_id) != nullptr; }

  /// Throws Error(UnknownZone) when absent.
  const Zone& at(std::string_view zone_id) const;

 private:
  std::vector<Zone> zones_;
  std::map<std::string, ZoneId> rfid_tags_;
};

/// A range measurement to a beacon at a known position.
struct BeaconObservation {
  GeoPoint beacon;
  double distance = 0.0;
};

/// Trilateration output. `rms_residual` is sqrt(mean((|p - b_i| - d_i)^2)) at
/// `point`, left for callers to threshold.
struct Fix {
  GeoPoint point;
  double rms_residual = 0.0;
};

/// Least-squares position from three or more beacon ranges.
///
/// The range equations are linearized by subtracting the first one, solved in
/// the least-squares sense, and the estimate is refined by Gauss-Newton passes
/// on the true objective sum((|p - b_i| - d_i)^2) until the step vanishes.
/// No pass is allowed to increase the objective.
///
/// Throws Underdetermined for fewer than three observations, DegenerateGeometry
/// when the beacons are collinear (normal matrix condition below 1e-9), and
/// InvalidField for non-finite or negative inputs.
Fix trilaterate(std::span<const BeaconObservation> observations);

/// Boundary points count as inside.
bool point_in_polygon(GeoPoint p, std::span<const GeoPoint> polygon) noexcept;

/// Shoelace area, positive for counter-clockwise vertex order.
double signed_area(std::span<const GeoPoint> polygon) noexcept;

/// True when no two non-adjacent edges touch.
bool is_simple_polygon(std::span<const GeoPoint> polygon) noexcept;

struct ResolvedLocation {
  ZoneId zone_id;
  GeoPoint point;
  double rms_residual = 0.0;
};

/// Trilaterate, then pick the zone containing the point. On shared boundaries
/// the lexicographically smallest zone_id wins. Throws NotCovered when no zone
/// contains the point.
ResolvedLocation resolve_gps(std::span<const BeaconObservation> observations, const ZoneMap& map);

/// Zone containing `p` with the same tie-break as resolve_gps.
ZoneId zone_at(GeoPoint p, const ZoneMap& map);

/// Throws UnknownTag when the tag is not mapped.
ZoneId resolve_rfid(std::string_view tag_id, const ZoneMap& map);

}  // namespace lbs
