#include <lbs/geolocation.hpp>

#include <lbs/error.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace lbs {

namespace {

// Coordinates closer than this to an edge are treated as on it.
constexpr double kEdgeTolerance = 1e-9;
constexpr double kConditionFloor = 1e-9;

double cross(GeoPoint o, GeoPoint a, GeoPoint b) noexcept {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(GeoPoint o, GeoPoint a, GeoPoint b) noexcept {
  const double c = cross(o, a, b);
  return (c > 0) - (c < 0);
}

bool within_box(GeoPoint a, GeoPoint b, GeoPoint p) noexcept {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

double segment_distance(GeoPoint p, GeoPoint a, GeoPoint b) noexcept {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return distance(p, a);
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return distance(p, GeoPoint{a.x + t * dx, a.y + t * dy});
}

bool on_boundary(GeoPoint p, std::span<const GeoPoint> polygon) noexcept {
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (segment_distance(p, polygon[i], polygon[(i + 1) % n]) <= kEdgeTolerance) return true;
  }
  return false;
}

// Closed-segment intersection, touching included.
bool segments_touch(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) noexcept {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && within_box(a, b, c)) return true;
  if (o2 == 0 && within_box(a, b, d)) return true;
  if (o3 == 0 && within_box(c, d, a)) return true;
  if (o4 == 0 && within_box(c, d, b)) return true;
  return false;
}

bool segments_cross_properly(GeoPoint a, GeoPoint b, GeoPoint c, GeoPoint d) noexcept {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

bool strictly_inside(GeoPoint p, std::span<const GeoPoint> polygon) noexcept {
  return point_in_polygon(p, polygon) && !on_boundary(p, polygon);
}

std::vector<GeoPoint> interior_samples(std::span<const GeoPoint> polygon) {
  std::vector<GeoPoint> candidates;
  const std::size_t n = polygon.size();
  GeoPoint mean{};
  for (const auto& v : polygon) {
    mean.x += v.x / static_cast<double>(n);
    mean.y += v.y / static_cast<double>(n);
  }
  candidates.push_back(mean);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = polygon[(i + n - 1) % n];
    const auto& b = polygon[i];
    const auto& c = polygon[(i + 1) % n];
    candidates.push_back({(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0});
  }
  std::vector<GeoPoint> out;
  for (const auto& p : candidates) {
    if (strictly_inside(p, polygon)) out.push_back(p);
  }
  return out;
}

bool interiors_overlap(const Zone& a, const Zone& b) {
  const auto& pa = a.polygon;
  const auto& pb = b.polygon;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const GeoPoint a0 = pa[i];
    const GeoPoint a1 = pa[(i + 1) % pa.size()];
    for (std::size_t j = 0; j < pb.size(); ++j) {
      if (segments_cross_properly(a0, a1, pb[j], pb[(j + 1) % pb.size()])) return true;
    }
    if (strictly_inside(a0, pb)) return true;
    if (strictly_inside({(a0.x + a1.x) / 2, (a0.y + a1.y) / 2}, pb)) return true;
  }
  for (std::size_t j = 0; j < pb.size(); ++j) {
    const GeoPoint b0 = pb[j];
    const GeoPoint b1 = pb[(j + 1) % pb.size()];
    if (strictly_inside(b0, pa)) return true;
    if (strictly_inside({(b0.x + b1.x) / 2, (b0.y + b1.y) / 2}, pa)) return true;
  }
  for (const auto& p : interior_samples(pa)) {
    if (strictly_inside(p, pb)) return true;
  }
  for (const auto& p : interior_samples(pb)) {
    if (strictly_inside(p, pa)) return true;
  }
  return false;
}

bool finite(GeoPoint p) noexcept { return std::isfinite(p.x) && std::isfinite(p.y); }

bool well_conditioned(const Eigen::Matrix2d& normal) {
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(normal);
  const auto& s = svd.singularValues();
  return s(0) > 0.0 && s(1) >= kConditionFloor * s(0);
}

constexpr int kMaxRefinements = 50;

double objective(GeoPoint p, std::span<const BeaconObservation> obs) noexcept {
  double sum = 0.0;
  for (const auto& o : obs) {
    const double r = distance(p, o.beacon) - o.distance;
    sum += r * r;
  }
  return sum;
}

}  // namespace

double distance(GeoPoint a, GeoPoint b) noexcept { return std::hypot(a.x - b.x, a.y - b.y); }

double signed_area(std::span<const GeoPoint> polygon) noexcept {
  double twice = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = polygon[i];
    const auto& b = polygon[(i + 1) % n];
    twice += a.x * b.y - b.x * a.y;
  }
  return twice / 2.0;
}

bool is_simple_polygon(std::span<const GeoPoint> polygon) noexcept {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint a = polygon[i];
    const GeoPoint b = polygon[(i + 1) % n];
    if (a == b) return false;
    // Adjacent edge folding back over this one.
    const GeoPoint c = polygon[(i + 2) % n];
    if (orientation(a, b, c) == 0 && (within_box(a, b, c) || within_box(b, c, a))) return false;
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_touch(a, b, polygon[j], polygon[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool point_in_polygon(GeoPoint p, std::span<const GeoPoint> polygon) noexcept {
  const std::size_t n = polygon.size();
  if (n < 3) return false;
  if (on_boundary(p, polygon)) return true;
  // Winding number.
  int winding = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const GeoPoint a = polygon[i];
    const GeoPoint b = polygon[(i + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(a, b, p) > 0) ++winding;
    } else {
      if (b.y <= p.y && cross(a, b, p) < 0) --winding;
    }
  }
  return winding != 0;
}

ZoneMap::ZoneMap(std::vector<Zone> zones, std::map<std::string, ZoneId> rfid_tags)
    : zones_(std::move(zones)), rfid_tags_(std::move(rfid_tags)) {
  std::sort(zones_.begin(), zones_.end(),
            [](const Zone& a, const Zone& b) { return a.zone_id < b.zone_id; });
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    const Zone& z = zones_[i];
    if (z.zone_id.empty()) throw Error(ErrorCode::ConfigError, "zone with empty zone_id");
    if (i > 0 && zones_[i - 1].zone_id == z.zone_id) {
      throw Error(ErrorCode::ConfigError, "duplicate zone_id '" + z.zone_id + "'");
    }
    if (z.polygon.size() < 3) {
      throw Error(ErrorCode::ConfigError, "zone '" + z.zone_id + "' needs at least 3 vertices");
    }
    if (!std::all_of(z.polygon.begin(), z.polygon.end(), finite)) {
      throw Error(ErrorCode::ConfigError, "zone '" + z.zone_id + "' has non-finite vertex");
    }
    if (!is_simple_polygon(z.polygon)) {
      throw Error(ErrorCode::ConfigError, "zone '" + z.zone_id + "' polygon is not simple");
    }
    if (std::abs(signed_area(z.polygon)) <= 0.0) {
      throw Error(ErrorCode::ConfigError, "zone '" + z.zone_id + "' has zero area");
    }
  }
  for (std::size_t i = 0; i < zones_.size(); ++i) {
    for (std::size_t j = i + 1; j < zones_.size(); ++j) {
      if (interiors_overlap(zones_[i], zones_[j])) {
        throw Error(ErrorCode::ConfigError,
                    "zones '" + zones_[i].zone_id + "' and '" + zones_[j].zone_id + "' overlap");
      }
    }
  }
  for (const auto& [tag, zone] : rfid_tags_) {
    if (!contains(zone)) {
      throw Error(ErrorCode::ConfigError, "rfid tag '" + tag + "' maps to unknown zone '" + zone + "'");
    }
  }
}

const Zone* ZoneMap::find(std::string_view zone_id) const noexcept {
  auto it = std::lower_bound(zones_.begin(), zones_.end(), zone_id,
                             [](const Zone& z, std::string_view id) { return z.zone_id < id; });
  if (it == zones_.end() || it->zone_id != zone_id) return nullptr;
  return &*it;
}

const Zone& ZoneMap::at(std::string_view zone_id) const {
  const Zone* z = find(zone_id);
  if (z == nullptr) throw Error(ErrorCode::UnknownZone, std::string(zone_id));
  return *z;
}

Fix trilaterate(std::span<const BeaconObservation> observations) {
  if (observations.size() < 3) {
    throw Error(ErrorCode::Underdetermined,
                "need 3 observations, got " + std::to_string(observations.size()));
  }
  for (const auto& o : observations) {
    if (!finite(o.beacon) || !std::isfinite(o.distance) || o.distance < 0.0) {
      throw Error(ErrorCode::InvalidField, "observation must be finite with distance >= 0");
    }
  }

  // Subtracting the first range equation from the others leaves a linear
  // system in (x, y).
  const auto& ref = observations.front();
  const Eigen::Index rows = static_cast<Eigen::Index>(observations.size() - 1);
  Eigen::MatrixX2d a(rows, 2);
  Eigen::VectorXd b(rows);
  const double ref_norm = ref.beacon.x * ref.beacon.x + ref.beacon.y * ref.beacon.y;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& o = observations[static_cast<std::size_t>(i) + 1];
    a(i, 0) = 2.0 * (o.beacon.x - ref.beacon.x);
    a(i, 1) = 2.0 * (o.beacon.y - ref.beacon.y);
    b(i) = ref.distance * ref.distance - o.distance * o.distance +
           (o.beacon.x * o.beacon.x + o.beacon.y * o.beacon.y) - ref_norm;
  }
  const Eigen::Matrix2d normal = a.transpose() * a;
  if (!well_conditioned(normal)) {
    throw Error(ErrorCode::DegenerateGeometry, "beacons are collinear");
  }
  const Eigen::Vector2d linear = normal.ldlt().solve(a.transpose() * b);
  GeoPoint estimate{linear(0), linear(1)};

  // Gauss-Newton on the range residuals, halving any step that would raise
  // the objective.
  double cost = objective(estimate, observations);
  for (int iter = 0; iter < kMaxRefinements; ++iter) {
    Eigen::Matrix2d jtj = Eigen::Matrix2d::Zero();
    Eigen::Vector2d jtr = Eigen::Vector2d::Zero();
    for (const auto& o : observations) {
      const double dx = estimate.x - o.beacon.x;
      const double dy = estimate.y - o.beacon.y;
      const double range = std::hypot(dx, dy);
      if (range == 0.0) continue;
      const Eigen::Vector2d j(dx / range, dy / range);
      jtj += j * j.transpose();
      jtr += j * (range - o.distance);
    }
    if (!well_conditioned(jtj)) break;
    Eigen::Vector2d step = jtj.ldlt().solve(-jtr);
    GeoPoint candidate{estimate.x + step(0), estimate.y + step(1)};
    int halvings = 0;
    while (!(finite(candidate) && objective(candidate, observations) <= cost) && halvings++ < 30) {
      step *= 0.5;
      candidate = {estimate.x + step(0), estimate.y + step(1)};
    }
    if (halvings > 30) break;
    estimate = candidate;
    cost = objective(estimate, observations);
    if (step.norm() < 1e-12 * (1.0 + std::hypot(estimate.x, estimate.y))) break;
  }

  const double rms =
      std::sqrt(objective(estimate, observations) / static_cast<double>(observations.size()));
  return Fix{estimate, rms};
}

ZoneId zone_at(GeoPoint p, const ZoneMap& map) {
  // Zones are sorted, so the first hit is the smallest id.
  for (const auto& zone : map.zones()) {
    if (point_in_polygon(p, zone.polygon)) return zone.zone_id;
  }
  throw Error(ErrorCode::NotCovered,
              "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies in no zone");
}

ResolvedLocation resolve_gps(std::span<const BeaconObservation> observations, const ZoneMap& map) {
  const Fix fix = trilaterate(observations);
  return ResolvedLocation{zone_at(fix.point, map), fix.point, fix.rms_residual};
}

ZoneId resolve_rfid(std::string_view tag_id, const ZoneMap& map) {
  const auto& tags = map.rfid_tags();
  auto it = tags.find(std::string(tag_id));
  if (it == tags.end()) throw Error(ErrorCode::UnknownTag, std::string(tag_id));
  return it->second;
}

}  // namespace lbs
