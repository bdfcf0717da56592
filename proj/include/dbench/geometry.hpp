#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace dbench {

template <typename Scalar>
using Vec2T = Eigen::Matrix<Scalar, 2, 1>;
using Vec2 = Vec2T<double>;

template <typename Scalar>
using Rot2T = Eigen::Matrix<Scalar, 2, 2>;

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
template <typename Scalar>
Scalar normalize_angle(Scalar a) {
  const Scalar two_pi = Scalar(2 * kPi);
  a = std::fmod(a, two_pi);
  if (a <= -Scalar(kPi)) a += two_pi;
  if (a > Scalar(kPi)) a -= two_pi;
  return a;
}

template <typename Scalar>
Rot2T<Scalar> rotation(Scalar angle) {
  const Scalar c = std::cos(angle);
  const Scalar s = std::sin(angle);
  Rot2T<Scalar> r;
  r << c, -s, s, c;
  return r;
}

template <typename Scalar>
Vec2T<Scalar> heading_vector(Scalar angle) {
  return Vec2T<Scalar>(std::cos(angle), std::sin(angle));
}

template <typename Scalar>
Scalar cross(const Vec2T<Scalar>& a, const Vec2T<Scalar>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

/// Rectangle with its center, orientation and extents. Corners are ordered
/// counter-clockwise starting at the front-left corner.
template <typename Scalar>
struct OrientedBox {
  Vec2T<Scalar> center = Vec2T<Scalar>::Zero();
  Scalar heading = 0;
  Scalar length = 0;
  Scalar width = 0;

  Vec2T<Scalar> axis_long() const { return heading_vector(heading); }
  Vec2T<Scalar> axis_lat() const {
    const auto f = axis_long();
    return Vec2T<Scalar>(-f.y(), f.x());
  }

  std::array<Vec2T<Scalar>, 4> corners() const {
    const Vec2T<Scalar> f = axis_long() * (length / 2);
    const Vec2T<Scalar> l = axis_lat() * (width / 2);
    return {center + f + l, center - f + l, center - f - l, center + f - l};
  }

  /// Point expressed in the box frame (x forward, y left).
  Vec2T<Scalar> to_local(const Vec2T<Scalar>& p) const {
    const Vec2T<Scalar> d = p - center;
    return Vec2T<Scalar>(d.dot(axis_long()), d.dot(axis_lat()));
  }

  bool contains(const Vec2T<Scalar>& p) const {
    const auto q = to_local(p);
    return std::abs(q.x()) <= length / 2 && std::abs(q.y()) <= width / 2;
  }

  Scalar area() const { return length * width; }
  Scalar circumradius() const { return std::hypot(length, width) / 2; }
};

using Box = OrientedBox<double>;

namespace detail {
template <typename Scalar>
void project_onto(const std::array<Vec2T<Scalar>, 4>& pts, const Vec2T<Scalar>& axis,
                  Scalar& lo, Scalar& hi) {
  lo = hi = pts[0].dot(axis);
  for (int i = 1; i < 4; ++i) {
    const Scalar v = pts[i].dot(axis);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
}
}  // namespace detail

/// Separating-axis test. Boxes that merely touch along an edge do not overlap.
template <typename Scalar>
bool overlaps(const OrientedBox<Scalar>& a, const OrientedBox<Scalar>& b) {
  const Scalar reach = a.circumradius() + b.circumradius();
  if ((a.center - b.center).squaredNorm() >= reach * reach) return false;
  const auto ca = a.corners();
  const auto cb = b.corners();
  const std::array<Vec2T<Scalar>, 4> axes = {a.axis_long(), a.axis_lat(), b.axis_long(),
                                             b.axis_lat()};
  for (const auto& axis : axes) {
    Scalar alo, ahi, blo, bhi;
    detail::project_onto(ca, axis, alo, ahi);
    detail::project_onto(cb, axis, blo, bhi);
    if (ahi <= blo || bhi <= alo) return false;
  }
  return true;
}

/// Clips the parametric segment origin + t * dir, t in [t0, t1], against the
/// box (slab method in the box frame). Returns the entry/exit parameters.
template <typename Scalar>
std::optional<std::pair<Scalar, Scalar>> clip_to_box(const Vec2T<Scalar>& origin,
                                                     const Vec2T<Scalar>& dir,
                                                     const OrientedBox<Scalar>& box, Scalar t0,
                                                     Scalar t1) {
  const Vec2T<Scalar> o = box.to_local(origin);
  const Vec2T<Scalar> d(dir.dot(box.axis_long()), dir.dot(box.axis_lat()));
  const Scalar half[2] = {box.length / 2, box.width / 2};
  for (int k = 0; k < 2; ++k) {
    if (std::abs(d[k]) < std::numeric_limits<Scalar>::epsilon()) {
      if (std::abs(o[k]) > half[k]) return std::nullopt;
      continue;
    }
    Scalar ta = (-half[k] - o[k]) / d[k];
    Scalar tb = (half[k] - o[k]) / d[k];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

/// Distance along a unit ray to the first point of the box boundary, or 0 if
/// the origin lies inside.
template <typename Scalar>
std::optional<Scalar> ray_box_distance(const Vec2T<Scalar>& origin, const Vec2T<Scalar>& dir,
                                       const OrientedBox<Scalar>& box, Scalar max_range) {
  const auto hit = clip_to_box(origin, dir, box, Scalar(0), max_range);
  if (!hit) return std::nullopt;
  return hit->first;
}

/// True when the segment a-b passes through the box with positive length.
template <typename Scalar>
bool segment_crosses_box(const Vec2T<Scalar>& a, const Vec2T<Scalar>& b,
                         const OrientedBox<Scalar>& box) {
  const auto hit = clip_to_box(a, Vec2T<Scalar>(b - a), box, Scalar(0), Scalar(1));
  return hit && hit->second - hit->first > Scalar(1e-12);
}

/// Intersection parameters (t along p->p2, u along q->q2) of two segments.
template <typename Scalar>
std::optional<std::pair<Scalar, Scalar>> segment_intersection(const Vec2T<Scalar>& p,
                                                              const Vec2T<Scalar>& p2,
                                                              const Vec2T<Scalar>& q,
                                                              const Vec2T<Scalar>& q2) {
  const Vec2T<Scalar> r = p2 - p;
  const Vec2T<Scalar> s = q2 - q;
  const Scalar denom = cross(r, s);
  if (std::abs(denom) < std::numeric_limits<Scalar>::epsilon()) return std::nullopt;
  const Vec2T<Scalar> qp = q - p;
  const Scalar t = cross(qp, s) / denom;
  const Scalar u = cross(qp, r) / denom;
  if (t < 0 || t > 1 || u < 0 || u > 1) return std::nullopt;
  return std::make_pair(t, u);
}

/// Result of projecting a point onto a polyline.
struct PolylineProjection {
  double station = 0;      // arc length of the foot point
  double offset = 0;       // signed distance, positive left of travel direction
  double distance = 0;     // |offset|
  std::size_t segment = 0; // index of the segment holding the foot point
};

/// Piecewise-linear curve with cached cumulative arc length.
class Polyline {
 public:
  Polyline() = default;
  explicit Polyline(std::vector<Vec2> points) : points_(std::move(points)) {
    stations_.resize(points_.size(), 0.0);
    for (std::size_t i = 1; i < points_.size(); ++i)
      stations_[i] = stations_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }

  const std::vector<Vec2>& points() const { return points_; }
  const std::vector<double>& stations() const { return stations_; }
  std::size_t size() const { return points_.size(); }
  std::size_t segment_count() const { return points_.empty() ? 0 : points_.size() - 1; }
  double length() const { return stations_.empty() ? 0.0 : stations_.back(); }

  std::size_t segment_at(double s) const {
    if (points_.size() < 2) return 0;
    auto it = std::upper_bound(stations_.begin(), stations_.end(), s);
    std::size_t i = it == stations_.begin() ? 0 : std::size_t(it - stations_.begin()) - 1;
    return std::min(i, points_.size() - 2);
  }

  Vec2 point_at(double s) const {
    s = std::clamp(s, 0.0, length());
    const std::size_t i = segment_at(s);
    const double seg = stations_[i + 1] - stations_[i];
    const double t = seg > 0 ? (s - stations_[i]) / seg : 0.0;
    return points_[i] + t * (points_[i + 1] - points_[i]);
  }

  double heading_at(double s) const {
    const std::size_t i = segment_at(std::clamp(s, 0.0, length()));
    const Vec2 d = points_[i + 1] - points_[i];
    return std::atan2(d.y(), d.x());
  }

  PolylineProjection project_segment(const Vec2& p, std::size_t i) const {
    const Vec2& a = points_[i];
    const Vec2 ab = points_[i + 1] - a;
    const double len2 = ab.squaredNorm();
    const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
    const Vec2 foot = a + t * ab;
    PolylineProjection out;
    out.segment = i;
    out.station = stations_[i] + t * std::sqrt(len2);
    out.distance = (p - foot).norm();
    const double side = cross(Vec2(ab), Vec2(p - a));
    out.offset = side < 0 ? -out.distance : out.distance;
    return out;
  }

  /// Closest point over segments [first, last). Earliest segment wins ties.
  PolylineProjection project(const Vec2& p, std::size_t first = 0,
                             std::size_t last = std::numeric_limits<std::size_t>::max()) const {
    last = std::min(last, segment_count());
    PolylineProjection best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = first; i < last; ++i) {
      const auto c = project_segment(p, i);
      if (c.distance < best.distance) best = c;
    }
    return best;
  }

 private:
  std::vector<Vec2> points_;
  std::vector<double> stations_;
};

}  // namespace dbench

namespace dbench {

/// Planar position plus heading.
struct Pose {
  Vec2 position = Vec2::Zero();
  double heading = 0;
};

}  // namespace dbench
