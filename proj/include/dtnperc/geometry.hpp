#pragma once

#include <Eigen/Core>

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "dtnperc/model.hpp"

namespace dtnperc {

/// Stable node identifier: home-box coordinates plus within-box index.
/// The distinguished source node uses index -1.
struct NodeId {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;
  std::int32_t index = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline constexpr std::int32_t kSourceIndex = -1;

/// One node's space-time trajectory. A node arrives at t_arrive at planar
/// position p0, moves ell * heading at constant speed over its lifetime, and
/// departs. In space-time the covered region is a cylinder of radius r tilted
/// along heading.
struct Cylinder {
  NodeId id;
  double t_arrive = 0.0;
  Eigen::Vector2d p0{0.0, 0.0};
  Eigen::Vector2d heading{1.0, 0.0};  // unit vector

  /// Dense per-world storage index assigned by the owning world; lets the
  /// cluster growth keep flat per-node state instead of hashing ids.
  std::uint32_t slot = 0;
};

/// Time interval during which two nodes are within transmission range.
/// Relative planar motion is affine in time, so the region where the squared
/// distance stays below d^2 is a single interval.
struct ContactInterval {
  double t_begin = 0.0;
  double t_end = 0.0;
};

inline Eigen::Vector2d velocity(const Cylinder& c, const ModelParams& p) {
  return (p.ell / p.t_life) * c.heading;
}

/// Planar position at time z. z must lie in the alive interval
/// [t_arrive, t_arrive + t_life].
inline Eigen::Vector2d position_at(const Cylinder& c, const ModelParams& p, double z) {
  if (z < c.t_arrive || z > c.t_arrive + p.t_life)
    throw std::domain_error("position_at: time outside alive interval");
  return c.p0 + ((z - c.t_arrive) / p.t_life) * p.ell * c.heading;
}

/// Maximal time interval where the planar distance between a and b is <= d,
/// intersected with both alive intervals. Empty result is a normal outcome.
///
/// The quadratic in time is assembled in coordinates relative to the start of
/// the joint alive window, which keeps the coefficients small, and solved in
/// the cancellation-free form. A zero-discriminant grazing contact yields a
/// single-instant interval; equal velocities at distance exactly d count as
/// contact for the whole overlap.
inline std::optional<ContactInterval> contact_interval(const Cylinder& a,
                                                       const Cylinder& b,
                                                       const ModelParams& p) {
  const double t_lo = a.t_arrive > b.t_arrive ? a.t_arrive : b.t_arrive;
  const double t_hi = (a.t_arrive < b.t_arrive ? a.t_arrive : b.t_arrive) + p.t_life;
  if (t_lo > t_hi) return std::nullopt;
  const double window = t_hi - t_lo;

  // Relative offset at t_lo and relative velocity; both nodes are alive at
  // t_lo so the evaluation is in range.
  const Eigen::Vector2d rel0 =
      (a.p0 + ((t_lo - a.t_arrive) / p.t_life) * p.ell * a.heading) -
      (b.p0 + ((t_lo - b.t_arrive) / p.t_life) * p.ell * b.heading);
  const Eigen::Vector2d w = velocity(a, p) - velocity(b, p);

  const double qa = w.squaredNorm();
  const double qb = 2.0 * rel0.dot(w);
  const double qc = rel0.squaredNorm() - p.d * p.d;

  double lo, hi;  // contact window in local time, before clamping
  if (qa == 0.0) {
    if (qc > 0.0) return std::nullopt;
    lo = 0.0;
    hi = window;
  } else {
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) return std::nullopt;
    if (disc == 0.0) {
      lo = hi = -qb / (2.0 * qa);
    } else {
      const double sd = std::sqrt(disc);
      const double q = qb >= 0.0 ? -0.5 * (qb + sd) : -0.5 * (qb - sd);
      const double z1 = q / qa;
      const double z2 = qc / q;
      lo = z1 < z2 ? z1 : z2;
      hi = z1 < z2 ? z2 : z1;
    }
  }

  if (lo > window || hi < 0.0) return std::nullopt;
  ContactInterval out;
  out.t_begin = lo > 0.0 ? t_lo + lo : t_lo;      // clamp hits the bound exactly
  out.t_end = hi < window ? t_lo + hi : t_hi;
  if (out.t_begin > out.t_end) out.t_begin = out.t_end;  // ulp guard near clamps
  return out;
}

/// Earliest feasible exchange time at or after t: max(t_begin, t) when the
/// contact interval exists and has not already ended, absent otherwise.
inline std::optional<double> first_contact_at_or_after(const Cylinder& a,
                                                       const Cylinder& b,
                                                       const ModelParams& p,
                                                       double t) {
  const auto iv = contact_interval(a, b, p);
  if (!iv || iv->t_end < t) return std::nullopt;
  return iv->t_begin > t ? iv->t_begin : t;
}

}  // namespace dtnperc
