#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dtnperc {

// Closed-form asymptotics for the regime where the movement dominates the
// transmission range (gamma >> 1): contacts become point contacts along the
// path, and requiring each carrier to pass the message to at least one new
// node on average yields the fluid bound. The bound is exact only in the
// gamma -> infinity limit; at small gamma it is far above the true threshold
// and should not be used below roughly gamma = 4.

/// Critical mean node degree from the fluid-flow argument, pi^2 / (4 gamma).
inline double fluid_bound_nu(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("fluid_bound_nu: gamma must be > 0");
  return std::numbers::pi * std::numbers::pi / (4.0 * gamma);
}

/// The same bound as a reduced number density, pi^2 / (16 gamma); the product
/// with gamma is constant (the 1/gamma scaling law).
inline double fluid_bound_eta(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("fluid_bound_eta: gamma must be > 0");
  return std::numbers::pi * std::numbers::pi / (16.0 * gamma);
}

/// Point-contact rate per unit distance travelled on the plane, (8/pi) n d,
/// for plane density n_plane and transmission range d.
inline double contact_rate(double n_plane, double d) {
  if (n_plane < 0.0) throw std::invalid_argument("contact_rate: negative density");
  if (!(d > 0.0)) throw std::invalid_argument("contact_rate: d must be > 0");
  return (8.0 / std::numbers::pi) * n_plane * d;
}

/// First two moments of the i.i.d. transition length X. The derivation of the
/// random-transition threshold only consumes these, via the length-biased
/// transition density x f(x) / E[X] seen by a node that acquires a message
/// mid-path.
struct TransitionMoments {
  double mean_x = 0.0;   ///< E[X] > 0
  double mean_x2 = 0.0;  ///< E[X^2] >= E[X]^2
};

/// Critical value of the product (plane density) * d for i.i.d. random
/// transition lengths: pi E[X] / (4 E[X^2]). Variance in X lowers the
/// threshold, so the deterministic transition is the worst case for fixed
/// mean; with a degenerate X the bound reduces to the fluid bound.
inline double renewal_threshold(const TransitionMoments& m) {
  if (!(m.mean_x > 0.0) || !std::isfinite(m.mean_x))
    throw std::invalid_argument("renewal_threshold: E[X] must be positive and finite");
  if (!(m.mean_x2 >= m.mean_x * m.mean_x) || !std::isfinite(m.mean_x2))
    throw std::invalid_argument("renewal_threshold: E[X^2] must be >= E[X]^2");
  return std::numbers::pi * m.mean_x / (4.0 * m.mean_x2);
}

}  // namespace dtnperc
