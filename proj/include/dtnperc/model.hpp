#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dtnperc {

/// Scalar parameters of one experiment point in the scaled space-time model.
///
/// Everything is derived from the two free quantities (gamma, eta) under the
/// canonical scaling t_life = 1 and 2*ell + d = 1, which keeps a node's whole
/// spatial reach inside a unit neighborhood and makes the unit-box partition
/// of the field valid.
struct ModelParams {
  double gamma;   ///< tilt ratio ell/d, >= 0
  double eta;     ///< reduced number density n*V, > 0
  double d;       ///< transmission range, 1/(1 + 2*gamma)
  double ell;     ///< movement distance, gamma*d
  double r;       ///< percolation radius, d/2
  double t_life;  ///< node lifetime, fixed to 1
  double n;       ///< space-time number density (arrival rate density)
  double nu;      ///< mean node degree, 4*eta
  double phi;     ///< volume fraction, 1 - exp(-eta)

  /// Cylinder volume pi*r^2*t_life; eta == n*volume().
  double volume() const { return std::numbers::pi * r * r * t_life; }
};

/// Derives the full parameter set from (gamma, eta). Pure and deterministic.
/// Throws std::invalid_argument for gamma < 0, eta <= 0 or non-finite inputs.
inline ModelParams derive_params(double gamma, double eta) {
  if (!std::isfinite(gamma) || !std::isfinite(eta))
    throw std::invalid_argument("derive_params: non-finite input");
  if (gamma < 0.0) throw std::invalid_argument("derive_params: gamma < 0");
  if (eta <= 0.0) throw std::invalid_argument("derive_params: eta <= 0");

  ModelParams p;
  p.gamma = gamma;
  p.eta = eta;
  p.d = 1.0 / (1.0 + 2.0 * gamma);
  p.ell = gamma * p.d;
  p.r = p.d / 2.0;
  p.t_life = 1.0;
  p.n = eta / (std::numbers::pi * p.r * p.r * p.t_life);
  p.nu = 4.0 * eta;
  p.phi = -std::expm1(-eta);
  return p;
}

/// A non-canonical rescaling of the geometry: lengths scaled by beta, time by
/// alpha, density by 1/(alpha*beta^2). The dimensionless quantities (gamma,
/// eta, nu, phi) are invariant under this map; they are recomputed here from
/// the scaled fields so that the invariance can be asserted.
struct ScaledModel {
  double d;
  double ell;
  double r;
  double t_life;
  double n;

  double gamma() const { return ell / d; }
  double eta() const { return n * std::numbers::pi * r * r * t_life; }
  double nu() const { return 4.0 * eta(); }
  double phi() const { return -std::expm1(-eta()); }
};

/// Applies the scale map (alpha on time, beta on lengths) to canonical params.
inline ScaledModel rescaled(const ModelParams& p, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("rescaled: scale factors must be positive");
  return ScaledModel{p.d * beta, p.ell * beta, p.r * beta, p.t_life * alpha,
                     p.n / (alpha * beta * beta)};
}

}  // namespace dtnperc
