#pragma once

// Exact transport d_t theta + U(t, y) d_x theta = 0 by a mean-zero shear, and the
// polynomial H^{-1} lower bound hneg1(theta(t)) >= c_star / (1 + t^2).
//
// Each x-mode evolves as F_k(y, t) = exp(-i k Phi(y, t)) F_k(y, 0), with
// Phi = int_0^t U ds. All constants use the normalized measure on the circle.

#include <vector>

#include <nlohmann/json.hpp>

#include "mixlab/flows.hpp"
#include "mixlab/report.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab::inviscid {

/// Result lattice is theta0's lattice. Throws std::invalid_argument for t < 0 or
/// a shear that has not been mean-zero reduced.
spectral::SpectralField2D evolve_inviscid(const spectral::SpectralField2D& theta0, const flows::ShearSpec& shear,
                                          double t);
/// Same, truncated to `out` instead.
spectral::SpectralField2D evolve_inviscid(const spectral::SpectralField2D& theta0, const flows::ShearSpec& shear,
                                          double t, spectral::Lattice out);

struct InviscidCertificate {
  bool stationary = false;
  int k = 0;
  double S = 0.0;        // a_k^2 = ||F_k^0||_2^2
  double A = 0.0;        // ||(F_k^0)'||_{L^1}, inflated
  double B = 0.0;        // |k| w11 ||F_k^0||_inf, inflated
  double D = 1.0;        // 1 + 8 (A^2 + B^2) / S
  double c_star = 0.0;   // sqrt(S / (2 (k^2 + 2 D^2)))
  double w11 = 0.0;
  double safety = 1.01;

  double V(double t) const { return A + B * t; }
  /// max(1, ceil(4 V(t)^2 / S)).
  long long tail_cutoff(double t) const;
  nlohmann::json to_json() const;
};

/// Candidate modes are x-modes with a_k > 1e-12 ||theta0||_2; the one maximizing
/// c_star is returned. The sup and L^1 norms of F_k^0 are sampled on a 4x grid and
/// multiplied by `safety`. An x-independent datum yields the stationary certificate
/// with c_star = hneg1(theta0). Throws std::invalid_argument for the zero field.
InviscidCertificate inviscid_certificate(const spectral::SpectralField2D& theta0, const flows::ShearSpec& shear,
                                         double safety = 1.01);

/// margin(t) = hneg1(theta(t)) (1 + t^2) / c_star. Aux checks: the y-tail estimate
/// sum_{|m| > N(t)} |theta_hat(k, m, t)|^2 <= S / 2 at every sample (non-stationary case).
BoundReport check_inviscid_bound(const spectral::SpectralField2D& theta0, const flows::ShearSpec& shear,
                                 const InviscidCertificate& cert, const std::vector<double>& times, double tol = 1e-6);

/// ||d_y F||_{L^1} of a mode profile sampled on `ny` points (normalized measure).
double profile_dy_l1(const spectral::ModeProfile& f, int ny);
/// max |F| over `ny` sample points.
double profile_sup(const spectral::ModeProfile& f, int ny);

}  // namespace mixlab::inviscid
