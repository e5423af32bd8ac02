#pragma once

// Per-x-mode solver for d_t f_k + nu (k^2 - d_yy) f_k = -i k U(t, y) f_k.
//
// Strang splitting: half a step of the exact heat factor in l-space, a full step of
// grid-space multiplication by exp(-i k U(t_mid, y) dt), then the second half step.
// The advection factor is unimodular, so mode energy can only drop (truncation).

#include <vector>

#include "mixlab/flows.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab::shear {

/// Default step for x-frequency k: min(1e-2, 0.1 / (|k| M + 1)).
double default_dt(int k, double M);

/// One Strang step from t to t + dt. Throws std::invalid_argument for nu <= 0 or dt <= 0.
spectral::ModeProfile step_mode(const spectral::ModeProfile& profile, const flows::ShearSpec& shear, double nu,
                                double t, double dt);

struct ModeTrajectory {
  int k = 0;
  double nu = 0.0;
  std::vector<double> times;
  std::vector<spectral::ModeProfile> profiles;
  std::vector<double> energies;
};

struct EvolveOptions {
  double dt = 0.0;  // <= 0: default_dt per mode
  /// Output lattice cutoff in y; 0 keeps the input's. Larger values evolve on a
  /// finer y-lattice (and return it).
  int lmax = 0;
};

/// Integrates from t = 0 through increasing `times`. Each interval is split into equal
/// substeps no longer than the step size, so samples land exactly on `times`.
ModeTrajectory evolve_mode(const spectral::ModeProfile& f0, const flows::ShearSpec& shear, double nu,
                           const std::vector<double>& times, EvolveOptions opts = {});

struct ShearTrajectory {
  double nu = 0.0;
  std::vector<double> times;
  std::vector<spectral::SpectralField2D> fields;
};

/// Evolves every x-mode of rho0 (in parallel, deterministic) and reassembles fields at
/// `times`. Real data is advanced for k >= 0 only and mirrored by conjugation.
/// Throws std::invalid_argument when rho0 has a nonzero mean or nu <= 0.
ShearTrajectory evolve_shear(const spectral::SpectralField2D& rho0, const flows::ShearSpec& shear, double nu,
                             const std::vector<double>& times, EvolveOptions opts = {});

struct DissipationReport {
  std::vector<double> t_mid;
  std::vector<double> residual;  // |d/dt (||rho||^2 / 2) + nu ||grad rho||^2| / ||rho_0||^2
  double max_residual = 0.0;
};

/// Midpoint differences of half the squared norm against the trapezoid average of
/// nu ||grad rho||^2 between consecutive samples.
DissipationReport dissipation_report(const ShearTrajectory& traj);

}  // namespace mixlab::shear
