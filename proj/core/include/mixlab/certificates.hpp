#pragma once

// Explicit constant chains for the diffusive-shear lower bounds:
//   ||rho(t)||_2 >= N exp(-c2 t)                      (C2Certificate)
//   hneg1(rho(t)) / ||rho(t)||_2 >= 1 / (2 R_star)     (MixCertificate)
// Only the shear bound M = ||U||_inf and the initial spectrum enter.

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixlab/report.hpp"
#include "mixlab/shear_diffusion.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab::cert {

/// Resolvent constant of the finite-window estimate.
inline constexpr double C_res = 1e4;
/// Modes with a_k <= eps_mode * N are treated as absent.
inline constexpr double eps_mode = 1e-12;

/// Least integer m >= 1 with C_res k^2 M^2 / (nu^2 m^2) <= 1/4 and C_res / (nu m) <= delta_k / 16.
/// delta_k may be +infinity. Throws std::invalid_argument for nu <= 0, delta_k <= 0 or k == 0,
/// std::overflow_error if the answer does not fit in int64.
std::int64_t mode_mk(int k, double M, double nu, double delta_k);
/// The two defining inequalities at a given m.
bool mk_predicate(std::int64_t m, int k, double M, double nu, double delta_k);

struct ModeRecord {
  int k = 0;
  double a_k = 0.0;
  double Ak_norm = 0.0;  // ||(k^2 - d_yy) g_k||_2
  double L_k = 0.0;
  double beta_k = 0.0;
  double delta_k = 0.0;
  std::int64_t m_k = 0;
  double Lambda_k = 0.0;
  double D_k = 0.0;
  double theta_k = 0.0;
  double gamma_k = 0.0;
  double C_k = 0.0;
};

struct HeatRecord {
  int l = 0;
  double b_l = 0.0;
  double C_l = 0.0;
};

enum class Branch { x_modes, heat_only };

struct C2Certificate {
  double N = 0.0;
  double M = 0.0;
  double nu = 0.0;
  double dx_norm = 0.0;
  double L_0 = 0.0;
  double beta_0 = 0.0;
  double delta_0 = 0.0;
  Branch branch = Branch::x_modes;
  std::vector<ModeRecord> records;       // x-mode branch, evaluation order
  std::vector<HeatRecord> heat_records;  // heat branch, evaluation order
  int k_star = 0;
  int l_star = 0;
  double c2 = 0.0;
  std::size_t candidates = 0;  // modes above threshold; records.size() may be smaller (stopping rule)

  nlohmann::json to_json() const;
};

/// Lower estimate of C_k used by the stopping rule: max(beta_0, nu k^2 + beta_0 log(N |k| / ||d_x rho0||)).
double x_mode_lower_estimate(int k, double N, double beta_0, double nu, double dx_norm);

/// Throws std::invalid_argument for the zero field, a non-mean-zero field, nu <= 0 or M < 0.
C2Certificate c2_certificate(const spectral::SpectralField2D& rho0, double M, double nu);
ModeRecord mode_record(const spectral::ModeProfile& g_k, double N, double M, double nu, double beta_0);

struct MixMode {
  int k = 0;
  double a_k = 0.0;
  int J_k = 0;
  long long N_k = 0;
  double R_k = 0.0;  // sqrt(k^2 + N_k^2), or N_0 for k = 0
};

struct MixCertificate {
  double c2 = 0.0;
  double nu = 0.0;
  double M = 0.0;
  double N = 0.0;
  long long K_c = 0;
  int K_0 = 0;
  long long K = 0;
  std::vector<MixMode> modes;
  int J_star = 0;
  double R_star = 0.0;
  double c_star = 0.0;

  const MixMode* find(int k) const;
  nlohmann::json to_json() const;
};

MixCertificate mixing_certificate(const spectral::SpectralField2D& rho0, double M, double nu, double c2);

struct SharpnessCase {
  double nu = 0.0;
  double p = 0.0;
  long long n = 0;                        // ceil(nu^-p)
  spectral::SpectralField2D rho0;         // cos(n y) on Lattice(1, n)
  double expected_ratio = 0.0;            // 1 / n
  double expected_c_star = 0.0;           // 1 / (2 n)
  double decay_rate = 0.0;                // nu n^2
  bool decay_window = false;              // p == 1: 1/nu <= nu n^2 <= 4/nu
};

/// Throws std::invalid_argument unless 0 < nu <= 1 and p > 0.
SharpnessCase sharpness_family(double nu, double p);
/// ceil(nu^-p), snapping values within 1e-12 relative of an integer.
long long sharpness_n(double nu, double p);

struct ScalingRow {
  double nu = 0.0;
  double c2 = 0.0;
  double c2_times_nu = 0.0;
  double c2_over_nu = 0.0;
  Branch branch = Branch::x_modes;
};

std::vector<ScalingRow> nu_scaling_report(const spectral::SpectralField2D& rho0, double M, const std::vector<double>& nus);

/// margin(t) = ||rho(t)|| e^{c2 t} / N; aux: ||rho(t)|| <= N e^{-nu t} (1 + 1e-8).
BoundReport check_exponential_bound(const shear::ShearTrajectory& traj, const C2Certificate& cert, double tol = 1e-6);

/// margin(t) = mixing_scale(rho(t)) 2 R_star; aux: L_{k,N_k}(t) >= E_k(t) / 2 - 1e-8 for every certified mode.
BoundReport check_mixing_bound(const shear::ShearTrajectory& traj, const MixCertificate& cert, double tol = 1e-6);

const char* branch_name(Branch b);

}  // namespace mixlab::cert
