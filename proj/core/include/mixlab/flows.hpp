#pragma once

// Shear profiles U(t, y) and streamfunction flows psi(theta, x, y), both built
// from trigonometric wave terms
//
//   ampl * trig(kx x + ky y) * tau(t),   trig in {cos, sin},
//   tau in {1, cos(2 pi n t / L), sin(2 pi n t / L)}.
//
// A flow's velocity is the perpendicular gradient u = (-d_y psi, d_x psi), so
// every flow is divergence-free by construction.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixlab/spectral.hpp"

namespace mixlab::flows {

using cplx = std::complex<double>;

enum class Trig { cos, sin };
enum class TimeMode { steady, cos, sin };
enum class TimeKind { steady, periodic };

struct WaveTerm {
  double ampl = 0.0;
  int kx = 0;
  int ky = 0;
  Trig trig = Trig::cos;
  TimeMode time = TimeMode::steady;
  int harmonic = 1;

  double time_factor(double t, double period) const;
  /// int_0^t time_factor(s) ds in closed form.
  double time_integral(double t, double period) const;
  double spatial(double x, double y) const;
  /// Coefficient of exp(+i(kx x + ky y)); the partner at (-kx, -ky) is its conjugate.
  cplx positive_coeff() const;
};

struct Bounds {
  double M = 0.0;     // sup |U| (shear) or sup |u| (flow)
  double w11 = 0.0;   // sup_t ||d_y U(t)||_{L^1} under the normalized measure
  double lip = 0.0;   // sup_t (||u||_inf + ||grad u||_inf), Frobenius norm on the gradient
};

/// Triangle-inequality bounds: every term counted at its full amplitude.
Bounds triangle_bounds(const std::vector<WaveTerm>& terms, bool shear);

// ---------------------------------------------------------------------------

class ShearSpec {
 public:
  ShearSpec() = default;
  /// Terms must have kx = 0. `period` is required (> 0) when any term is time-dependent;
  /// declared bounds default to triangle_bounds and are checked against samples (1e-9).
  ShearSpec(std::vector<WaveTerm> terms, double period = 0.0, std::optional<Bounds> declared = std::nullopt);

  const std::vector<WaveTerm>& terms() const { return terms_; }
  const Bounds& bounds() const { return bounds_; }
  double M() const { return bounds_.M; }
  double w11() const { return bounds_.w11; }
  double period() const { return period_; }
  TimeKind time_kind() const { return kind_; }
  int band() const;  // max |ky|

  double value(double t, double y) const;
  double mean(double t) const;  // y-average of U(t, .)
  bool is_mean_zero() const;
  /// y-Fourier coefficients of U(t, .), indices -lmax..lmax.
  std::vector<cplx> coefficients(double t, int lmax) const;

  nlohmann::json to_json() const;

 private:
  std::vector<WaveTerm> terms_;
  double period_ = 0.0;
  TimeKind kind_ = TimeKind::steady;
  Bounds bounds_;
};

/// X(t) = int_0^t mean(s) ds.
struct Drift {
  std::vector<WaveTerm> mean_terms;
  double period = 0.0;
  double operator()(double t) const;
};

struct MeanZeroReduction {
  ShearSpec shear;  // U - mean(t)
  Drift drift;
};

MeanZeroReduction mean_zero_reduce(const ShearSpec& shear);

/// y-Fourier coefficients of Phi(., t) = int_0^t U(., s) ds, by composite
/// Gauss-Legendre in time with max(4, ceil(64 t / L)) panels (L = 2 pi when steady).
/// Throws std::invalid_argument if the shear is not mean-zero.
std::vector<cplx> phase_integral(const ShearSpec& shear, double t, int lmax);
std::vector<cplx> phase_integral(const ShearSpec& shear, double t, int lmax, int panels);

// ---------------------------------------------------------------------------

class FlowSpec {
 public:
  FlowSpec() = default;
  FlowSpec(std::vector<WaveTerm> stream_terms, double period, std::optional<Bounds> declared = std::nullopt);

  const std::vector<WaveTerm>& terms() const { return terms_; }
  double period() const { return period_; }
  const Bounds& bounds() const { return bounds_; }
  double lip() const { return bounds_.lip; }
  TimeKind time_kind() const { return kind_; }
  int band_x() const;
  int band_y() const;
  spectral::Lattice band_lattice() const;  // smallest lattice (cutoffs >= 1) holding psi

  double stream(double theta, double x, double y) const;
  /// (u_x, u_y) at phase theta.
  std::pair<double, double> velocity(double theta, double x, double y) const;
  spectral::SpectralField2D stream_coeffs(double theta, spectral::Lattice lattice) const;

  nlohmann::json to_json() const;

 private:
  std::vector<WaveTerm> terms_;
  double period_ = 1.0;
  TimeKind kind_ = TimeKind::steady;
  Bounds bounds_;
};

/// Steady velocity in Fourier form: u_x = -i l psi, u_y = i k psi.
struct SteadyVelocity {
  spectral::SpectralField2D psi;
  spectral::SpectralField2D ux;
  spectral::SpectralField2D uy;
};

SteadyVelocity velocity_from_stream(const spectral::SpectralField2D& psi);

/// Phase average (1/L) int_0^L u(theta) d theta on flow.band_lattice(), composite
/// Gauss-Legendre with `panels` panels.
SteadyVelocity time_average(const FlowSpec& flow, int panels = 64);

/// The steady shear flow u = (U(y), 0) as a streamfunction flow. Requires a steady,
/// mean-zero shear.
FlowSpec shear_as_flow(const ShearSpec& shear);

// ---------------------------------------------------------------------------
// JSON: {kind: "shear"|"flow2d", preset?, terms: [{ampl, kx, ky, phase_mode, time_mode,
// harmonic?}], bounds?: {M, w11, lip}, period?}.
// Presets: "couette" (U = sin y), "cellular" (psi = sin x sin y), "zero".

ShearSpec shear_from_json(const nlohmann::json& j);
FlowSpec flow_from_json(const nlohmann::json& j);
ShearSpec shear_preset(const std::string& name);
FlowSpec flow_preset(const std::string& name);

}  // namespace mixlab::flows
