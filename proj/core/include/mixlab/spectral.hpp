#pragma once

// Mean-zero spectral fields on the normalized 2-torus.
//
// A field f(x, y) = sum_{|k|<=kmax, |l|<=lmax} c(k, l) exp(i(kx + ly)) is stored
// as its dense coefficient array. The torus carries the normalized (averaging)
// measure, so Parseval reads ||f||_2^2 = sum |c(k, l)|^2 with no 2*pi factors.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

namespace mixlab::spectral {

using cplx = std::complex<double>;

struct Lattice {
  int kmax = 64;
  int lmax = 64;

  Lattice() = default;
  Lattice(int kmax_, int lmax_);

  int nk() const { return 2 * kmax + 1; }
  int nl() const { return 2 * lmax + 1; }
  std::size_t size() const { return static_cast<std::size_t>(nk()) * nl(); }
  bool contains(int k, int l) const { return k >= -kmax && k <= kmax && l >= -lmax && l <= lmax; }
  bool operator==(const Lattice&) const = default;
};

/// Single x-Fourier mode: the y-profile f_k(y) = sum_l coeff(l) exp(i l y).
class ModeProfile {
 public:
  ModeProfile() = default;
  ModeProfile(int k, int lmax);
  ModeProfile(int k, int lmax, std::vector<cplx> coeff);

  int k() const { return k_; }
  int lmax() const { return lmax_; }
  cplx operator()(int l) const { return coeff_[static_cast<std::size_t>(l + lmax_)]; }
  cplx& operator()(int l) { return coeff_[static_cast<std::size_t>(l + lmax_)]; }
  std::span<const cplx> coeffs() const { return coeff_; }
  std::span<cplx> coeffs() { return coeff_; }

  double energy() const;
  double l2() const;

 private:
  int k_ = 0;
  int lmax_ = 0;
  std::vector<cplx> coeff_;
};

class SpectralField2D {
 public:
  SpectralField2D() = default;
  explicit SpectralField2D(Lattice lattice);

  /// Builds a field that represents real data. Throws std::invalid_argument if
  /// coeff(-k,-l) != conj(coeff(k,l)) beyond `tol` (relative to the largest entry).
  static SpectralField2D real_from(Lattice lattice, std::vector<cplx> coeff, double tol = 1e-12);

  const Lattice& lattice() const { return lattice_; }
  cplx operator()(int k, int l) const { return coeff_[index(k, l)]; }
  cplx& operator()(int k, int l) { return coeff_[index(k, l)]; }
  cplx at(int k, int l) const;
  std::span<const cplx> coeffs() const { return coeff_; }
  std::span<cplx> coeffs() { return coeff_; }

  std::size_t index(int k, int l) const {
    return static_cast<std::size_t>(k + lattice_.kmax) * static_cast<std::size_t>(lattice_.nl()) +
           static_cast<std::size_t>(l + lattice_.lmax);
  }

  /// Adds ampl * trig(kx x + ky y) with trig = cos or sin; out-of-lattice parts are dropped.
  void add_cos(double ampl, int kx, int ky);
  void add_sin(double ampl, int kx, int ky);

  bool is_real(double tol = 1e-12) const;
  bool is_mean_zero(double tol = 1e-12) const;
  bool is_zero() const;

  /// Copy onto another lattice (truncating or zero-padding).
  SpectralField2D resized(Lattice target) const;

  ModeProfile mode(int k) const;
  void set_mode(const ModeProfile& profile);

  SpectralField2D& operator+=(const SpectralField2D& other);
  SpectralField2D& operator-=(const SpectralField2D& other);
  SpectralField2D& operator*=(double s);

 private:
  Lattice lattice_;
  std::vector<cplx> coeff_;
};

SpectralField2D operator-(SpectralField2D a, const SpectralField2D& b);

/// sqrt(sum |c|^2).
double l2_norm(const SpectralField2D& f);

/// Homogeneous H^{-1}: sqrt(sum_{(k,l) != 0} |c|^2 / (k^2 + l^2)).
/// Throws std::invalid_argument when the (0,0) coefficient is not zero.
double hneg1_norm(const SpectralField2D& f);

/// ||grad f||_2, ||Delta f||_2 and ||d_x f||_2 as exact lattice sums.
double gradient_norm(const SpectralField2D& f);
double laplacian_norm(const SpectralField2D& f);
double dx_norm(const SpectralField2D& f);

/// hneg1_norm / l2_norm, in (0, 1] for nonzero mean-zero data.
/// Throws std::domain_error for the zero field.
double mixing_scale(const SpectralField2D& f);

/// The l-vector at fixed x-frequency k. Throws std::out_of_range for |k| > kmax.
ModeProfile x_mode(const SpectralField2D& f, int k);

/// L_{k,N} = sum_{|l| <= N} |coeff(l)|^2 (N < 0 is rejected).
double low_block_energy(const ModeProfile& profile, int n);

/// Energy of each x-mode, E_k = ||f_k||^2, indexed k + kmax.
std::vector<double> mode_energies(const SpectralField2D& f);

// ---------------------------------------------------------------------------
// Grid bridge

struct Grid2D {
  int nx = 0;
  int ny = 0;
  std::vector<cplx> values;  // index ix * ny + iy, point (2 pi ix / nx, 2 pi iy / ny)

  cplx operator()(int ix, int iy) const { return values[static_cast<std::size_t>(ix) * ny + iy]; }
  std::vector<double> real_values() const;
};

/// Smallest admissible grid extent for a lattice cutoff: 2 * (2 * cutoff + 1),
/// i.e. twice the lattice width, which leaves room for quadratic products.
int min_grid_extent(int cutoff);
/// min_grid_extent rounded up to an FFT-friendly size.
int default_grid_extent(int cutoff);

/// Point values of f on an (nx, ny) grid. Throws std::invalid_argument if the
/// grid is smaller than min_grid_extent in either direction.
Grid2D grid_sample(const SpectralField2D& f, int nx, int ny);
Grid2D grid_sample(const SpectralField2D& f);

/// Analysis of grid values, truncated to `lattice`. Throws std::invalid_argument
/// if the grid is smaller than min_grid_extent for the lattice.
SpectralField2D synthesize(const Grid2D& grid, Lattice lattice);

/// 1D helpers for mode profiles on an ny-point y-grid (no size policy).
std::vector<cplx> sample_profile(std::span<const cplx> coeff, int lmax, int ny);
void analyze_profile(std::span<const cplx> samples, int lmax, std::span<cplx> coeff_out);

// ---------------------------------------------------------------------------
// Serialization: {kmax, lmax, coeffs: [[k, l, re, im], ...]} with nonzero entries only.

nlohmann::json to_json(const SpectralField2D& f);
SpectralField2D field_from_json(const nlohmann::json& j);

}  // namespace mixlab::spectral
