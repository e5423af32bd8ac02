#include "mixlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mixlab/fft.hpp"

namespace mixlab::spectral {

Lattice::Lattice(int kmax_, int lmax_) : kmax(kmax_), lmax(lmax_) {
  if (kmax < 1 || lmax < 1)
    throw std::invalid_argument("lattice cutoffs must be >= 1 (got kmax=" + std::to_string(kmax) +
                                ", lmax=" + std::to_string(lmax) + ")");
}

ModeProfile::ModeProfile(int k, int lmax)
    : k_(k), lmax_(lmax), coeff_(static_cast<std::size_t>(2 * lmax + 1)) {
  if (lmax < 0) throw std::invalid_argument("ModeProfile: lmax must be >= 0");
}

ModeProfile::ModeProfile(int k, int lmax, std::vector<cplx> coeff)
    : k_(k), lmax_(lmax), coeff_(std::move(coeff)) {
  if (coeff_.size() != static_cast<std::size_t>(2 * lmax + 1))
    throw std::invalid_argument("ModeProfile: coefficient count does not match 2*lmax+1");
}

double ModeProfile::energy() const {
  double s = 0.0;
  for (const auto& c : coeff_) s += std::norm(c);
  return s;
}

double ModeProfile::l2() const { return std::sqrt(energy()); }

SpectralField2D::SpectralField2D(Lattice lattice) : lattice_(lattice), coeff_(lattice.size()) {
  if (lattice.kmax < 1 || lattice.lmax < 1) throw std::invalid_argument("lattice cutoffs must be >= 1");
}

SpectralField2D SpectralField2D::real_from(Lattice lattice, std::vector<cplx> coeff, double tol) {
  SpectralField2D f(lattice);
  if (coeff.size() != lattice.size()) throw std::invalid_argument("coefficient count does not match lattice");
  f.coeff_ = std::move(coeff);
  if (!f.is_real(tol)) throw std::invalid_argument("coefficients violate conjugate symmetry c(-k,-l) = conj c(k,l)");
  return f;
}

cplx SpectralField2D::at(int k, int l) const {
  if (!lattice_.contains(k, l))
    throw std::out_of_range("mode (" + std::to_string(k) + "," + std::to_string(l) + ") outside lattice");
  return (*this)(k, l);
}

void SpectralField2D::add_cos(double ampl, int kx, int ky) {
  // cos(kx x + ky y) = (e^{i..} + e^{-i..}) / 2
  if (lattice_.contains(kx, ky)) (*this)(kx, ky) += 0.5 * ampl;
  if (lattice_.contains(-kx, -ky)) (*this)(-kx, -ky) += 0.5 * ampl;
}

void SpectralField2D::add_sin(double ampl, int kx, int ky) {
  if (kx == 0 && ky == 0) return;
  if (lattice_.contains(kx, ky)) (*this)(kx, ky) += cplx(0.0, -0.5 * ampl);
  if (lattice_.contains(-kx, -ky)) (*this)(-kx, -ky) += cplx(0.0, 0.5 * ampl);
}

bool SpectralField2D::is_real(double tol) const {
  double scale = 0.0;
  for (const auto& c : coeff_) scale = std::max(scale, std::abs(c));
  const double thresh = tol * std::max(1.0, scale);
  for (int k = -lattice_.kmax; k <= lattice_.kmax; ++k)
    for (int l = -lattice_.lmax; l <= lattice_.lmax; ++l)
      if (std::abs((*this)(k, l) - std::conj((*this)(-k, -l))) > thresh) return false;
  return true;
}

bool SpectralField2D::is_mean_zero(double tol) const {
  double scale = 0.0;
  for (const auto& c : coeff_) scale = std::max(scale, std::abs(c));
  return std::abs((*this)(0, 0)) <= tol * std::max(1.0, scale);
}

bool SpectralField2D::is_zero() const {
  return std::all_of(coeff_.begin(), coeff_.end(), [](const cplx& c) { return c == cplx(0.0); });
}

SpectralField2D SpectralField2D::resized(Lattice target) const {
  SpectralField2D out(target);
  const int km = std::min(target.kmax, lattice_.kmax);
  const int lm = std::min(target.lmax, lattice_.lmax);
  for (int k = -km; k <= km; ++k)
    for (int l = -lm; l <= lm; ++l) out(k, l) = (*this)(k, l);
  return out;
}

ModeProfile SpectralField2D::mode(int k) const {
  if (k < -lattice_.kmax || k > lattice_.kmax)
    throw std::out_of_range("x-mode " + std::to_string(k) + " outside lattice");
  const auto first = coeff_.begin() + static_cast<std::ptrdiff_t>(index(k, -lattice_.lmax));
  return ModeProfile(k, lattice_.lmax, std::vector<cplx>(first, first + lattice_.nl()));
}

void SpectralField2D::set_mode(const ModeProfile& profile) {
  const int k = profile.k();
  if (k < -lattice_.kmax || k > lattice_.kmax)
    throw std::out_of_range("x-mode " + std::to_string(k) + " outside lattice");
  const int lm = std::min(profile.lmax(), lattice_.lmax);
  for (int l = -lattice_.lmax; l <= lattice_.lmax; ++l) (*this)(k, l) = 0.0;
  for (int l = -lm; l <= lm; ++l) (*this)(k, l) = profile(l);
}

SpectralField2D& SpectralField2D::operator+=(const SpectralField2D& other) {
  if (!(other.lattice_ == lattice_)) throw std::invalid_argument("lattice mismatch");
  for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] += other.coeff_[i];
  return *this;
}

SpectralField2D& SpectralField2D::operator-=(const SpectralField2D& other) {
  if (!(other.lattice_ == lattice_)) throw std::invalid_argument("lattice mismatch");
  for (std::size_t i = 0; i < coeff_.size(); ++i) coeff_[i] -= other.coeff_[i];
  return *this;
}

SpectralField2D& SpectralField2D::operator*=(double s) {
  for (auto& c : coeff_) c *= s;
  return *this;
}

SpectralField2D operator-(SpectralField2D a, const SpectralField2D& b) { return a -= b; }

namespace {

template <class Weight>
double weighted_norm(const SpectralField2D& f, Weight w) {
  const auto& lat = f.lattice();
  double s = 0.0;
  for (int k = -lat.kmax; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l) s += w(k, l) * std::norm(f(k, l));
  return std::sqrt(s);
}

}  // namespace

double l2_norm(const SpectralField2D& f) {
  double s = 0.0;
  for (const auto& c : f.coeffs()) s += std::norm(c);
  return std::sqrt(s);
}

double hneg1_norm(const SpectralField2D& f) {
  if (!f.is_mean_zero())
    throw std::invalid_argument("hneg1_norm: field has nonzero mean coefficient c(0,0)");
  return weighted_norm(f, [](int k, int l) {
    return (k == 0 && l == 0) ? 0.0 : 1.0 / static_cast<double>(k * k + l * l);
  });
}

double gradient_norm(const SpectralField2D& f) {
  return weighted_norm(f, [](int k, int l) { return static_cast<double>(k * k + l * l); });
}

double laplacian_norm(const SpectralField2D& f) {
  return weighted_norm(f, [](int k, int l) {
    const double q = static_cast<double>(k * k + l * l);
    return q * q;
  });
}

double dx_norm(const SpectralField2D& f) {
  return weighted_norm(f, [](int k, int) { return static_cast<double>(k * k); });
}

double mixing_scale(const SpectralField2D& f) {
  const double l2 = l2_norm(f);
  if (l2 == 0.0) throw std::domain_error("mixing_scale: undefined for the zero field");
  return hneg1_norm(f) / l2;
}

ModeProfile x_mode(const SpectralField2D& f, int k) { return f.mode(k); }

double low_block_energy(const ModeProfile& profile, int n) {
  if (n < 0) throw std::invalid_argument("low_block_energy: N must be >= 0");
  const int top = std::min(n, profile.lmax());
  double s = 0.0;
  for (int l = -top; l <= top; ++l) s += std::norm(profile(l));
  return s;
}

std::vector<double> mode_energies(const SpectralField2D& f) {
  const auto& lat = f.lattice();
  std::vector<double> e(static_cast<std::size_t>(lat.nk()));
  for (int k = -lat.kmax; k <= lat.kmax; ++k) {
    double s = 0.0;
    for (int l = -lat.lmax; l <= lat.lmax; ++l) s += std::norm(f(k, l));
    e[static_cast<std::size_t>(k + lat.kmax)] = s;
  }
  return e;
}

std::vector<double> Grid2D::real_values() const {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [](const cplx& c) { return c.real(); });
  return out;
}

int min_grid_extent(int cutoff) { return 2 * (2 * cutoff + 1); }

int default_grid_extent(int cutoff) { return fft::nice_size(min_grid_extent(cutoff)); }

namespace {

int wrap(int m, int n) { return ((m % n) + n) % n; }

void require_extent(int nx, int ny, const Lattice& lat) {
  if (nx < min_grid_extent(lat.kmax) || ny < min_grid_extent(lat.lmax))
    throw std::invalid_argument("grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                                " too small for lattice (need at least " +
                                std::to_string(min_grid_extent(lat.kmax)) + "x" +
                                std::to_string(min_grid_extent(lat.lmax)) + ")");
}

}  // namespace

Grid2D grid_sample(const SpectralField2D& f, int nx, int ny) {
  const auto& lat = f.lattice();
  require_extent(nx, ny, lat);
  std::vector<cplx> spec(static_cast<std::size_t>(nx) * ny);
  for (int k = -lat.kmax; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l)
      spec[static_cast<std::size_t>(wrap(k, nx)) * ny + wrap(l, ny)] = f(k, l);
  Grid2D g{nx, ny, std::vector<cplx>(spec.size())};
  fft::synthesis_2d(nx, ny, spec, g.values);
  return g;
}

Grid2D grid_sample(const SpectralField2D& f) {
  return grid_sample(f, default_grid_extent(f.lattice().kmax), default_grid_extent(f.lattice().lmax));
}

SpectralField2D synthesize(const Grid2D& grid, Lattice lattice) {
  require_extent(grid.nx, grid.ny, lattice);
  if (grid.values.size() != static_cast<std::size_t>(grid.nx) * grid.ny)
    throw std::invalid_argument("grid value count does not match its shape");
  std::vector<cplx> spec(grid.values.size());
  fft::analysis_2d(grid.nx, grid.ny, grid.values, spec);
  SpectralField2D f(lattice);
  for (int k = -lattice.kmax; k <= lattice.kmax; ++k)
    for (int l = -lattice.lmax; l <= lattice.lmax; ++l)
      f(k, l) = spec[static_cast<std::size_t>(wrap(k, grid.nx)) * grid.ny + wrap(l, grid.ny)];
  return f;
}

std::vector<cplx> sample_profile(std::span<const cplx> coeff, int lmax, int ny) {
  if (ny < 2 * lmax + 1) throw std::invalid_argument("sample_profile: grid smaller than profile band");
  std::vector<cplx> spec(static_cast<std::size_t>(ny)), out(static_cast<std::size_t>(ny));
  for (int l = -lmax; l <= lmax; ++l) spec[static_cast<std::size_t>(wrap(l, ny))] = coeff[static_cast<std::size_t>(l + lmax)];
  fft::synthesis_1d(spec, out);
  return out;
}

void analyze_profile(std::span<const cplx> samples, int lmax, std::span<cplx> coeff_out) {
  const int ny = static_cast<int>(samples.size());
  if (ny < 2 * lmax + 1) throw std::invalid_argument("analyze_profile: grid smaller than profile band");
  std::vector<cplx> spec(samples.size());
  fft::analysis_1d(samples, spec);
  for (int l = -lmax; l <= lmax; ++l) coeff_out[static_cast<std::size_t>(l + lmax)] = spec[static_cast<std::size_t>(wrap(l, ny))];
}

nlohmann::json to_json(const SpectralField2D& f) {
  const auto& lat = f.lattice();
  nlohmann::json coeffs = nlohmann::json::array();
  for (int k = -lat.kmax; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l) {
      const cplx c = f(k, l);
      if (c != cplx(0.0)) coeffs.push_back({k, l, c.real(), c.imag()});
    }
  return {{"kmax", lat.kmax}, {"lmax", lat.lmax}, {"coeffs", coeffs}};
}

SpectralField2D field_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kmax") || !j.contains("lmax") || !j.contains("coeffs"))
    throw std::invalid_argument("field JSON needs kmax, lmax and coeffs");
  SpectralField2D f(Lattice(j.at("kmax").get<int>(), j.at("lmax").get<int>()));
  for (const auto& e : j.at("coeffs")) {
    if (!e.is_array() || e.size() != 4) throw std::invalid_argument("field JSON: coeff entries are [k, l, re, im]");
    const int k = e[0].get<int>(), l = e[1].get<int>();
    if (!f.lattice().contains(k, l)) throw std::invalid_argument("field JSON: mode outside lattice");
    f(k, l) = cplx(e[2].get<double>(), e[3].get<double>());
  }
  return f;
}

}  // namespace mixlab::spectral
