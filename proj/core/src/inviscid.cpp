#include "mixlab/inviscid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mixlab/fft.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab::inviscid {

using spectral::cplx;
using spectral::Lattice;
using spectral::ModeProfile;
using spectral::SpectralField2D;

spectral::SpectralField2D evolve_inviscid(const SpectralField2D& theta0, const flows::ShearSpec& shear, double t) {
  return evolve_inviscid(theta0, shear, t, theta0.lattice());
}

SpectralField2D evolve_inviscid(const SpectralField2D& theta0, const flows::ShearSpec& shear, double t, Lattice out) {
  if (t < 0.0) throw std::invalid_argument("evolve_inviscid: t must be >= 0");
  if (!shear.is_mean_zero()) throw std::invalid_argument("evolve_inviscid: apply mean_zero_reduce to the shear first");
  const Lattice in = theta0.lattice();
  SpectralField2D result(out);
  if (t == 0.0) return theta0.resized(out);

  const int band = std::max(1, shear.band());
  const auto phi = flows::phase_integral(shear, t, band);
  double phi_slope = 0.0;  // sum |m| |Phi_m| bounds the local wavenumber of Phi
  for (int m = -band; m <= band; ++m) phi_slope += std::abs(m) * std::abs(phi[static_cast<std::size_t>(m + band)]);

  const int kmax = std::min(in.kmax, out.kmax);
  parallel_for(static_cast<std::size_t>(2 * kmax + 1), [&](std::size_t idx) {
    const int k = static_cast<int>(idx) - kmax;
    ModeProfile f0 = theta0.mode(k);
    if (f0.energy() == 0.0) return;
    ModeProfile fk(k, out.lmax);
    if (k == 0) {
      for (int l = -std::min(in.lmax, out.lmax); l <= std::min(in.lmax, out.lmax); ++l) fk(l) = f0(l);
      result.set_mode(fk);
      return;
    }
    // Effective band of exp(-i k Phi) is about |k| sum |m||Phi_m| plus an Airy-type margin.
    const double B = std::abs(k) * phi_slope + band;
    const int need = static_cast<int>(std::ceil(out.lmax + in.lmax + B + 32 + B / 4));
    const int ny = fft::nice_size(std::max(2 * (2 * std::max(in.lmax, out.lmax) + 1), need));
    auto phase = spectral::sample_profile(phi, band, ny);
    auto vals = spectral::sample_profile(f0.coeffs(), in.lmax, ny);
    for (int j = 0; j < ny; ++j) vals[static_cast<std::size_t>(j)] *= std::polar(1.0, -k * phase[static_cast<std::size_t>(j)].real());
    spectral::analyze_profile(vals, out.lmax, fk.coeffs());
    result.set_mode(fk);
  });
  return result;
}

double profile_dy_l1(const ModeProfile& f, int ny) {
  std::vector<cplx> d(f.coeffs().begin(), f.coeffs().end());
  for (int l = -f.lmax(); l <= f.lmax(); ++l) d[static_cast<std::size_t>(l + f.lmax())] *= cplx(0.0, l);
  const auto v = spectral::sample_profile(d, f.lmax(), ny);
  double s = 0.0;
  for (const auto& x : v) s += std::abs(x);
  return s / ny;
}

double profile_sup(const ModeProfile& f, int ny) {
  const auto v = spectral::sample_profile(f.coeffs(), f.lmax(), ny);
  double s = 0.0;
  for (const auto& x : v) s = std::max(s, std::abs(x));
  return s;
}

long long InviscidCertificate::tail_cutoff(double t) const {
  const double v = V(t);
  return std::max(1LL, static_cast<long long>(std::ceil(4.0 * v * v / S)));
}

nlohmann::json InviscidCertificate::to_json() const {
  return {{"kind", "inviscid"}, {"stationary", stationary}, {"k", k}, {"S", S},   {"A", A},           {"B", B},
          {"D", D},             {"c_star", c_star},         {"w11", w11}, {"safety", safety}};
}

InviscidCertificate inviscid_certificate(const SpectralField2D& theta0, const flows::ShearSpec& shear, double safety) {
  const double n = spectral::l2_norm(theta0);
  if (n == 0.0) throw std::invalid_argument("inviscid_certificate: zero datum");
  const auto& lat = theta0.lattice();
  InviscidCertificate best;
  best.w11 = shear.w11();
  best.safety = safety;
  const int ny = fft::nice_size(4 * (2 * lat.lmax + 1));
  bool found = false;
  for (int a = 1; a <= lat.kmax; ++a)
    for (int k : {a, -a}) {
      const ModeProfile f = theta0.mode(k);
      const double S = f.energy();
      if (std::sqrt(S) <= 1e-12 * n) continue;
      InviscidCertificate c = best;
      c.k = k;
      c.S = S;
      c.A = profile_dy_l1(f, ny) * safety;
      c.B = std::abs(k) * shear.w11() * profile_sup(f, ny) * safety;
      c.D = 1.0 + 8.0 * (c.A * c.A + c.B * c.B) / S;
      c.c_star = std::sqrt(S / (2.0 * (k * k + 2.0 * c.D * c.D)));
      if (!found || c.c_star > best.c_star) best = c;
      found = true;
    }
  if (!found) {
    best.stationary = true;
    best.c_star = spectral::hneg1_norm(theta0);
    best.S = n * n;
  }
  return best;
}

BoundReport check_inviscid_bound(const SpectralField2D& theta0, const flows::ShearSpec& shear,
                                 const InviscidCertificate& cert, const std::vector<double>& times, double tol) {
  std::vector<BoundSample> samples;
  std::vector<AuxCheck> aux;
  for (double t : times) {
    const SpectralField2D th = evolve_inviscid(theta0, shear, t);
    const double h = spectral::hneg1_norm(th);
    const double env = cert.c_star / (1.0 + t * t);
    samples.push_back({t, h, env, h / env});
    if (!cert.stationary) {
      const ModeProfile f = th.mode(cert.k);
      const long long N = cert.tail_cutoff(t);
      double tail = 0.0;
      for (int l = -f.lmax(); l <= f.lmax(); ++l)
        if (std::abs(l) > N) tail += std::norm(f(l));
      aux.push_back({"y_tail", t, tail, 0.5 * cert.S, tail <= 0.5 * cert.S});
    }
  }
  BoundReport r = make_report("inviscid_hneg1", cert.to_json(), std::move(samples), tol);
  r.aux = std::move(aux);
  return r;
}

}  // namespace mixlab::inviscid
