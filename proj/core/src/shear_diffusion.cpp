#include "mixlab/shear_diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mixlab/fft.hpp"
#include "mixlab/parallel.hpp"

namespace mixlab::shear {

using spectral::cplx;
using spectral::ModeProfile;
using spectral::SpectralField2D;

double default_dt(int k, double M) { return std::min(1e-2, 0.1 / (std::abs(k) * M + 1.0)); }

namespace {

// Caches the grid, the heat half-step factors and (for steady shears) the advection factor.
class ModeStepper {
 public:
  ModeStepper(int k, int lmax, const flows::ShearSpec& shear, double nu, double dt)
      : k_(k), lmax_(lmax), shear_(shear), nu_(nu), dt_(dt) {
    if (!(nu > 0.0)) throw std::invalid_argument("shear diffusion needs nu > 0 (use the inviscid solver for nu = 0)");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    heat_half_.resize(static_cast<std::size_t>(2 * lmax + 1));
    for (int l = -lmax; l <= lmax; ++l)
      heat_half_[static_cast<std::size_t>(l + lmax)] = std::exp(-0.5 * nu * (double(k) * k + double(l) * l) * dt);
    active_ = k != 0 && !shear.terms().empty();
    if (!active_) return;
    // exp(-i k U dt) has effective band about band(U) (1 + |k| M dt) plus a margin.
    const int band = std::max(1, shear.band());
    const double spread = band * (1.0 + std::abs(k) * shear.M() * dt);
    ny_ = fft::nice_size(std::max(2 * (2 * lmax + 1), static_cast<int>(std::ceil(2 * lmax + spread + 32))));
    if (shear.time_kind() == flows::TimeKind::steady) advection_ = factor(0.0);
  }

  void step(std::vector<cplx>& c, double t) const {
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= heat_half_[i];
    if (active_) {
      auto vals = spectral::sample_profile(c, lmax_, ny_);
      const auto& fac = advection_.empty() ? factor(t + 0.5 * dt_) : advection_;
      for (int j = 0; j < ny_; ++j) vals[static_cast<std::size_t>(j)] *= fac[static_cast<std::size_t>(j)];
      spectral::analyze_profile(vals, lmax_, c);
    }
    for (std::size_t i = 0; i < c.size(); ++i) c[i] *= heat_half_[i];
  }

 private:
  std::vector<cplx> factor(double t) const {
    std::vector<cplx> out(static_cast<std::size_t>(ny_));
    constexpr double two_pi = 6.283185307179586476925286766559;
    for (int j = 0; j < ny_; ++j)
      out[static_cast<std::size_t>(j)] = std::polar(1.0, -k_ * shear_.value(t, two_pi * j / ny_) * dt_);
    return out;
  }

  int k_, lmax_;
  const flows::ShearSpec& shear_;
  double nu_, dt_;
  bool active_ = false;
  int ny_ = 0;
  std::vector<double> heat_half_;
  std::vector<cplx> advection_;
};

void require_times(const std::vector<double>& times) {
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev)) throw std::invalid_argument("sample times must be nonnegative and nondecreasing");
    prev = t;
  }
}

}  // namespace

ModeProfile step_mode(const ModeProfile& profile, const flows::ShearSpec& shear, double nu, double t, double dt) {
  ModeStepper s(profile.k(), profile.lmax(), shear, nu, dt);
  std::vector<cplx> c(profile.coeffs().begin(), profile.coeffs().end());
  s.step(c, t);
  return ModeProfile(profile.k(), profile.lmax(), std::move(c));
}

ModeTrajectory evolve_mode(const ModeProfile& f0, const flows::ShearSpec& shear, double nu,
                           const std::vector<double>& times, EvolveOptions opts) {
  if (!(nu > 0.0)) throw std::invalid_argument("shear diffusion needs nu > 0 (use the inviscid solver for nu = 0)");
  require_times(times);
  const int k = f0.k();
  const int lmax = opts.lmax > 0 ? opts.lmax : f0.lmax();
  const double h = opts.dt > 0.0 ? opts.dt : default_dt(k, shear.M());

  std::vector<cplx> c(static_cast<std::size_t>(2 * lmax + 1));
  for (int l = -std::min(lmax, f0.lmax()); l <= std::min(lmax, f0.lmax()); ++l) c[static_cast<std::size_t>(l + lmax)] = f0(l);

  ModeTrajectory tr{k, nu, times, {}, {}};
  double t = 0.0;
  const bool zero = std::all_of(c.begin(), c.end(), [](const cplx& x) { return x == cplx(0.0); });
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0 && !zero) {
      const long long n = std::max(1LL, static_cast<long long>(std::ceil(span / h - 1e-9)));
      const double dt = span / static_cast<double>(n);
      ModeStepper stepper(k, lmax, shear, nu, dt);
      for (long long i = 0; i < n; ++i) stepper.step(c, t + static_cast<double>(i) * dt);
    }
    t = target;
    ModeProfile p(k, lmax, c);
    tr.energies.push_back(p.energy());
    tr.profiles.push_back(std::move(p));
  }
  return tr;
}

ShearTrajectory evolve_shear(const SpectralField2D& rho0, const flows::ShearSpec& shear, double nu,
                             const std::vector<double>& times, EvolveOptions opts) {
  if (!(nu > 0.0)) throw std::invalid_argument("shear diffusion needs nu > 0 (use the inviscid solver for nu = 0)");
  if (!rho0.is_mean_zero()) throw std::invalid_argument("evolve_shear: rho0 must be mean-zero");
  require_times(times);
  const auto in = rho0.lattice();
  const spectral::Lattice out(in.kmax, opts.lmax > 0 ? opts.lmax : in.lmax);
  const bool real = rho0.is_real();
  const int kmin = real ? 0 : -in.kmax;

  std::vector<ModeTrajectory> modes(static_cast<std::size_t>(in.kmax - kmin + 1));
  parallel_for(modes.size(), [&](std::size_t i) {
    const int k = kmin + static_cast<int>(i);
    EvolveOptions o = opts;
    o.lmax = out.lmax;
    modes[i] = evolve_mode(rho0.mode(k), shear, nu, times, o);
  });

  ShearTrajectory tr{nu, times, {}};
  tr.fields.reserve(times.size());
  for (std::size_t s = 0; s < times.size(); ++s) {
    SpectralField2D f(out);
    for (const auto& m : modes) {
      f.set_mode(m.profiles[s]);
      if (real && m.k > 0)
        for (int l = -out.lmax; l <= out.lmax; ++l) f(-m.k, -l) = std::conj(m.profiles[s](l));
    }
    tr.fields.push_back(std::move(f));
  }
  return tr;
}

DissipationReport dissipation_report(const ShearTrajectory& traj) {
  DissipationReport r;
  if (traj.fields.size() < 2) return r;
  const double e0 = std::pow(spectral::l2_norm(traj.fields.front()), 2);
  if (e0 == 0.0) return r;
  for (std::size_t i = 0; i + 1 < traj.fields.size(); ++i) {
    const double dt = traj.times[i + 1] - traj.times[i];
    if (!(dt > 0.0)) continue;
    const double a = std::pow(spectral::l2_norm(traj.fields[i]), 2);
    const double b = std::pow(spectral::l2_norm(traj.fields[i + 1]), 2);
    const double ga = std::pow(spectral::gradient_norm(traj.fields[i]), 2);
    const double gb = std::pow(spectral::gradient_norm(traj.fields[i + 1]), 2);
    const double res = std::abs(0.5 * (b - a) / dt + traj.nu * 0.5 * (ga + gb)) / e0;
    r.t_mid.push_back(0.5 * (traj.times[i] + traj.times[i + 1]));
    r.residual.push_back(res);
    r.max_residual = std::max(r.max_residual, res);
  }
  return r;
}

}  // namespace mixlab::shear
