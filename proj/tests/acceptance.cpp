// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Measured quantities are recomputed here from raw coefficients where practical.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mixlab/mixlab.hpp"

using namespace mixlab;
using spectral::Lattice;
using spectral::SpectralField2D;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kHeatRel = 1e-10;
constexpr double kDissipation = 1e-5;
constexpr double kMargin = 1e-6;
constexpr double kSandwich = 1e-8;
constexpr double kC2 = 1e-12;
constexpr double kRate = 1e-8;
constexpr double kRatio = 1e-12;
constexpr double kFloor = 1e-6;
constexpr double kRetention = 1e-8;
constexpr double kResidual = 1e-8;
constexpr double kLambda = 1e-10;
constexpr double kObservable = 1e-5;
constexpr double kSlopeLo = -1.25, kSlopeHi = -0.75;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double l2(const SpectralField2D& f) {
  double s = 0.0;
  for (const auto& c : f.coeffs()) s += std::norm(c);
  return std::sqrt(s);
}

double hneg1(const SpectralField2D& f) {
  const auto& lat = f.lattice();
  double s = 0.0;
  for (int k = -lat.kmax; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l)
      if (k != 0 || l != 0) s += std::norm(f(k, l)) / double(k * k + l * l);
  return std::sqrt(s);
}

// sum_{|l| <= n} |f(k, l)|^2 and the full x-mode energy.
std::pair<double, double> low_and_total(const SpectralField2D& f, int k, long long n) {
  double lo = 0.0, tot = 0.0;
  for (int l = -f.lattice().lmax; l <= f.lattice().lmax; ++l) {
    const double e = std::norm(f(k, l));
    tot += e;
    if (std::abs(l) <= n) lo += e;
  }
  return {lo, tot};
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return v;
}

SpectralField2D single(int kx, int ky, bool cosine, Lattice lat) {
  SpectralField2D f(lat);
  cosine ? f.add_cos(1.0, kx, ky) : f.add_sin(1.0, kx, ky);
  return f;
}

const flows::ShearSpec kNoShear(std::vector<flows::WaveTerm>{});

// ---------------------------------------------------------------------------

Outcome heat_exactness() {
  const double nu = 0.1;
  const auto f = single(0, 1, true, Lattice(1, 4));
  const std::vector<double> ts{0.5, 1.0, 2.0};
  const auto tr = shear::evolve_shear(f, kNoShear, nu, ts);
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double ref = std::exp(-nu * ts[i]) / std::sqrt(2.0);
    worst = std::max(worst, std::abs(l2(tr.fields[i]) - ref) / ref);
  }
  return {worst <= kHeatRel, fmt("max rel err %.3e (tol %.0e)", worst, kHeatRel)};
}

Outcome energy_identity() {
  const auto f = single(1, 0, true, Lattice(1, 32));
  shear::EvolveOptions eo;
  eo.dt = 1e-3;
  const auto tr = shear::evolve_shear(f, flows::shear_preset("couette"), 0.1, linspace(0.0, 1.0, 1001), eo);
  const double r = shear::dissipation_report(tr).max_residual;
  return {r <= kDissipation, fmt("max residual %.3e (tol %.0e)", r, kDissipation)};
}

Outcome inviscid_certificate() {
  const auto theta0 = single(1, 0, true, Lattice(1, 1));
  const auto shear = flows::shear_preset("couette");
  const auto cert = inviscid::inviscid_certificate(theta0, shear);
  const Lattice big(1, 256);
  double worst = std::numeric_limits<double>::infinity(), worst_tail = -1.0;
  for (double t : linspace(0.0, 50.0, 200)) {
    const auto th = inviscid::evolve_inviscid(theta0, shear, t, big);
    worst = std::min(worst, hneg1(th) * (1 + t * t) / cert.c_star);
    const auto [lo, tot] = low_and_total(th, cert.k, cert.tail_cutoff(t));
    worst_tail = std::max(worst_tail, (tot - lo) / (0.5 * cert.S));
  }
  const bool ok = worst >= 1.0 - kMargin && worst_tail <= 1.0;
  return {ok, fmt("c_star %.4e, min hneg1(1+t^2)/c_star %.4f, max tail/(S/2) %.3e", cert.c_star, worst, worst_tail)};
}

struct CorpusCase {
  std::string file;
  harness::Scenario s;
  flows::ShearSpec shear;
  cert::C2Certificate c2;
  cert::MixCertificate mix;
  shear::ShearTrajectory traj;
};

const std::vector<CorpusCase>& corpus() {
  static const std::vector<CorpusCase> cases = [] {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(fs::path(MIXLAB_SOURCE_DIR) / "scenarios" / "corpus"))
      if (e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<CorpusCase> out;
    for (const auto& p : files) {
      auto s = harness::load_scenario(p);
      auto red = flows::mean_zero_reduce(*s.shear);
      auto c2 = cert::c2_certificate(s.initial, red.shear.M(), *s.nu);
      auto mix = cert::mixing_certificate(s.initial, red.shear.M(), *s.nu, c2.c2);
      shear::EvolveOptions eo;
      eo.dt = s.dt;
      eo.lmax = s.lmax_evolve;
      auto tr = shear::evolve_shear(s.initial, red.shear, *s.nu, s.times, eo);
      out.push_back({p.filename().string(), std::move(s), red.shear, std::move(c2), std::move(mix), std::move(tr)});
    }
    return out;
  }();
  return cases;
}

Outcome c2_validity() {
  const auto& cs = corpus();
  double lower = std::numeric_limits<double>::infinity(), upper = 0.0;
  for (const auto& c : cs) {
    const double N = l2(c.s.initial);
    for (std::size_t i = 0; i < c.traj.times.size(); ++i) {
      const double t = c.traj.times[i], r = l2(c.traj.fields[i]);
      lower = std::min(lower, r * std::exp(c.c2.c2 * t) / N);
      upper = std::max(upper, r / (N * std::exp(-*c.s.nu * t)));
    }
  }
  const bool ok = cs.size() == 12 && lower >= 1.0 - kMargin && upper <= 1.0 + kSandwich;
  return {ok, fmt("%zu scenarios, min |rho|e^{c2 t}/N %.6f, max |rho|e^{nu t}/N %.12f", cs.size(), lower, upper)};
}

Outcome heat_branch() {
  double worst = 0.0;
  for (double nu : {0.1, 0.05, 0.025}) {
    const auto c = cert::c2_certificate(single(0, 1, true, Lattice(1, 1)), 0.0, nu);
    if (c.branch != cert::Branch::heat_only) return {false, "branch is not heat-only"};
    worst = std::max(worst, std::abs(c.c2 - 2 * nu) / (2 * nu));
  }
  return {worst <= kC2, fmt("max |c2 - 2 nu| / (2 nu) %.3e (tol %.0e)", worst, kC2)};
}

Outcome sharpness() {
  const double nu = 0.25;
  const auto sc = cert::sharpness_family(nu, 1.0);
  const std::vector<double> ts = linspace(0.0, 1.0, 11);
  const auto tr = shear::evolve_shear(sc.rho0, kNoShear, nu, ts);
  const double rate = -std::log(l2(tr.fields.back()) / l2(tr.fields.front())) / ts.back();
  double ratio_err = 0.0;
  for (const auto& f : tr.fields) ratio_err = std::max(ratio_err, std::abs(hneg1(f) / l2(f) - 0.25));
  const auto c2 = cert::c2_certificate(sc.rho0, 0.0, nu);
  const auto mc = cert::mixing_certificate(sc.rho0, 0.0, nu, c2.c2);
  const double measured_over_cert = 0.25 / mc.c_star;
  const double nn = nu * double(sc.n) * double(sc.n);
  const bool ok = sc.n == 4 && std::abs(rate - 4.0) <= kRate && nn >= 1 / nu && nn <= 4 / nu && ratio_err <= kRatio &&
                  mc.c_star == 0.125 && std::abs(measured_over_cert - 2.0) <= kRatio;
  return {ok, fmt("n %lld, rate %.10f, max |ratio - 1/4| %.1e, c_star %.4f, measured/certified %.12f", sc.n, rate,
                  ratio_err, mc.c_star, measured_over_cert)};
}

Outcome mixing_floor() {
  double floor_margin = std::numeric_limits<double>::infinity(), retention = -std::numeric_limits<double>::infinity();
  for (const auto& c : corpus()) {
    for (const auto& f : c.traj.fields) {
      floor_margin = std::min(floor_margin, hneg1(f) / l2(f) - c.mix.c_star);
      for (const auto& m : c.mix.modes) {
        if (std::abs(m.k) > f.lattice().kmax) continue;
        const auto [lo, tot] = low_and_total(f, m.k, m.N_k);
        retention = std::max(retention, 0.5 * tot - lo);
      }
    }
  }
  const bool ok = floor_margin >= -kFloor && retention <= kRetention;
  return {ok, fmt("min mixing_scale - c_star %.4e, max E/2 - L %.3e", floor_margin, retention)};
}

std::int64_t scan_mk(int k, double M, double nu, double delta) {
  for (std::int64_t m = 1;; ++m) {
    const double md = static_cast<double>(m);
    if (1e4 * k * k * M * M / (nu * nu * md * md) <= 0.25 && 1e4 / (nu * md) <= delta / 16.0) return m;
  }
}

Outcome mk_oracle() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int mismatches = 0;
  for (int i = 0; i < 200; ++i) {
    const int k = 1 + static_cast<int>(rng() % 5);
    const double M = u(rng);
    const double nu = 0.5 + 0.5 * u(rng);
    const double delta = std::exp(std::log(100.0) * u(rng));
    if (cert::mode_mk(k, M, nu, delta) != scan_mk(k, M, nu, delta)) ++mismatches;
  }
  return {mismatches == 0, fmt("%d mismatches in 200 tuples", mismatches)};
}

Outcome spectrum() {
  const double nu = 0.1;
  const int cutoff = 24;
  // zero drift: exact diagonal
  const auto op0 = averaging::averaged_operator(flows::flow_preset("zero"), nu, cutoff);
  std::vector<double> ref;
  for (const auto& [k, l] : op0.modes()) ref.push_back(-nu * double(k * k + l * l));
  std::sort(ref.begin(), ref.end());
  std::vector<double> got;
  double imag = 0.0;
  for (const auto& e : averaging::operator_eigenvalues(op0)) {
    got.push_back(e.real());
    imag = std::max(imag, std::abs(e.imag()));
  }
  std::sort(got.begin(), got.end());
  const bool exact = got == ref && imag == 0.0;

  // sin y drift: residuals of every block eigenpair
  const auto op = averaging::averaged_operator(flows::flow_preset("couette"), nu, cutoff);
  double res = 0.0;
  for (const auto& b : op.blocks()) {
    Eigen::ComplexEigenSolver<linalg::Matrix> es(b.matrix);
    for (Eigen::Index j = 0; j < b.matrix.rows(); ++j) {
      const linalg::Vector v = es.eigenvectors().col(j).normalized();
      res = std::max(res, (b.matrix * v - es.eigenvalues()(j) * v).norm());
    }
  }
  const auto ds = averaging::detecting_spectrum(op, single(0, 1, true, Lattice(1, 1)));
  const double lam = std::abs(ds.lambda_nu + nu);
  const auto dx = averaging::detecting_spectrum(op, single(1, 0, true, Lattice(1, 1)));
  res = std::max({res, ds.max_residual, dx.max_residual});
  const bool ok = exact && res <= kResidual && lam <= kLambda;
  return {ok, fmt("zero-drift exact %s, max residual %.3e, |lambda_nu + nu| %.3e", exact ? "yes" : "no", res, lam)};
}

Outcome observable_law() {
  const double nu = 0.1;
  const int cutoff = 24;
  const auto op = averaging::averaged_operator(flows::flow_preset("couette"), nu, cutoff);
  const auto rho0 = single(1, 0, true, Lattice(1, cutoff));
  const auto ds = averaging::detecting_spectrum(op, rho0);
  // an eigenvector of B* for lambda_nu, from the block that pairs with rho0
  const auto& b = op.blocks()[op.block_of(op.index_of(1, 0))];
  Eigen::ComplexEigenSolver<linalg::Matrix> es(b.matrix);
  Eigen::Index j = 0;
  for (Eigen::Index i = 1; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i) - ds.lambda_nu) < std::abs(es.eigenvalues()(j) - ds.lambda_nu)) j = i;
  const auto lambda = es.eigenvalues()(j);
  linalg::Vector phi = linalg::Vector::Zero(static_cast<Eigen::Index>(op.dim()));
  for (std::size_t i = 0; i < b.modes.size(); ++i) phi(b.modes[i]) = es.eigenvectors()(static_cast<Eigen::Index>(i), j);

  const auto ts = linspace(0.0, 2.0, 21);
  shear::EvolveOptions eo;
  eo.dt = 1e-3;
  const auto tr = shear::evolve_shear(rho0, flows::shear_preset("couette"), nu, ts, eo);
  const auto q0 = averaging::bilinear(op, op.to_vector(tr.fields[0]), phi);
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto q = averaging::bilinear(op, op.to_vector(tr.fields[i]), phi);
    worst = std::max(worst, std::abs(q - std::exp(lambda * ts[i]) * q0) / std::abs(q0));
  }
  return {worst <= kObservable && std::abs(q0) > 0.0,
          fmt("lambda %.6f%+.6fi, |q(0)| %.3e, max rel dev %.3e", lambda.real(), lambda.imag(), std::abs(q0), worst)};
}

Outcome averaging_order() {
  using flows::WaveTerm;
  const flows::FlowSpec flow({WaveTerm{0.5, 1, -1, flows::Trig::cos, flows::TimeMode::sin},
                              WaveTerm{-0.5, 1, 1, flows::Trig::cos, flows::TimeMode::sin}},
                             1.0);
  SpectralField2D f(Lattice(16, 16));
  f.add_cos(1.0, 1, 0);
  f.add_sin(0.5, 0, 2);
  const double nu = 0.5;
  const auto heat = averaging::evolve_2d(f, flows::flow_preset("zero"), 0.0, nu, {1.0});
  std::vector<double> x, y;
  for (double A : {50.0, 100.0, 200.0, 400.0}) {
    const auto tr = averaging::evolve_2d(f, flow, A, nu, {1.0});
    x.push_back(std::log(A));
    y.push_back(std::log(l2(tr.fields[0] - heat.fields[0])));
  }
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {slope >= kSlopeLo && slope <= kSlopeHi, fmt("slope %.4f in [%.2f, %.2f]", slope, kSlopeLo, kSlopeHi)};
}

Outcome fast_bound() {
  const auto s = harness::builtin_scenario("fast_cellular");
  const double nu = *s.nu;
  const double eta = averaging::small_viscosity_eta(nu);
  const auto est = averaging::estimate_fast(*s.flow, s.initial, nu, eta, s.cutoff);
  const auto cert = averaging::fast_certificate(*s.flow, s.initial, nu, eta, est);
  const auto tr = averaging::evolve_2d(s.initial, *s.flow, s.A, nu, linspace(0.0, 2.0, 21));
  const auto rep = averaging::check_fast_bound(tr, cert);
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& p : rep.samples) worst = std::min(worst, p.margin);
  const auto& terms = rep.certificate.at("A0_terms");
  bool itemized = terms.size() == 6;
  for (const char* key : {"4K", "nu", "64K^2/nu", "1000 C_S K", "2K|rho0|/Q", "D K/eta"})
    itemized = itemized && terms.contains(key);
  const bool ok = worst >= 1.0 - kMargin && itemized && rep.pass;
  return {ok, fmt("A %.0f, A0 %.3e, regime %s, exponent %.4f, min margin %.4f, terms itemized %s", s.A, cert.A0,
                  rep.certificate.at("regime").get<std::string>().c_str(),
                  rep.certificate.at("exponent_used").get<double>(), worst, itemized ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"heat exactness", heat_exactness},
      {"energy identity", energy_identity},
      {"inviscid certificate", inviscid_certificate},
      {"c2 certificate validity", c2_validity},
      {"heat-branch closed form", heat_branch},
      {"sharpness family", sharpness},
      {"mixing floor and retention", mixing_floor},
      {"mode_mk oracle equivalence", mk_oracle},
      {"averaged-operator spectrum", spectrum},
      {"observable law", observable_law},
      {"averaging order", averaging_order},
      {"fast-bound check", fast_bound},
  };
  int failures = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.pass) ++failures;
    std::printf("%s %2zu %-28s %s [%.2fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%zu/%zu criteria passed in %.1fs\n", criteria.size() - failures, criteria.size(), total);
  return failures == 0 ? 0 : 1;
}
