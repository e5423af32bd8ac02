#include "mixlab/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace mixlab::cert {

using spectral::ModeProfile;
using spectral::SpectralField2D;

const char* branch_name(Branch b) { return b == Branch::x_modes ? "x_modes" : "heat_only"; }

bool mk_predicate(std::int64_t m, int k, double M, double nu, double delta_k) {
  const double md = static_cast<double>(m);
  const double kk = static_cast<double>(k);
  const bool first = C_res * kk * kk * M * M / (nu * nu * md * md) <= 0.25;
  const bool second = C_res / (nu * md) <= delta_k / 16.0;
  return first && second;
}

std::int64_t mode_mk(int k, double M, double nu, double delta_k) {
  if (k == 0) throw std::invalid_argument("mode_mk: k must be nonzero");
  if (!(nu > 0.0)) throw std::invalid_argument("mode_mk: nu must be positive");
  if (!(delta_k > 0.0)) throw std::invalid_argument("mode_mk: delta_k must be positive");
  if (M < 0.0) throw std::invalid_argument("mode_mk: M must be nonnegative");
  // First inequality <=> m >= 2 sqrt(C_res) |k| M / nu; second <=> m >= 16 C_res / (nu delta_k).
  const double x1 = 2.0 * std::sqrt(C_res) * std::abs(k) * M / nu;
  const double x2 = std::isinf(delta_k) ? 0.0 : 16.0 * C_res / (nu * delta_k);
  const double guess = std::max({std::ceil(x1), std::ceil(x2), 1.0});
  if (!(guess < 9.0e18)) throw std::overflow_error("mode_mk: m_k exceeds the int64 range");
  auto m = static_cast<std::int64_t>(guess);
  // The closed form is exact in real arithmetic; align it with the floating predicate.
  while (m > 1 && mk_predicate(m - 1, k, M, nu, delta_k)) --m;
  while (!mk_predicate(m, k, M, nu, delta_k)) ++m;
  return m;
}

ModeRecord mode_record(const ModeProfile& g, double N, double M, double nu, double beta_0) {
  ModeRecord r;
  r.k = g.k();
  r.a_k = g.l2();
  if (!(r.a_k > 0.0)) throw std::invalid_argument("mode_record: empty mode");
  const double kk = static_cast<double>(r.k) * r.k;
  double s = 0.0;
  for (int l = -g.lmax(); l <= g.lmax(); ++l) {
    const double w = kk + static_cast<double>(l) * l;
    s += w * w * std::norm(g(l));
  }
  r.Ak_norm = std::sqrt(s);
  r.L_k = nu * r.Ak_norm + std::abs(r.k) * M * r.a_k;
  r.beta_k = 2.0 * r.L_k / r.a_k;
  r.delta_k = 1.0 / r.beta_k;
  r.m_k = mode_mk(r.k, M, nu, r.delta_k);
  const double m = static_cast<double>(r.m_k);
  r.Lambda_k = nu * (kk + m * m + m + 0.5);
  r.D_k = C_res / (nu * m);
  r.theta_k = std::min(1.0, std::sqrt(r.delta_k / (32.0 * r.D_k)));
  r.gamma_k = std::max(r.beta_k, r.Lambda_k + std::log(1.0 / r.theta_k) / r.delta_k);
  r.C_k = std::max(beta_0, r.gamma_k + beta_0 * std::log(N / r.a_k));
  return r;
}

double x_mode_lower_estimate(int k, double N, double beta_0, double nu, double dx_norm) {
  // C_k >= gamma_k + beta_0 log(N / a_k), gamma_k >= Lambda_k > nu k^2 and |k| a_k <= ||d_x rho0||.
  return std::max(beta_0, nu * k * k + beta_0 * std::log(N * std::abs(k) / dx_norm));
}

C2Certificate c2_certificate(const SpectralField2D& rho0, double M, double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("c2_certificate: nu must be positive");
  if (M < 0.0) throw std::invalid_argument("c2_certificate: M must be nonnegative");
  if (!rho0.is_mean_zero()) throw std::invalid_argument("c2_certificate: datum must be mean-zero");
  C2Certificate c;
  c.N = spectral::l2_norm(rho0);
  if (c.N == 0.0) throw std::invalid_argument("c2_certificate: zero datum");
  c.M = M;
  c.nu = nu;
  c.dx_norm = spectral::dx_norm(rho0);
  c.L_0 = nu * spectral::laplacian_norm(rho0) + M * c.dx_norm;
  c.beta_0 = 2.0 * c.L_0 / c.N;
  c.delta_0 = 1.0 / c.beta_0;

  const auto& lat = rho0.lattice();
  struct Cand {
    int key;
    double lb;
  };
  std::vector<Cand> cands;
  for (int k = -lat.kmax; k <= lat.kmax; ++k) {
    if (k == 0) continue;
    if (rho0.mode(k).l2() > eps_mode * c.N) cands.push_back({k, x_mode_lower_estimate(k, c.N, c.beta_0, nu, c.dx_norm)});
  }
  auto by_estimate = [](const Cand& a, const Cand& b) { return a.lb < b.lb || (a.lb == b.lb && a.key < b.key); };
  auto better = [](double ca, int ka, double cb, int kb) { return ca < cb || (ca == cb && ka < kb); };

  if (!cands.empty()) {
    c.branch = Branch::x_modes;
    c.candidates = cands.size();
    std::sort(cands.begin(), cands.end(), by_estimate);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& cd : cands) {
      if (cd.lb > best) break;
      ModeRecord r = mode_record(rho0.mode(cd.key), c.N, M, nu, c.beta_0);
      if (better(r.C_k, r.k, best, c.k_star)) {
        best = r.C_k;
        c.k_star = r.k;
      }
      c.records.push_back(r);
    }
    c.c2 = best;
    return c;
  }

  c.branch = Branch::heat_only;
  const ModeProfile g0 = rho0.mode(0);
  for (int l = -lat.lmax; l <= lat.lmax; ++l) {
    if (l == 0) continue;
    if (std::abs(g0(l)) > eps_mode * c.N) cands.push_back({l, std::max(c.beta_0, nu * l * l)});
  }
  c.candidates = cands.size();
  std::sort(cands.begin(), cands.end(), by_estimate);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cd : cands) {
    if (cd.lb > best) break;
    HeatRecord h;
    h.l = cd.key;
    h.b_l = std::abs(g0(cd.key));
    h.C_l = std::max(c.beta_0, nu * cd.key * cd.key + c.beta_0 * std::log(c.N / h.b_l));
    if (better(h.C_l, h.l, best, c.l_star)) {
      best = h.C_l;
      c.l_star = h.l;
    }
    c.heat_records.push_back(h);
  }
  c.c2 = best;
  return c;
}

nlohmann::json C2Certificate::to_json() const {
  nlohmann::json recs = nlohmann::json::array();
  for (const auto& r : records)
    recs.push_back({{"k", r.k},         {"a_k", r.a_k},           {"Ak_norm", r.Ak_norm}, {"L_k", r.L_k},
                    {"beta_k", r.beta_k}, {"delta_k", r.delta_k}, {"m_k", r.m_k},         {"Lambda_k", r.Lambda_k},
                    {"D_k", r.D_k},     {"theta_k", r.theta_k},   {"gamma_k", r.gamma_k}, {"C_k", r.C_k}});
  nlohmann::json heat = nlohmann::json::array();
  for (const auto& h : heat_records) heat.push_back({{"l", h.l}, {"b_l", h.b_l}, {"C_l", h.C_l}});
  nlohmann::json j = {{"kind", "c2"},         {"N", N},           {"M", M},
                      {"nu", nu},             {"C_res", C_res},   {"dx_norm", dx_norm},
                      {"L_0", L_0},           {"beta_0", beta_0}, {"delta_0", delta_0},
                      {"branch", branch_name(branch)}, {"candidates", candidates}, {"c2", c2}};
  if (branch == Branch::x_modes) {
    j["k_star"] = k_star;
    j["records"] = recs;
  } else {
    j["l_star"] = l_star;
    j["heat_records"] = heat;
  }
  return j;
}

// ---------------------------------------------------------------------------

MixCertificate mixing_certificate(const SpectralField2D& rho0, double M, double nu, double c2) {
  if (!(nu > 0.0)) throw std::invalid_argument("mixing_certificate: nu must be positive");
  if (!(c2 > 0.0)) throw std::invalid_argument("mixing_certificate: c2 must be positive");
  const auto& lat = rho0.lattice();
  MixCertificate mc;
  mc.c2 = c2;
  mc.nu = nu;
  mc.M = M;
  mc.N = spectral::l2_norm(rho0);
  if (mc.N == 0.0) throw std::invalid_argument("mixing_certificate: zero datum");

  const double kc = std::ceil(std::sqrt(2.0 * c2 / nu));
  if (!(kc < 9.0e18)) throw std::overflow_error("mixing_certificate: K_c out of range");
  mc.K_c = static_cast<long long>(kc);

  const auto e = spectral::mode_energies(rho0);
  auto energy = [&](int k) { return e[static_cast<std::size_t>(k + lat.kmax)]; };
  // K_0: least J >= 0 with sum_{|k| > J} a_k^2 <= N^2 / 2; tails accumulated from the top.
  std::vector<double> tail(static_cast<std::size_t>(lat.kmax + 1), 0.0);
  for (int J = lat.kmax - 1; J >= 0; --J)
    tail[static_cast<std::size_t>(J)] = tail[static_cast<std::size_t>(J + 1)] + energy(J + 1) + energy(-(J + 1));
  mc.K_0 = lat.kmax;
  for (int J = 0; J <= lat.kmax; ++J)
    if (tail[static_cast<std::size_t>(J)] <= 0.5 * mc.N * mc.N) {
      mc.K_0 = J;
      break;
    }
  mc.K = std::max<long long>(mc.K_c, mc.K_0);

  const int top = static_cast<int>(std::min<long long>(mc.K, lat.kmax));
  for (int k = -top; k <= top; ++k) {
    const ModeProfile g = rho0.mode(k);
    const double ak = g.l2();
    if (!(ak > eps_mode * mc.N)) continue;
    MixMode m;
    m.k = k;
    m.a_k = ak;
    // J_k: least J >= 1 with sum_{|l| > J} |g_k^l|^2 <= a_k^2 / 2.
    double t = 0.0;
    std::vector<double> ytail(static_cast<std::size_t>(g.lmax() + 1), 0.0);
    for (int J = g.lmax() - 1; J >= 0; --J) {
      t += std::norm(g(J + 1)) + std::norm(g(-(J + 1)));
      ytail[static_cast<std::size_t>(J)] = t;
    }
    m.J_k = g.lmax();
    for (int J = 1; J <= g.lmax(); ++J)
      if (ytail[static_cast<std::size_t>(J)] <= 0.5 * ak * ak) {
        m.J_k = J;
        break;
      }
    if (k == 0) {
      m.N_k = m.J_k;
      m.R_k = static_cast<double>(m.N_k);
    } else {
      const double barrier = std::ceil(std::abs(k) * M / nu);
      if (!(barrier < 9.0e18)) throw std::overflow_error("mixing_certificate: N_k out of range");
      m.N_k = std::max<long long>({m.J_k, static_cast<long long>(barrier), 1});
      m.R_k = std::sqrt(static_cast<double>(k) * k + static_cast<double>(m.N_k) * static_cast<double>(m.N_k));
    }
    mc.J_star = std::max(mc.J_star, m.J_k);
    mc.R_star = std::max(mc.R_star, m.R_k);
    mc.modes.push_back(m);
  }
  if (mc.modes.empty()) throw std::logic_error("mixing_certificate: empty certified mode set");
  mc.c_star = 1.0 / (2.0 * mc.R_star);
  return mc;
}

const MixMode* MixCertificate::find(int k) const {
  for (const auto& m : modes)
    if (m.k == k) return &m;
  return nullptr;
}

nlohmann::json MixCertificate::to_json() const {
  nlohmann::json ms = nlohmann::json::array();
  for (const auto& m : modes) ms.push_back({{"k", m.k}, {"a_k", m.a_k}, {"J_k", m.J_k}, {"N_k", m.N_k}, {"R_k", m.R_k}});
  return {{"kind", "mix"}, {"c2", c2},         {"nu", nu},         {"M", M},       {"N", N},          {"K_c", K_c},
          {"K_0", K_0},    {"K", K},           {"modes", ms},      {"J_star", J_star}, {"R_star", R_star}, {"c_star", c_star}};
}

// ---------------------------------------------------------------------------

long long sharpness_n(double nu, double p) {
  const double x = std::pow(nu, -p);
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-12 * std::max(1.0, x)) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(x));
}

SharpnessCase sharpness_family(double nu, double p) {
  if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("sharpness_family: need 0 < nu <= 1");
  if (!(p > 0.0)) throw std::invalid_argument("sharpness_family: need p > 0");
  const long long n = sharpness_n(nu, p);
  if (n > 4096) throw std::invalid_argument("sharpness_family: ceil(nu^-p) too large for a dense lattice");
  SharpnessCase s;
  s.nu = nu;
  s.p = p;
  s.n = n;
  s.rho0 = SpectralField2D(spectral::Lattice(1, static_cast<int>(n)));
  s.rho0.add_cos(1.0, 0, static_cast<int>(n));
  s.expected_ratio = 1.0 / static_cast<double>(n);
  s.expected_c_star = 0.5 / static_cast<double>(n);
  s.decay_rate = nu * static_cast<double>(n) * static_cast<double>(n);
  s.decay_window = p == 1.0 && s.decay_rate >= 1.0 / nu && s.decay_rate <= 4.0 / nu;
  return s;
}

std::vector<ScalingRow> nu_scaling_report(const SpectralField2D& rho0, double M, const std::vector<double>& nus) {
  std::vector<ScalingRow> rows;
  for (double nu : nus) {
    if (!(nu > 0.0 && nu <= 1.0)) throw std::invalid_argument("nu_scaling_report: each nu must lie in (0, 1]");
    const auto c = c2_certificate(rho0, M, nu);
    rows.push_back({nu, c.c2, c.c2 * nu, c.c2 / nu, c.branch});
  }
  return rows;
}

// ---------------------------------------------------------------------------

BoundReport check_exponential_bound(const shear::ShearTrajectory& traj, const C2Certificate& cert, double tol) {
  std::vector<BoundSample> samples;
  std::vector<AuxCheck> aux;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const double r = spectral::l2_norm(traj.fields[i]);
    // margin = r e^{c2 t} / N, capped in log space (c2 t can be huge).
    const double logm = std::log(r / cert.N) + cert.c2 * t;
    const double margin = std::exp(std::min(logm, 709.0));
    samples.push_back({t, r, cert.N * std::exp(-cert.c2 * t), margin});
    const double upper = cert.N * std::exp(-cert.nu * t) * (1.0 + 1e-8);
    aux.push_back({"upper_heat_envelope", t, r, upper, r <= upper});
  }
  BoundReport rep = make_report("l2_exponential", cert.to_json(), std::move(samples), tol);
  rep.aux = std::move(aux);
  return rep;
}

BoundReport check_mixing_bound(const shear::ShearTrajectory& traj, const MixCertificate& cert, double tol) {
  std::vector<BoundSample> samples;
  std::vector<AuxCheck> aux;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const auto& f = traj.fields[i];
    const double ratio = spectral::mixing_scale(f);
    samples.push_back({t, ratio, cert.c_star, ratio * 2.0 * cert.R_star});
    for (const auto& m : cert.modes) {
      if (std::abs(m.k) > f.lattice().kmax) continue;
      const ModeProfile p = f.mode(m.k);
      const double E = p.energy();
      const int n = static_cast<int>(std::min<long long>(m.N_k, p.lmax()));
      const double L = spectral::low_block_energy(p, n);
      aux.push_back({"retention_k" + std::to_string(m.k), t, 0.5 * E - L, 1e-8, 0.5 * E - L <= 1e-8});
    }
  }
  BoundReport rep = make_report("mixing_scale", cert.to_json(), std::move(samples), tol);
  rep.aux = std::move(aux);
  return rep;
}

}  // namespace mixlab::cert
