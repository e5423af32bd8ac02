#include "mixlab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "mixlab/fft.hpp"

namespace mixlab::averaging {

using spectral::Lattice;
using spectral::SpectralField2D;
using std::numbers::pi;

// ---------------------------------------------------------------------------
// Solver

double cfl_dt(const flows::FlowSpec& flow, double A, const Lattice& lattice, double cfl) {
  const double rate = A * 2.0 * pi / flow.period() + flow.lip() * std::max(lattice.kmax, lattice.lmax);
  return rate > 0.0 ? cfl / rate : std::numeric_limits<double>::infinity();
}

namespace {

int wrap(int m, int n) { return ((m % n) + n) % n; }

class Advection2D {
 public:
  Advection2D(const flows::FlowSpec& flow, const Lattice& lat) : flow_(flow), lat_(lat) {
    nx_ = fft::nice_size(std::max(2 * lat.kmax + flow.band_x() + 1, 2 * lat.kmax + 2));
    ny_ = fft::nice_size(std::max(2 * lat.lmax + flow.band_y() + 1, 2 * lat.lmax + 2));
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    for (const auto& w : flow.terms()) {
      std::vector<double> ux(n), uy(n);
      flows::WaveTerm unit = w;
      unit.time = flows::TimeMode::steady;
      const flows::FlowSpec single({unit}, flow.period());
      for (int i = 0; i < nx_; ++i)
        for (int j = 0; j < ny_; ++j) {
          const auto [a, b] = single.velocity(0.0, 2.0 * pi * i / nx_, 2.0 * pi * j / ny_);
          ux[static_cast<std::size_t>(i) * ny_ + j] = a;
          uy[static_cast<std::size_t>(i) * ny_ + j] = b;
        }
      ux_.push_back(std::move(ux));
      uy_.push_back(std::move(uy));
    }
    gx_.resize(n);
    gy_.resize(n);
    sx_.resize(n);
    sy_.resize(n);
    ufx_.resize(n);
    ufy_.resize(n);
  }

  // out = -P(u(theta) . grad f)
  void rhs(const std::vector<cplx>& f, double theta, std::vector<cplx>& out) {
    const std::size_t n = static_cast<std::size_t>(nx_) * ny_;
    std::fill(ufx_.begin(), ufx_.end(), 0.0);
    std::fill(ufy_.begin(), ufy_.end(), 0.0);
    for (std::size_t t = 0; t < ux_.size(); ++t) {
      const double tf = flow_.terms()[t].time_factor(theta, flow_.period());
      if (tf == 0.0) continue;
      for (std::size_t i = 0; i < n; ++i) {
        ufx_[i] += tf * ux_[t][i];
        ufy_[i] += tf * uy_[t][i];
      }
    }
    std::fill(sx_.begin(), sx_.end(), cplx(0.0));
    std::fill(sy_.begin(), sy_.end(), cplx(0.0));
    const int nl = lat_.nl();
    for (int k = -lat_.kmax; k <= lat_.kmax; ++k)
      for (int l = -lat_.lmax; l <= lat_.lmax; ++l) {
        const cplx c = f[static_cast<std::size_t>(k + lat_.kmax) * nl + (l + lat_.lmax)];
        const std::size_t g = static_cast<std::size_t>(wrap(k, nx_)) * ny_ + wrap(l, ny_);
        sx_[g] = cplx(0.0, k) * c;
        sy_[g] = cplx(0.0, l) * c;
      }
    fft::synthesis_2d(nx_, ny_, sx_, gx_);
    fft::synthesis_2d(nx_, ny_, sy_, gy_);
    for (std::size_t i = 0; i < n; ++i) gx_[i] = ufx_[i] * gx_[i] + ufy_[i] * gy_[i];
    fft::analysis_2d(nx_, ny_, gx_, sx_);
    for (int k = -lat_.kmax; k <= lat_.kmax; ++k)
      for (int l = -lat_.lmax; l <= lat_.lmax; ++l)
        out[static_cast<std::size_t>(k + lat_.kmax) * nl + (l + lat_.lmax)] =
            -sx_[static_cast<std::size_t>(wrap(k, nx_)) * ny_ + wrap(l, ny_)];
    out[static_cast<std::size_t>(lat_.kmax) * nl + lat_.lmax] = 0.0;
  }

 private:
  const flows::FlowSpec& flow_;
  Lattice lat_;
  int nx_ = 0, ny_ = 0;
  std::vector<std::vector<double>> ux_, uy_;
  std::vector<double> ufx_, ufy_;
  std::vector<cplx> gx_, gy_, sx_, sy_;
};

}  // namespace

Trajectory2D evolve_2d(const SpectralField2D& rho0, const flows::FlowSpec& flow, double A, double nu,
                       const std::vector<double>& times, Evolve2DOptions opts) {
  if (!rho0.is_mean_zero()) throw std::invalid_argument("evolve_2d: rho0 must be mean-zero");
  if (nu < 0.0) throw std::invalid_argument("evolve_2d: nu must be >= 0");
  if (A < 0.0) throw std::invalid_argument("evolve_2d: A must be >= 0");
  double prev = 0.0;
  for (double t : times) {
    if (!(t >= prev)) throw std::invalid_argument("evolve_2d: times must be nonnegative and nondecreasing");
    prev = t;
  }
  const Lattice lat = rho0.lattice();
  const double h = std::min(opts.dt > 0.0 ? opts.dt : std::numeric_limits<double>::infinity(),
                            cfl_dt(flow, A, lat, opts.cfl));
  const double hmax = std::isfinite(h) ? h : 1e-2;
  Advection2D adv(flow, lat);
  const bool frozen = A == 0.0 || flow.time_kind() == flows::TimeKind::steady;
  const bool no_flow = flow.terms().empty();

  std::vector<cplx> c(rho0.coeffs().begin(), rho0.coeffs().end());
  std::vector<cplx> k1(c.size()), k2(c.size()), k3(c.size()), k4(c.size()), tmp(c.size());
  std::vector<double> heat(c.size());
  const int nl = lat.nl();

  Trajectory2D tr{nu, A, times, {}};
  double t = 0.0;
  for (double target : times) {
    const double span = target - t;
    if (span > 0.0) {
      const long long n = no_flow ? 1 : std::max(1LL, static_cast<long long>(std::ceil(span / hmax - 1e-9)));
      const double dt = span / static_cast<double>(n);
      for (int k = -lat.kmax; k <= lat.kmax; ++k)
        for (int l = -lat.lmax; l <= lat.lmax; ++l)
          heat[static_cast<std::size_t>(k + lat.kmax) * nl + (l + lat.lmax)] =
              std::exp(-0.5 * nu * (double(k) * k + double(l) * l) * dt);
      for (long long s = 0; s < n; ++s) {
        const double t0 = t + static_cast<double>(s) * dt;
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= heat[i];
        if (!no_flow) {
          auto phase = [&](double tau) { return frozen ? 0.0 : A * tau; };
          adv.rhs(c, phase(t0), k1);
          for (std::size_t i = 0; i < c.size(); ++i) tmp[i] = c[i] + 0.5 * dt * k1[i];
          adv.rhs(tmp, phase(t0 + 0.5 * dt), k2);
          for (std::size_t i = 0; i < c.size(); ++i) tmp[i] = c[i] + 0.5 * dt * k2[i];
          adv.rhs(tmp, phase(t0 + 0.5 * dt), k3);
          for (std::size_t i = 0; i < c.size(); ++i) tmp[i] = c[i] + dt * k3[i];
          adv.rhs(tmp, phase(t0 + dt), k4);
          for (std::size_t i = 0; i < c.size(); ++i) c[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        for (std::size_t i = 0; i < c.size(); ++i) c[i] *= heat[i];
      }
    }
    t = target;
    SpectralField2D f(lat);
    std::copy(c.begin(), c.end(), f.coeffs().begin());
    tr.fields.push_back(std::move(f));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Averaged operator

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

AveragedOperator::AveragedOperator(const flows::SteadyVelocity& ubar, double nu, int cutoff)
    : nu_(nu), cutoff_(cutoff) {
  if (cutoff < 1) throw std::invalid_argument("averaged operator: cutoff must be >= 1");
  if (nu < 0.0) throw std::invalid_argument("averaged operator: nu must be >= 0");
  for (int k = -cutoff; k <= cutoff; ++k)
    for (int l = -cutoff; l <= cutoff; ++l)
      if (k != 0 || l != 0) modes_.emplace_back(k, l);
  const std::size_t n = modes_.size();

  struct Shift {
    int sk, sl;
    cplx ux, uy;
  };
  std::vector<Shift> shifts;
  const auto& ul = ubar.ux.lattice();
  for (int k = -ul.kmax; k <= ul.kmax; ++k)
    for (int l = -ul.lmax; l <= ul.lmax; ++l) {
      const cplx a = ubar.ux(k, l), b = ubar.uy(k, l);
      if (a == cplx(0.0) && b == cplx(0.0)) continue;
      shifts.push_back({k, l, a, b});
      if (2 * std::max(std::abs(k), std::abs(l)) > cutoff) band_warning_ = true;
    }

  // Drift entries: (u . grad f)^(kappa) = sum_s i (ux(s) k' + uy(s) l') f(kappa - s).
  struct Entry {
    int row, col;
    cplx v;
  };
  std::vector<Entry> entries;
  UnionFind uf(n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto [kp, lp] = modes_[j];
    for (const auto& s : shifts) {
      const int k = kp + s.sk, l = lp + s.sl;
      if (std::abs(k) > cutoff || std::abs(l) > cutoff || (k == 0 && l == 0)) continue;
      const cplx v = cplx(0.0, 1.0) * (s.ux * double(kp) + s.uy * double(lp));
      if (v == cplx(0.0)) continue;
      const int i = index_of(k, l);
      entries.push_back({i, static_cast<int>(j), v});
      uf.unite(i, static_cast<int>(j));
    }
  }

  std::map<int, std::size_t> root_to_block;
  block_of_.resize(n);
  pos_in_block_.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const int r = uf.find(static_cast<int>(j));
    auto [it, inserted] = root_to_block.try_emplace(r, blocks_.size());
    if (inserted) blocks_.emplace_back();
    auto& b = blocks_[it->second];
    block_of_[j] = it->second;
    pos_in_block_[j] = static_cast<int>(b.modes.size());
    b.modes.push_back(static_cast<int>(j));
  }
  for (auto& b : blocks_) {
    const auto m = static_cast<Eigen::Index>(b.modes.size());
    b.matrix = Matrix::Zero(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const auto [k, l] = modes_[static_cast<std::size_t>(b.modes[static_cast<std::size_t>(a)])];
      b.matrix(a, a) = -nu * (double(k) * k + double(l) * l);
    }
  }
  for (const auto& e : entries) {
    auto& b = blocks_[block_of_[static_cast<std::size_t>(e.row)]];
    b.matrix(pos_in_block_[static_cast<std::size_t>(e.row)], pos_in_block_[static_cast<std::size_t>(e.col)]) += e.v;
  }
}

int AveragedOperator::index_of(int k, int l) const {
  if (k == 0 && l == 0) return -1;
  if (std::abs(k) > cutoff_ || std::abs(l) > cutoff_) throw std::out_of_range("mode outside operator cutoff");
  const int flat = (k + cutoff_) * (2 * cutoff_ + 1) + (l + cutoff_);
  const int centre = cutoff_ * (2 * cutoff_ + 1) + cutoff_;
  return flat < centre ? flat : flat - 1;
}

Matrix AveragedOperator::dense() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Matrix m = Matrix::Zero(n, n);
  for (const auto& b : blocks_)
    for (std::size_t i = 0; i < b.modes.size(); ++i)
      for (std::size_t j = 0; j < b.modes.size(); ++j)
        m(b.modes[i], b.modes[j]) = b.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  return m;
}

Vector AveragedOperator::apply(const Vector& f) const {
  if (f.size() != static_cast<Eigen::Index>(dim())) throw std::invalid_argument("apply: dimension mismatch");
  Vector out = Vector::Zero(f.size());
  for (const auto& b : blocks_) {
    Vector x(static_cast<Eigen::Index>(b.modes.size()));
    for (std::size_t i = 0; i < b.modes.size(); ++i) x(static_cast<Eigen::Index>(i)) = f(b.modes[i]);
    const Vector y = b.matrix * x;
    for (std::size_t i = 0; i < b.modes.size(); ++i) out(b.modes[i]) = y(static_cast<Eigen::Index>(i));
  }
  return out;
}

Vector AveragedOperator::to_vector(const SpectralField2D& f) const {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim()));
  const auto& lat = f.lattice();
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto [k, l] = modes_[i];
    if (lat.contains(k, l)) v(static_cast<Eigen::Index>(i)) = f(k, l);
  }
  return v;
}

SpectralField2D AveragedOperator::to_field(const Vector& v) const {
  SpectralField2D f(lattice());
  for (std::size_t i = 0; i < modes_.size(); ++i) f(modes_[i].first, modes_[i].second) = v(static_cast<Eigen::Index>(i));
  return f;
}

AveragedOperator averaged_operator(const flows::FlowSpec& flow, double nu, int cutoff) {
  return AveragedOperator(flows::time_average(flow), nu, cutoff);
}

cplx bilinear(const AveragedOperator& op, const Vector& f, const Vector& g) {
  cplx s = 0.0;
  const auto& m = op.modes();
  for (std::size_t i = 0; i < m.size(); ++i)
    s += f(static_cast<Eigen::Index>(i)) * g(op.index_of(-m[i].first, -m[i].second));
  return s;
}

// ---------------------------------------------------------------------------
// Detecting spectrum

namespace {

struct EigenRef {
  cplx value;
  std::size_t block;
  Eigen::Index pos;
};

bool by_decay(const cplx& a, const cplx& b) {
  return a.real() > b.real() || (a.real() == b.real() && a.imag() < b.imag());
}

double h2_weight(int k, int l) {
  const double q = 1.0 + double(k) * k + double(l) * l;
  return q * q;
}

}  // namespace

std::vector<cplx> operator_eigenvalues(const AveragedOperator& op) {
  std::vector<cplx> ev;
  ev.reserve(op.dim());
  for (const auto& b : op.blocks()) {
    if (b.matrix.rows() == 1) {
      ev.push_back(b.matrix(0, 0));
      continue;
    }
    const auto sf = linalg::schur(b.matrix);
    for (Eigen::Index i = 0; i < sf.T.rows(); ++i) ev.push_back(sf.T(i, i));
  }
  std::sort(ev.begin(), ev.end(), by_decay);
  return ev;
}

DetectingSpectrum detecting_spectrum(const AveragedOperator& op, const SpectralField2D& rho0, DetectOptions opts) {
  DetectingSpectrum ds;
  ds.tol_cluster = opts.tol_cluster >= 0.0 ? opts.tol_cluster : 1e-6 * op.nu();
  ds.eps_detect = opts.eps_detect;
  const double rho_norm = spectral::l2_norm(rho0);
  if (rho_norm == 0.0) throw std::invalid_argument("detecting_spectrum: zero datum");

  std::vector<linalg::SchurForm> forms;
  std::vector<EigenRef> refs;
  for (std::size_t b = 0; b < op.blocks().size(); ++b) {
    const auto& m = op.blocks()[b].matrix;
    forms.push_back(m.rows() == 1 ? linalg::SchurForm{Matrix::Identity(1, 1), m} : linalg::schur(m));
    for (Eigen::Index i = 0; i < forms.back().T.rows(); ++i) refs.push_back({forms.back().T(i, i), b, i});
  }
  for (const auto& r : refs) ds.eigenvalues.push_back(r.value);
  std::sort(ds.eigenvalues.begin(), ds.eigenvalues.end(), by_decay);

  // Single-linkage clusters: sweep in Re order, linking pairs within tol.
  std::vector<std::size_t> order(refs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return refs[a].value.real() < refs[b].value.real() ||
           (refs[a].value.real() == refs[b].value.real() && refs[a].value.imag() < refs[b].value.imag());
  });
  UnionFind uf(refs.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& a = refs[order[i]].value;
      const auto& b = refs[order[j]].value;
      if (b.real() - a.real() > ds.tol_cluster) break;
      if (std::abs(a - b) <= ds.tol_cluster) uf.unite(static_cast<int>(order[i]), static_cast<int>(order[j]));
    }
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < refs.size(); ++i) groups[uf.find(static_cast<int>(i))].push_back(i);
  std::vector<std::vector<std::size_t>> members;
  for (auto& [root, g] : groups) {
    Cluster c;
    cplx sum = 0.0;
    for (auto i : g) {
      c.eigenvalues.push_back(refs[i].value);
      sum += refs[i].value;
    }
    c.mean = sum / static_cast<double>(g.size());
    std::sort(c.eigenvalues.begin(), c.eigenvalues.end(), by_decay);
    ds.clusters.push_back(std::move(c));
    members.push_back(g);
  }
  std::vector<std::size_t> corder(ds.clusters.size());
  std::iota(corder.begin(), corder.end(), 0);
  std::sort(corder.begin(), corder.end(),
            [&](std::size_t a, std::size_t b) { return by_decay(ds.clusters[a].mean, ds.clusters[b].mean); });
  {
    std::vector<Cluster> c2;
    std::vector<std::vector<std::size_t>> m2;
    for (auto i : corder) {
      c2.push_back(std::move(ds.clusters[i]));
      m2.push_back(std::move(members[i]));
    }
    ds.clusters = std::move(c2);
    members = std::move(m2);
  }

  const Vector rho = op.to_vector(rho0);
  auto basis_for = [&](std::size_t ci, std::vector<Vector>& basis, std::vector<Matrix>& tblocks) {
    std::map<std::size_t, std::vector<Eigen::Index>> per_block;
    for (auto r : members[ci]) per_block[refs[r].block].push_back(refs[r].pos);
    for (auto& [b, positions] : per_block) {
      linalg::SchurForm sf = forms[b];
      std::vector<bool> sel(static_cast<std::size_t>(sf.T.rows()), false);
      for (auto p : positions) sel[static_cast<std::size_t>(p)] = true;
      const int d = linalg::reorder_schur(sf, sel);
      const auto& modes = op.blocks()[b].modes;
      for (int j = 0; j < d; ++j) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(op.dim()));
        for (std::size_t i = 0; i < modes.size(); ++i) v(modes[i]) = sf.Q(static_cast<Eigen::Index>(i), j);
        basis.push_back(std::move(v));
      }
      tblocks.push_back(sf.T.topLeftCorner(d, d));
    }
  };

  bool found = false;
  for (std::size_t ci = 0; ci < ds.clusters.size(); ++ci) {
    std::vector<Vector> basis;
    std::vector<Matrix> tblocks;
    basis_for(ci, basis, tblocks);
    Vector q(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) q(static_cast<Eigen::Index>(j)) = bilinear(op, rho, basis[j]);
    ds.clusters[ci].tested = true;
    ds.clusters[ci].Q = q.norm();
    if (q.norm() > ds.eps_detect * rho_norm) {
      found = true;
      ds.selected = ci;
      ds.basis = std::move(basis);
      ds.q0 = q;
      const auto d = static_cast<Eigen::Index>(ds.basis.size());
      ds.G = Matrix::Zero(d, d);
      Eigen::Index off = 0;
      for (const auto& t : tblocks) {
        ds.G.block(off, off, t.rows(), t.cols()) = t;
        off += t.rows();
      }
      break;
    }
  }
  if (!found)
    throw std::runtime_error("detecting_spectrum: no eigenvalue cluster pairs with the datum (cutoff too small?)");

  const auto& cl = ds.clusters[ds.selected];
  ds.lambda_nu = cl.mean;
  ds.gamma_nu = -cl.mean.real();
  ds.d_nu = static_cast<int>(ds.basis.size());
  ds.Q_nu = ds.q0.norm();
  double k0 = 0.0, k2 = 0.0;
  for (const auto& v : ds.basis) {
    for (std::size_t i = 0; i < op.modes().size(); ++i) {
      const double a = std::norm(v(static_cast<Eigen::Index>(i)));
      k0 += a;
      k2 += h2_weight(op.modes()[i].first, op.modes()[i].second) * a;
    }
  }
  ds.K0_nu = std::sqrt(k0);
  ds.K2_nu = std::sqrt(k2);
  ds.g_nu = linalg::norm2(ds.G);
  for (Eigen::Index j = 0; j < ds.d_nu; ++j) {
    Vector r = op.apply(ds.basis[static_cast<std::size_t>(j)]);
    for (Eigen::Index i = 0; i < ds.d_nu; ++i) r -= ds.basis[static_cast<std::size_t>(i)] * ds.G(i, j);
    ds.max_residual = std::max(ds.max_residual, r.norm());
  }
  return ds;
}

nlohmann::json DetectingSpectrum::to_json(std::size_t max_eigenvalues) const {
  auto cj = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
  nlohmann::json ev = nlohmann::json::array();
  for (std::size_t i = 0; i < std::min(max_eigenvalues, eigenvalues.size()); ++i) ev.push_back(cj(eigenvalues[i]));
  nlohmann::json tested = nlohmann::json::array();
  for (const auto& c : clusters)
    if (c.tested) tested.push_back({{"mean", cj(c.mean)}, {"size", c.eigenvalues.size()}, {"Q", c.Q}});
  nlohmann::json gm = nlohmann::json::array();
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < G.cols(); ++j) row.push_back(cj(G(i, j)));
    gm.push_back(row);
  }
  return {{"eigenvalue_count", eigenvalues.size()},
          {"eigenvalues", ev},
          {"tested_clusters", tested},
          {"lambda_nu", cj(lambda_nu)},
          {"gamma_nu", gamma_nu},
          {"d_nu", d_nu},
          {"G_nu", gm},
          {"Q_nu", Q_nu},
          {"K0_nu", K0_nu},
          {"K2_nu", K2_nu},
          {"g_nu", g_nu},
          {"max_residual", max_residual},
          {"tol_cluster", tol_cluster},
          {"eps_detect", eps_detect}};
}

std::vector<Vector> observable_series(const AveragedOperator& op, const std::vector<SpectralField2D>& fields,
                                      const std::vector<Vector>& basis) {
  std::vector<Vector> out;
  for (const auto& f : fields) {
    const Vector v = op.to_vector(f);
    Vector q(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t j = 0; j < basis.size(); ++j) q(static_cast<Eigen::Index>(j)) = bilinear(op, v, basis[j]);
    out.push_back(std::move(q));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Damping constant

DampingResult damping_constant(const Matrix& G, double gamma, double eta, int samples) {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("damping_constant: eta must lie in (0, 1]");
  if (G.rows() == 0 || G.rows() != G.cols()) throw std::invalid_argument("damping_constant: G must be square and nonempty");
  const Eigen::Index d = G.rows();
  const Matrix Gt = G.transpose();
  auto h = [&](double t) { return std::exp(-(gamma + eta) * t) * linalg::norm2(linalg::expm(-Gt * t)); };

  // Schur form of -G^T: spectral abscissa and nilpotent part.
  auto sf = linalg::schur(Gt);
  double alpha = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < d; ++i) alpha = std::max(alpha, -sf.T(i, i).real());
  Matrix N = sf.T;
  N.diagonal().setZero();
  const double nN = linalg::norm2(N);

  DampingResult r;
  r.eta_eff = eta - (alpha - gamma);
  if (!(r.eta_eff > 0.0)) throw std::invalid_argument("damping_constant: gamma exceeds the decay of exp(-G^T t)");
  r.T_sup = std::max(10.0 * static_cast<double>(d) / eta, static_cast<double>(d - 1) / r.eta_eff);

  std::vector<double> vals(static_cast<std::size_t>(samples) + 1);
  std::size_t best = 0;
  for (int i = 0; i <= samples; ++i) {
    vals[static_cast<std::size_t>(i)] = h(r.T_sup * i / samples);
    if (vals[static_cast<std::size_t>(i)] > vals[best]) best = static_cast<std::size_t>(i);
  }
  r.sampled_sup = vals[best];
  r.t_argmax = r.T_sup * static_cast<double>(best) / samples;
  if (best > 0) {
    // Golden-section refinement on the neighbouring sample interval.
    double a = r.T_sup * (static_cast<double>(best) - 1) / samples;
    double b = r.T_sup * std::min<double>(static_cast<double>(best) + 1, samples) / samples;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a), e = a + g * (b - a);
    double fc = h(c), fe = h(e);
    for (int it = 0; it < 80 && b - a > 1e-12 * std::max(1.0, b); ++it) {
      if (fc > fe) {
        b = e;
        e = c;
        fe = fc;
        c = b - g * (b - a);
        fc = h(c);
      } else {
        a = c;
        c = e;
        fc = fe;
        e = a + g * (b - a);
        fe = h(e);
      }
    }
    const double tm = fc > fe ? c : e;
    const double fm = std::max(fc, fe);
    if (fm > r.sampled_sup) {
      r.sampled_sup = fm;
      r.t_argmax = tm;
    }
  }
  // For t >= T_sup >= (d-1)/eta', each e^{-eta' t} t^k with k < d is decreasing.
  double term = 1.0, sum = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    sum += term;
    term *= nN * r.T_sup / static_cast<double>(k + 1);
  }
  r.tail_bound = std::exp(-r.eta_eff * r.T_sup) * sum;
  r.D = std::max(r.sampled_sup, r.tail_bound);

  // Scaled Schur similarity S = U diag(s^0, ..., s^{d-1}) makes the nilpotent part a contraction.
  const double nF = N.norm();
  const double s = nF > 1.0 ? 1.0 / nF : 1.0;
  Matrix Ns = N;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) Ns(i, j) *= std::pow(s, static_cast<double>(j - i));
  r.cond_S = std::pow(s, -static_cast<double>(d - 1));
  r.nilpotency = static_cast<int>(d);
  Matrix P = Matrix::Identity(d, d);
  for (int k = 1; k <= d; ++k) {
    P = P * Ns;
    if (linalg::norm2(P) <= 1e-12) {
      r.nilpotency = k;
      break;
    }
  }
  double bsum = 0.0;
  for (int k = 0; k < r.nilpotency; ++k) bsum += std::pow(r.eta_eff, -k);
  r.similarity_bound = r.cond_S * bsum;
  return r;
}

// ---------------------------------------------------------------------------
// Sylvester constant

namespace {

// Norms of R, W2 R and W1 R W1 for one block at z, with R = Q (z - T)^{-1} Q^H.
void block_resolvent_norms(const linalg::SchurForm& sf, const std::vector<double>& w1, cplx z, double& n0,
                           double& n2, double& n1) {
  const Eigen::Index m = sf.T.rows();
  if (m == 1) {
    const double r = 1.0 / std::abs(z - sf.T(0, 0));
    n0 = r;
    n2 = w1[0] * w1[0] * r;
    n1 = w1[0] * w1[0] * r;
    return;
  }
  const Matrix zt = Matrix::Identity(m, m) * z - sf.T;
  if (m <= 256) {
    const Matrix X = zt.triangularView<Eigen::Upper>().solve(Matrix::Identity(m, m));
    const Matrix R = sf.Q * X * sf.Q.adjoint();
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(w1.data(), m);
    const Eigen::VectorXd w2 = w.array().square();
    n0 = linalg::norm2(R);
    n2 = linalg::norm2(w2.asDiagonal() * R);
    n1 = linalg::norm2(w.asDiagonal() * R * w.asDiagonal());
    return;
  }
  auto solve = [&](const Vector& x) -> Vector {
    return sf.Q * zt.triangularView<Eigen::Upper>().solve(sf.Q.adjoint() * x);
  };
  auto solve_adj = [&](const Vector& x) -> Vector {
    return sf.Q * zt.adjoint().triangularView<Eigen::Lower>().solve(sf.Q.adjoint() * x);
  };
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(w1.data(), m);
  const Eigen::VectorXd w2 = w.array().square();
  const int mi = static_cast<int>(m);
  n0 = linalg::norm2_power(mi, solve, solve_adj);
  n2 = linalg::norm2_power(
      mi, [&](const Vector& x) -> Vector { return w2.asDiagonal() * solve(x); },
      [&](const Vector& x) -> Vector { return solve_adj(w2.asDiagonal() * x); });
  n1 = linalg::norm2_power(
      mi, [&](const Vector& x) -> Vector { return w.asDiagonal() * solve(w.asDiagonal() * x); },
      [&](const Vector& x) -> Vector { return w.asDiagonal() * solve_adj(w.asDiagonal() * x); });
}

}  // namespace

double resolvent_norm(const AveragedOperator& op, cplx z) {
  double best = 0.0;
  for (const auto& b : op.blocks()) {
    const auto m = b.matrix.rows();
    const Matrix zb = Matrix::Identity(m, m) * z - b.matrix;
    best = std::max(best, linalg::norm2(zb.partialPivLu().inverse()));
  }
  return best;
}

SylvesterResult sylvester_constant(const AveragedOperator& op, const DetectingSpectrum& spec, int nodes) {
  if (nodes < 4) throw std::invalid_argument("sylvester_constant: need at least 4 contour nodes");
  const auto& cl = spec.clusters.at(spec.selected);
  SylvesterResult r;
  r.nodes = nodes;
  r.gap = std::numeric_limits<double>::infinity();
  // Distance from lambda_nu to eigenvalues outside the cluster (multiset difference).
  std::vector<cplx> inside = cl.eigenvalues;
  for (const auto& e : spec.eigenvalues) {
    auto it = std::find(inside.begin(), inside.end(), e);
    if (it != inside.end()) {
      inside.erase(it);
      continue;
    }
    r.gap = std::min(r.gap, std::abs(e - spec.lambda_nu));
  }
  if (!std::isfinite(r.gap)) r.gap = 1.0;
  if (!(r.gap > spec.tol_cluster))
    throw std::runtime_error("sylvester_constant: detecting cluster is not isolated (gap below tolerance)");
  r.radius = 0.5 * r.gap;

  std::vector<linalg::SchurForm> forms;
  std::vector<std::vector<double>> weights;
  for (const auto& b : op.blocks()) {
    forms.push_back(b.matrix.rows() == 1 ? linalg::SchurForm{Matrix::Identity(1, 1), b.matrix}
                                         : linalg::schur(b.matrix));
    std::vector<double> w;
    for (int m : b.modes) {
      const auto [k, l] = op.modes()[static_cast<std::size_t>(m)];
      w.push_back(std::sqrt(1.0 + double(k) * k + double(l) * l));
    }
    weights.push_back(std::move(w));
  }
  const auto d = spec.G.rows();
  for (int j = 0; j < nodes; ++j) {
    const cplx z = spec.lambda_nu + std::polar(r.radius, 2.0 * pi * j / nodes);
    for (std::size_t b = 0; b < forms.size(); ++b) {
      double n0, n2, n1;
      block_resolvent_norms(forms[b], weights[b], z, n0, n2, n1);
      r.max_R0 = std::max(r.max_R0, n0);
      r.max_R2 = std::max(r.max_R2, n2);
      r.max_R1 = std::max(r.max_R1, n1);
    }
    const Matrix zg = Matrix::Identity(d, d) * z - spec.G;
    r.max_G = std::max(r.max_G, linalg::norm2(zg.partialPivLu().inverse()));
  }
  r.C_S = std::max(1.0, r.radius * (std::max(r.max_R2, r.max_R1) * r.max_G + r.max_R0));
  return r;
}

nlohmann::json SylvesterResult::to_json() const {
  return {{"gap", gap},       {"radius", radius}, {"nodes", nodes}, {"max_R0", max_R0},    {"max_R2", max_R2},
          {"max_R1", max_R1}, {"max_G", max_G},   {"C_S", C_S},     {"rigorous", rigorous},
          {"note", "estimated at truncation, not rigorous"}};
}

// ---------------------------------------------------------------------------
// Certificate

double multiplier_constant(double L) {
  if (!(L > 0.0)) throw std::invalid_argument("multiplier_constant: period must be positive");
  const double a = std::max({L / (2.0 * pi), 1.0, std::sqrt(L / (4.0 * pi))});
  return a * std::sqrt(2.0 * std::max(1.0 / L, L));
}

FastCertificate assemble_fast(const FastInputs& in) {
  if (!(in.eta > 0.0 && in.eta <= 1.0)) throw std::invalid_argument("fast certificate: eta must lie in (0, 1]");
  if (!(in.Q_nu > 0.0)) throw std::invalid_argument("fast certificate: Q_nu must be positive");
  FastCertificate c;
  c.in = in;
  c.lambda1 = kLambda1;
  c.K_nu = 1e6 * in.C_R * in.C_R * in.C_S * in.C_S * in.M * in.M * in.S_nu * in.S_nu;
  c.A0_terms[0] = 4.0 * c.K_nu;
  c.A0_terms[1] = in.nu;
  c.A0_terms[2] = in.nu > 0.0 ? 64.0 * c.K_nu * c.K_nu / in.nu : std::numeric_limits<double>::infinity();
  c.A0_terms[3] = 1000.0 * in.C_S * c.K_nu;
  c.A0_terms[4] = 2.0 * c.K_nu * in.rho0_norm / in.Q_nu;
  c.A0_terms[5] = in.D * c.K_nu / in.eta;
  c.A0 = *std::max_element(std::begin(c.A0_terms), std::end(c.A0_terms));
  c.c_A = in.gamma_nu + 2.0 * in.eta;
  c.C = in.Q_nu / (2.0 * in.D * (in.K0_nu + 1.0));
  return c;
}

double FastCertificate::sharper_exponent(double A) const {
  if (!(A > 0.0)) return std::numeric_limits<double>::infinity();
  return in.gamma_nu + in.eta + in.D * K_nu / A;
}

nlohmann::json FastCertificate::to_json() const {
  return {{"kind", "fast"},
          {"eta", in.eta},
          {"nu", in.nu},
          {"D_eta", in.D},
          {"C_S", in.C_S},
          {"C_S_rigorous", false},
          {"C_R", in.C_R},
          {"M", in.M},
          {"S_nu", in.S_nu},
          {"gamma_nu", in.gamma_nu},
          {"Q_nu", in.Q_nu},
          {"K0_nu", in.K0_nu},
          {"rho0_norm", in.rho0_norm},
          {"lambda1", lambda1},
          {"K_nu", K_nu},
          {"A0_terms",
           {{"4K", A0_terms[0]},
            {"nu", A0_terms[1]},
            {"64K^2/nu", A0_terms[2]},
            {"1000 C_S K", A0_terms[3]},
            {"2K|rho0|/Q", A0_terms[4]},
            {"D K/eta", A0_terms[5]}}},
          {"A0", A0},
          {"c_A", c_A},
          {"C", C},
          {"basis", basis}};
}

double small_viscosity_eta(double nu) { return nu * kLambda1 <= 1.0 ? nu * kLambda1 : 1.0; }

FastCertificate fast_certificate(const flows::FlowSpec& flow, const SpectralField2D& rho0, double nu, double eta,
                                 const FastEstimates& est) {
  FastInputs in;
  in.D = est.damping.D;
  in.C_S = est.sylvester.C_S;
  in.C_R = multiplier_constant(flow.period());
  in.M = 1.0 + flow.lip();
  in.S_nu = 1.0 + est.spectrum.K2_nu + est.spectrum.g_nu;
  in.nu = nu;
  in.eta = eta;
  in.gamma_nu = est.spectrum.gamma_nu;
  in.Q_nu = est.spectrum.Q_nu;
  in.K0_nu = est.spectrum.K0_nu;
  in.rho0_norm = spectral::l2_norm(rho0);
  FastCertificate c = assemble_fast(in);
  c.basis = "spectral truncation; C_S estimated on a contour (not rigorous)";
  return c;
}

FastEstimates estimate_fast(const flows::FlowSpec& flow, const SpectralField2D& rho0, double nu, double eta,
                            int cutoff) {
  const AveragedOperator op = averaged_operator(flow, nu, cutoff);
  FastEstimates e;
  e.spectrum = detecting_spectrum(op, rho0);
  e.damping = damping_constant(e.spectrum.G, e.spectrum.gamma_nu, eta);
  e.sylvester = sylvester_constant(op, e.spectrum);
  return e;
}

BoundReport check_fast_bound(const Trajectory2D& traj, const FastCertificate& cert, double tol) {
  double c;
  std::string regime;
  if (traj.A > cert.A0) {
    c = cert.c_A;
    regime = "above_threshold";
  } else {
    c = cert.sharper_exponent(traj.A);
    regime = "sharper_exponent";
  }
  std::vector<BoundSample> samples;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const double r = spectral::l2_norm(traj.fields[i]);
    const double logm = std::log(r / cert.C) + c * t;
    samples.push_back({t, r, cert.C * std::exp(-c * t), std::exp(std::min(logm, 709.0))});
  }
  nlohmann::json snap = cert.to_json();
  snap["A"] = traj.A;
  snap["exponent_used"] = c;
  snap["regime"] = regime;
  return make_report("fast_l2", snap, std::move(samples), tol);
}

}  // namespace mixlab::averaging
