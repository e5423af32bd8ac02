#include <doctest.h>

#include <cmath>

#include "mixlab/averaging.hpp"
#include "mixlab/shear_diffusion.hpp"
#include "support.hpp"

using namespace mixlab;
using namespace mixlab::averaging;
using flows::FlowSpec;
using flows::TimeMode;
using flows::Trig;
using flows::WaveTerm;
using spectral::Lattice;
using spectral::SpectralField2D;

namespace {

FlowSpec steady_flow(std::vector<WaveTerm> terms) { return FlowSpec(std::move(terms), 1.0); }

FlowSpec random_steady_flow(testing::Gen& gen, int band) {
  std::vector<WaveTerm> terms;
  const int n = gen.integer(1, 3);
  for (int i = 0; i < n; ++i) {
    int kx = gen.integer(-band, band), ky = gen.integer(-band, band);
    if (kx == 0 && ky == 0) ky = 1;
    terms.push_back({gen.uniform(-1, 1), kx, ky, gen.integer(0, 1) ? Trig::cos : Trig::sin});
  }
  return steady_flow(terms);
}

// nu Lap f + ubar . grad f by direct convolution, truncated to the square cutoff.
Vector apply_oracle(const AveragedOperator& op, const flows::SteadyVelocity& u, const Vector& v) {
  const auto f = op.to_field(v);
  const int c = op.cutoff();
  SpectralField2D out(Lattice(c, c));
  const auto& ul = u.ux.lattice();
  for (int k = -c; k <= c; ++k)
    for (int l = -c; l <= c; ++l) {
      if (k == 0 && l == 0) continue;
      cplx s = -op.nu() * double(k * k + l * l) * f(k, l);
      for (int a = -ul.kmax; a <= ul.kmax; ++a)
        for (int b = -ul.lmax; b <= ul.lmax; ++b) {
          const int p = k - a, q = l - b;
          if (std::abs(p) > c || std::abs(q) > c) continue;
          s += (u.ux(a, b) * cplx(0, p) + u.uy(a, b) * cplx(0, q)) * f(p, q);
        }
      out(k, l) = s;
    }
  return op.to_vector(out);
}

double field_err(const SpectralField2D& a, const SpectralField2D& b) { return spectral::l2_norm(a - b); }

// sup_t e^{-eta t} (t / 2 + sqrt(1 + t^2 / 4)) for the 2 x 2 Jordan block, by fine scan.
double jordan_sup(double eta) {
  double best = 0.0;
  for (int i = 0; i <= 400000; ++i) {
    const double t = i * 1e-4;
    best = std::max(best, std::exp(-eta * t) * (0.5 * t + std::sqrt(1.0 + 0.25 * t * t)));
  }
  return best;
}

}  // namespace

TEST_CASE("zero drift gives the diagonal Laplacian") {
  const auto op = averaged_operator(flows::flow_preset("zero"), 0.3, 4);
  CHECK(op.dim() == 80);
  CHECK(op.blocks().size() == 80);
  CHECK(op.index_of(0, 0) == -1);
  const Matrix m = op.dense();
  for (std::size_t i = 0; i < op.dim(); ++i) {
    const auto [k, l] = op.modes()[i];
    CHECK(op.index_of(k, l) == static_cast<int>(i));
    CHECK(m(i, i) == cplx(-0.3 * (k * k + l * l)));
  }
  CHECK((m - Matrix(m.diagonal().asDiagonal())).norm() == 0.0);
  const auto ev = operator_eigenvalues(op);
  CHECK(ev.front() == cplx(-0.3));
}

TEST_CASE("sin y drift keeps the k = 0 modes decoupled") {
  const auto op = averaged_operator(flows::flow_preset("couette"), 0.1, 6);
  for (int l = -6; l <= 6; ++l) {
    if (l == 0) continue;
    const int i = op.index_of(0, l);
    CHECK(op.blocks()[op.block_of(i)].modes.size() == 1);
  }
  CHECK(op.blocks()[op.block_of(op.index_of(1, 0))].modes.size() == 13);
  CHECK_FALSE(op.band_warning());
  CHECK(averaged_operator(flows::flow_preset("couette"), 0.1, 1).band_warning());
}

TEST_CASE("property: operator action matches direct convolution") {
  testing::Gen gen(404);
  for (int trial = 0; trial < 12; ++trial) {
    const auto flow = random_steady_flow(gen, 2);
    const double nu = gen.log_uniform(0.01, 1.0);
    const int c = gen.integer(4, 7);
    const auto op = averaged_operator(flow, nu, c);
    const auto u = flows::time_average(flow);
    const Vector v = op.to_vector(gen.field(Lattice(c, c), false));
    const Vector ref = apply_oracle(op, u, v);
    CHECK((op.apply(v) - ref).norm() <= 1e-10 * std::max(1.0, ref.norm()));
    CHECK((op.dense() * v - ref).norm() <= 1e-10 * std::max(1.0, ref.norm()));
  }
}

TEST_CASE("property: the drift part is skew-Hermitian") {
  testing::Gen gen(12);
  for (int trial = 0; trial < 10; ++trial) {
    const double nu = gen.uniform(0.1, 1.0);
    const auto op = averaged_operator(random_steady_flow(gen, 2), nu, 5);
    const Matrix m = op.dense();
    Matrix lap = Matrix::Zero(op.dim(), op.dim());
    for (std::size_t i = 0; i < op.dim(); ++i) {
      const auto [k, l] = op.modes()[i];
      lap(i, i) = -nu * (k * k + l * l);
    }
    const Matrix d = m - lap;
    CHECK((d + d.adjoint()).norm() <= 1e-12 * std::max(1.0, d.norm()));
    for (const auto& e : operator_eigenvalues(op)) CHECK(e.real() <= -nu + 1e-10);
  }
}

TEST_CASE("detecting spectrum without drift") {
  const auto op = averaged_operator(flows::flow_preset("zero"), 0.5, 4);
  SpectralField2D f(Lattice(2, 2));
  f.add_cos(1.0, 1, 0);
  f.add_sin(0.5, 0, 2);
  const auto ds = detecting_spectrum(op, f);
  CHECK(ds.lambda_nu == cplx(-0.5));
  CHECK(ds.gamma_nu == 0.5);
  CHECK(ds.d_nu == 4);
  CHECK(ds.max_residual == 0.0);
  CHECK(ds.Q_nu == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));

  SpectralField2D g(Lattice(2, 2));
  g.add_sin(1.0, 0, 2);
  const auto dg = detecting_spectrum(op, g);
  CHECK(dg.lambda_nu == cplx(-2.0));
  CHECK(dg.gamma_nu == 2.0);
  CHECK(dg.clusters[0].tested);
  CHECK(dg.clusters[0].Q == 0.0);
  CHECK(dg.selected == 2);
  CHECK(dg.clusters[1].Q == 0.0);
  CHECK_THROWS_AS(detecting_spectrum(op, SpectralField2D(Lattice(1, 1))), std::invalid_argument);
}

TEST_CASE("detecting spectrum with sin y drift") {
  const auto op = averaged_operator(flows::flow_preset("couette"), 0.1, 12);
  SpectralField2D f(Lattice(1, 1));
  f.add_cos(1.0, 0, 1);
  const auto ds = detecting_spectrum(op, f);
  CHECK(std::abs(ds.lambda_nu - cplx(-0.1)) <= 1e-12);
  CHECK(ds.max_residual <= 1e-8);

  SpectralField2D g(Lattice(1, 1));
  g.add_cos(1.0, 1, 0);
  const auto dx = detecting_spectrum(op, g);
  CHECK(dx.max_residual <= 1e-8);
  CHECK(dx.gamma_nu > 0.1);
  CHECK(dx.Q_nu > 0.0);
  // B* Phi = Phi G, recomputed here
  const auto d = dx.G.rows();
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector rhs = Vector::Zero(op.dim());
    for (Eigen::Index i = 0; i < d; ++i) rhs += dx.basis[i] * dx.G(i, j);
    CHECK((op.apply(dx.basis[j]) - rhs).norm() <= 1e-8);
  }
}

TEST_CASE("damping constant") {
  Matrix one(1, 1);
  one(0, 0) = cplx(-0.4, 0.7);
  const auto d1 = damping_constant(one, 0.4, 0.4);
  CHECK(d1.D == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d1.similarity_bound == 1.0);
  CHECK(d1.nilpotency == 1);

  for (double eta : {0.1, 0.25, 0.5, 1.0}) {
    Matrix j = Matrix::Zero(2, 2);
    j(0, 0) = j(1, 1) = -0.3;
    j(0, 1) = 1.0;
    const auto r = damping_constant(j, 0.3, eta);
    CHECK(r.D == doctest::Approx(jordan_sup(eta)).epsilon(1e-7));
    CHECK(r.nilpotency == 2);
    CHECK(r.D <= r.similarity_bound * (1 + 1e-12));
  }
  Matrix bad(1, 1);
  bad(0, 0) = -0.1;
  CHECK_THROWS_AS(damping_constant(bad, 0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(damping_constant(bad, 0.1, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(damping_constant(20.0 * bad, 0.1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(damping_constant(Matrix(0, 0), 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("property: damping constant bounded by the similarity bound") {
  testing::Gen gen(77);
  for (int trial = 0; trial < 15; ++trial) {
    const int d = gen.integer(1, 4);
    Matrix g = Matrix::Zero(d, d);
    const double gamma = gen.uniform(0.05, 1.0);
    for (int i = 0; i < d; ++i) {
      g(i, i) = cplx(-gamma - gen.uniform(0, 1e-3), gen.uniform(-1, 1));
      for (int k = i + 1; k < d; ++k) g(i, k) = gen.uniform(-1, 1) * gen.complex();
    }
    const double eta = gen.uniform(0.05, 1.0);
    const auto r = damping_constant(g, gamma, eta);
    CHECK(r.D >= 1.0 - 1e-12);
    CHECK(r.D <= r.similarity_bound * (1 + 1e-9));
    // no sample on a coarse independent grid exceeds D
    for (int i = 0; i <= 200; ++i) {
      const double t = r.T_sup * i / 200.0 * 1.5;
      const double h = std::exp(-(gamma + eta) * t) * linalg::norm2(linalg::expm(-g.transpose() * t));
      CHECK(h <= r.D * (1 + 1e-9));
    }
  }
}

TEST_CASE("Sylvester constant on a diagonal operator") {
  const double nu = 0.5;
  const auto op = averaged_operator(flows::flow_preset("zero"), nu, 3);
  SpectralField2D f(Lattice(1, 1));
  f.add_cos(1.0, 1, 0);
  const auto ds = detecting_spectrum(op, f);
  const auto s = sylvester_constant(op, ds, 32);
  CHECK(s.gap == doctest::Approx(nu));
  CHECK(s.radius == doctest::Approx(nu / 2));
  double R0 = 0, R2 = 0;
  for (int j = 0; j < 32; ++j) {
    const cplx z = -nu + std::polar(s.radius, 2 * M_PI * j / 32);
    for (const auto& [k, l] : op.modes()) {
      const double w2 = 1.0 + k * k + l * l;
      const double dist = std::abs(z + nu * (k * k + l * l));
      R0 = std::max(R0, 1 / dist);
      R2 = std::max(R2, w2 / dist);
    }
  }
  CHECK(s.max_R0 == doctest::Approx(R0).epsilon(1e-12));
  CHECK(s.max_R2 == doctest::Approx(R2).epsilon(1e-12));
  CHECK(s.max_R1 == doctest::Approx(R2).epsilon(1e-12));
  CHECK(s.max_G == doctest::Approx(1 / s.radius).epsilon(1e-12));
  CHECK(s.C_S == doctest::Approx(std::max(1.0, s.radius * (R2 / s.radius + R0))).epsilon(1e-12));
  CHECK(s.C_S == doctest::Approx(13.0).epsilon(1e-12));
  CHECK(resolvent_norm(op, cplx(-0.25)) == doctest::Approx(4.0));
  CHECK(s.to_json().at("rigorous") == false);

  auto tight = ds;
  tight.tol_cluster = 1.0;
  CHECK_THROWS_AS(sylvester_constant(op, tight), std::runtime_error);
  CHECK_THROWS_AS(sylvester_constant(op, ds, 2), std::invalid_argument);
}

TEST_CASE("fast certificate arithmetic") {
  CHECK(multiplier_constant(1.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(multiplier_constant(4 * M_PI) == doctest::Approx(2.0 * std::sqrt(8 * M_PI)).epsilon(1e-15));
  CHECK(small_viscosity_eta(0.5) == 0.5);
  CHECK(small_viscosity_eta(2.0) == 1.0);

  FastInputs in;
  in.S_nu = 3.0;
  in.nu = 0.5;
  in.eta = 0.5;
  in.gamma_nu = 0.2;
  in.Q_nu = 0.8;
  in.K0_nu = 1.0;
  in.D = 2.0;
  const auto c = assemble_fast(in);
  CHECK(c.K_nu == doctest::Approx(9e6).epsilon(1e-15));
  const double K = 9e6;
  const double terms[6] = {4 * K, 0.5, 64 * K * K / 0.5, 1000 * K, 2 * K / 0.8, 2 * K / 0.5};
  for (int i = 0; i < 6; ++i) CHECK(c.A0_terms[i] == doctest::Approx(terms[i]).epsilon(1e-14));
  CHECK(c.A0 == doctest::Approx(64 * K * K / 0.5).epsilon(1e-14));
  CHECK(c.A0 >= 3.6e7);
  CHECK(c.c_A == doctest::Approx(1.2));
  CHECK(c.C == doctest::Approx(0.8 / 8.0));
  CHECK(c.sharper_exponent(K) == doctest::Approx(0.2 + 0.5 + 2.0));
  const auto j = c.to_json();
  CHECK(j.at("A0_terms").size() == 6);
  CHECK(j.at("C_S_rigorous") == false);
  in.eta = 0.0;
  CHECK_THROWS_AS(assemble_fast(in), std::invalid_argument);
}

TEST_CASE("evolve_2d without flow is the heat semigroup") {
  testing::Gen gen(1);
  const auto f = gen.field(Lattice(4, 5));
  const double nu = 0.2;
  const auto tr = evolve_2d(f, flows::flow_preset("zero"), 0.0, nu, {0.0, 0.5, 1.5});
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    SpectralField2D ref(f.lattice());
    for (int k = -4; k <= 4; ++k)
      for (int l = -5; l <= 5; ++l) ref(k, l) = f(k, l) * std::exp(-nu * (k * k + l * l) * tr.times[i]);
    CHECK(field_err(tr.fields[i], ref) <= 1e-13);
  }
  CHECK_THROWS_AS(evolve_2d(f, flows::flow_preset("zero"), -1.0, nu, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(evolve_2d(f, flows::flow_preset("zero"), 0.0, -1.0, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(evolve_2d(f, flows::flow_preset("zero"), 0.0, nu, {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("evolve_2d with a steady shear agrees with the shear solver") {
  SpectralField2D f(Lattice(2, 24));
  f.add_cos(1.0, 1, 0);
  f.add_sin(0.3, 2, 1);
  const double nu = 0.1;
  const auto a = evolve_2d(f, flows::flow_preset("couette"), 7.0, nu, {0.0, 1.0}, {.dt = 2e-3});
  const auto b = shear::evolve_shear(f, flows::shear_preset("couette"), nu, {0.0, 1.0}, {.dt = 2e-3});
  CHECK(field_err(a.fields[1], b.fields[1].resized(f.lattice())) <= 1e-8);
}

TEST_CASE("fast oscillation: error against the averaged dynamics halves with A") {
  // psi = sin x sin y sin(2 pi theta) has zero phase average, so the averaged dynamics are heat.
  const FlowSpec flow({WaveTerm{0.5, 1, -1, Trig::cos, TimeMode::sin}, WaveTerm{-0.5, 1, 1, Trig::cos, TimeMode::sin}},
                      1.0);
  SpectralField2D f(Lattice(8, 8));
  f.add_cos(1.0, 1, 0);
  f.add_sin(0.5, 0, 2);
  const double nu = 0.5;
  const auto heat = evolve_2d(f, flows::flow_preset("zero"), 0.0, nu, {1.0});
  double err[2];
  int i = 0;
  for (double A : {50.0, 100.0}) {
    const auto tr = evolve_2d(f, flow, A, nu, {1.0});
    err[i++] = field_err(tr.fields[0], heat.fields[0]);
  }
  CHECK(err[0] / err[1] > 1.5);
  CHECK(err[0] / err[1] < 2.5);
}

TEST_CASE("observables of the detecting subspace follow exp(G^T t)") {
  const double nu = 0.1;
  SpectralField2D f(Lattice(1, 24));
  f.add_cos(1.0, 1, 0);
  const auto op = averaged_operator(flows::flow_preset("couette"), nu, 24);
  const auto ds = detecting_spectrum(op, f);
  const std::vector<double> ts{0.0, 0.5, 1.0, 2.0};
  const auto tr = shear::evolve_shear(f, flows::shear_preset("couette"), nu, ts, {.dt = 1e-3});
  const auto q = observable_series(op, tr.fields, ds.basis);
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vector pred = linalg::expm(ds.G.transpose() * ts[i]) * q[0];
    CHECK((q[i] - pred).norm() <= 1e-6 * q[0].norm());
  }
  CHECK(std::abs(q[0].norm() - ds.q0.norm()) <= 1e-12);
}

TEST_CASE("fast bound check regimes") {
  FastInputs in;
  in.nu = 0.5;
  in.eta = 0.5;
  in.gamma_nu = 0.5;
  in.Q_nu = 1.0;
  in.rho0_norm = 1.0;
  const auto cert = assemble_fast(in);
  Trajectory2D tr;
  tr.A = 10.0;
  SpectralField2D f(Lattice(1, 1));
  f.add_cos(1.0, 1, 0);
  for (double t : {0.0, 1.0}) {
    tr.times.push_back(t);
    SpectralField2D g = f;
    g *= std::exp(-0.5 * t);
    tr.fields.push_back(g);
  }
  auto rep = check_fast_bound(tr, cert);
  CHECK(rep.certificate.at("regime") == "sharper_exponent");
  CHECK(rep.certificate.at("exponent_used") == doctest::Approx(cert.sharper_exponent(10.0)));
  CHECK(rep.pass);
  tr.A = 2 * cert.A0;
  rep = check_fast_bound(tr, cert);
  CHECK(rep.certificate.at("regime") == "above_threshold");
  CHECK(rep.certificate.at("exponent_used") == doctest::Approx(1.5));
  const double m1 = std::exp(-0.5) * std::sqrt(0.5) / (cert.C * std::exp(-1.5));
  CHECK(rep.samples[1].margin == doctest::Approx(m1).epsilon(1e-12));
}
