#include <doctest.h>

#include <cmath>

#include "mixlab/inviscid.hpp"
#include "support.hpp"

using namespace mixlab;
using namespace mixlab::inviscid;
using flows::Trig;
using flows::WaveTerm;
using spectral::Lattice;
using spectral::SpectralField2D;
using testing::cplx;

namespace {

flows::ShearSpec sin_y() { return flows::ShearSpec({WaveTerm{1.0, 0, 1, Trig::sin}}); }

SpectralField2D cos_x(int lmax) {
  SpectralField2D f(Lattice(1, lmax));
  f.add_cos(1.0, 1, 0);
  return f;
}

flows::ShearSpec random_shear(testing::Gen& gen) {
  std::vector<WaveTerm> t;
  for (int i = 0, n = gen.integer(1, 3); i < n; ++i)
    t.push_back(WaveTerm{gen.uniform(-1, 1), 0, gen.integer(1, 3), gen.integer(0, 1) ? Trig::cos : Trig::sin,
                         static_cast<flows::TimeMode>(gen.integer(0, 2)), 1});
  return flows::ShearSpec(t, 2.0);
}

}  // namespace

TEST_CASE("t = 0 returns the datum") {
  testing::Gen gen(1);
  const auto f = gen.field(Lattice(3, 5));
  CHECK(spectral::l2_norm(evolve_inviscid(f, sin_y(), 0.0) - f) == 0.0);
  CHECK_THROWS_AS(evolve_inviscid(f, sin_y(), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(evolve_inviscid(f, flows::ShearSpec({WaveTerm{1.0, 0, 0}}), 1.0), std::invalid_argument);
}

TEST_CASE("Bessel expansion of the sheared cosine") {
  // theta_t + sin(y) theta_x = 0 from cos x: F_1 = exp(-i t sin y) / 2 = sum_m J_{-m}(t) e^{imy} / 2
  for (double t : {0.5, 2.0, 5.0, 9.0}) {
    const auto th = evolve_inviscid(cos_x(32), sin_y(), t);
    for (int m = -32; m <= 32; ++m) {
      // J_{-m} = (-1)^m J_m for m > 0
      const double ref = 0.5 * (m > 0 && m % 2 == 1 ? -1.0 : 1.0) * std::cyl_bessel_j(std::abs(m), t);
      CHECK(std::abs(th(1, m) - ref) < 1e-12);
      CHECK(std::abs(th(-1, m) - std::conj(th(1, -m))) < 1e-14);
    }
  }
}

TEST_CASE("x-independent data are stationary") {
  SpectralField2D f(Lattice(2, 4));
  f.add_cos(1.0, 0, 3);
  f.add_sin(0.4, 0, 1);
  CHECK(spectral::l2_norm(evolve_inviscid(f, sin_y(), 17.0) - f) == 0.0);
}

TEST_CASE("certificate for cos x under sin y") {
  const auto c = inviscid_certificate(cos_x(4), sin_y());
  CHECK_FALSE(c.stationary);
  CHECK(c.k == 1);
  // F_1^0 = 1/2 constant: S = 1/4, A = 0, B = 1.01 * (2/pi) * (1/2)
  const double S = 0.25, B = 1.01 * (2.0 / M_PI) * 0.5;
  const double D = 1.0 + 8.0 * B * B / S;
  CHECK(c.S == doctest::Approx(S).epsilon(1e-14));
  CHECK(c.A == doctest::Approx(0.0));
  CHECK(c.B == doctest::Approx(B).epsilon(1e-12));
  CHECK(c.D == doctest::Approx(D).epsilon(1e-12));
  CHECK(c.c_star == doctest::Approx(std::sqrt(S / (2.0 * (1.0 + 2.0 * D * D)))).epsilon(1e-12));
  CHECK(c.tail_cutoff(0.0) == 1);
  CHECK(c.tail_cutoff(10.0) == static_cast<long long>(std::ceil(4.0 * std::pow(10.0 * B, 2) / S)));
}

TEST_CASE("stationary certificate") {
  SpectralField2D f(Lattice(1, 2));
  f.add_cos(1.0, 0, 1);
  const auto c = inviscid_certificate(f, sin_y());
  CHECK(c.stationary);
  CHECK(c.c_star == doctest::Approx(1.0 / std::sqrt(2.0)));
  const auto rep = check_inviscid_bound(f, sin_y(), c, {0.0, 1.0, 3.0});
  CHECK(rep.pass);
  CHECK(rep.samples[2].margin == doctest::Approx(10.0));
  CHECK_THROWS_AS(inviscid_certificate(SpectralField2D(Lattice(1, 1)), sin_y()), std::invalid_argument);
}

TEST_CASE("mode choice maximizes c_star") {
  SpectralField2D f(Lattice(3, 3));
  f.add_cos(0.2, 1, 0);
  f.add_cos(1.0, 2, 0);
  const auto c = inviscid_certificate(f, sin_y());
  double best = 0.0;
  for (int k : {1, 2}) {
    const double S = std::norm(f(k, 0));
    const double B = 1.01 * k * (2.0 / M_PI) * std::abs(f(k, 0));
    const double D = 1.0 + 8.0 * B * B / S;
    best = std::max(best, std::sqrt(S / (2.0 * (k * k + 2.0 * D * D))));
  }
  CHECK(c.c_star == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("property: unitarity, mass conservation, W11 growth and the certified bound") {
  testing::Gen gen(77);
  for (int trial = 0; trial < 12; ++trial) {
    const auto sh = random_shear(gen);
    const auto th0 = gen.field(Lattice(2, 3));
    const auto cert = inviscid_certificate(th0, sh);
    const double t = gen.uniform(0.1, 4.0);
    const Lattice big(2, 96);
    const auto th = evolve_inviscid(th0, sh, t, big);
    for (int k = 1; k <= 2; ++k) {
      const auto p0 = spectral::x_mode(th0, k), p = spectral::x_mode(th, k);
      CHECK(std::abs(p.energy() - p0.energy()) <= 1e-10 * p0.energy());
      const int ny = 512;
      const auto s0 = spectral::sample_profile(p0.coeffs(), p0.lmax(), ny);
      const auto s1 = spectral::sample_profile(p.coeffs(), p.lmax(), ny);
      for (int j = 0; j < ny; ++j) CHECK(std::abs(std::abs(s1[j]) - std::abs(s0[j])) < 1e-10);
      if (k == cert.k) CHECK(profile_dy_l1(p, 4096) <= cert.V(t) * (1 + 1e-6));
    }
    std::vector<double> times;
    for (int i = 0; i < 20; ++i) times.push_back(gen.uniform(0.0, 30.0));
    std::sort(times.begin(), times.end());
    const auto rep = check_inviscid_bound(th0, sh, cert, times);
    CHECK(rep.pass);
    CHECK(rep.aux_pass());
  }
}
