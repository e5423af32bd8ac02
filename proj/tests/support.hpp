#pragma once

// Hand-rolled generators and independent oracles shared by the unit tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "mixlab/spectral.hpp"

namespace testing {

using cplx = std::complex<double>;
using mixlab::spectral::Lattice;
using mixlab::spectral::SpectralField2D;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
  int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); }
  double log_uniform(double a, double b) { return std::exp(uniform(std::log(a), std::log(b))); }
  cplx complex() { return {uniform(-1, 1), uniform(-1, 1)}; }
  Lattice lattice(int max_k = 6, int max_l = 6) { return {integer(1, max_k), integer(1, max_l)}; }

  /// Mean-zero field; conjugate-symmetric when `real`.
  SpectralField2D field(Lattice lat, bool real = true) {
    SpectralField2D f(lat);
    for (int k = -lat.kmax; k <= lat.kmax; ++k)
      for (int l = -lat.lmax; l <= lat.lmax; ++l) f(k, l) = complex();
    f(0, 0) = 0.0;
    if (real) {
      for (int k = -lat.kmax; k <= lat.kmax; ++k)
        for (int l = -lat.lmax; l <= lat.lmax; ++l) {
          const cplx a = f(k, l), b = std::conj(f(-k, -l));
          f(k, l) = 0.5 * (a + b);
        }
    }
    return f;
  }
};

/// Direct evaluation of the Fourier series at a point.
inline cplx eval_direct(const SpectralField2D& f, double x, double y) {
  cplx s = 0.0;
  const auto& lat = f.lattice();
  for (int k = -lat.kmax; k <= lat.kmax; ++k)
    for (int l = -lat.lmax; l <= lat.lmax; ++l) s += f(k, l) * std::polar(1.0, k * x + l * y);
  return s;
}

/// Fourier coefficient of a function of y by an m-point rectangle rule (exact for trig polynomials
/// of degree < m - |l|).
template <class F>
cplx y_coeff(F&& g, int l, int m = 2048) {
  cplx s = 0.0;
  for (int j = 0; j < m; ++j) {
    const double y = 2.0 * M_PI * j / m;
    s += g(y) * std::polar(1.0, -l * y);
  }
  return s / static_cast<double>(m);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
