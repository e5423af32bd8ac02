#pragma once

#include <complex>
#include <span>

namespace mixlab::fft {

using cplx = std::complex<double>;

// Thin FFTW wrappers. Plans are cached per (shape, direction) and executed
// through the new-array interface, so calls are safe from several threads.
//
// Sign convention: `synthesis` computes out[j] = sum_m in[m] exp(+2 pi i j m / n)
// and `analysis` computes out[m] = (1/n) sum_j in[j] exp(-2 pi i j m / n).
// The pair is an exact inverse.

void synthesis_1d(std::span<const cplx> in, std::span<cplx> out);
void analysis_1d(std::span<const cplx> in, std::span<cplx> out);

// Row-major (nx, ny) arrays, index ix * ny + iy.
void synthesis_2d(int nx, int ny, std::span<const cplx> in, std::span<cplx> out);
void analysis_2d(int nx, int ny, std::span<const cplx> in, std::span<cplx> out);

/// Smallest n' >= n whose only prime factors are 2, 3 and 5.
int nice_size(int n);

}  // namespace mixlab::fft
