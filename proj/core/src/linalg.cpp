#include "mixlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace mixlab::linalg {

using cplx = std::complex<double>;

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  // Higham (2005): theta_13 bounds the 1-norm for which the [13/13] approximant is accurate.
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int s = 0;
  if (norm1 > theta13) s = std::max(0, static_cast<int>(std::ceil(std::log2(norm1 / theta13))));
  const Matrix A = a / std::ldexp(1.0, s);
  const Matrix I = Matrix::Identity(n, n);
  const Matrix A2 = A * A, A4 = A2 * A2, A6 = A4 * A2;
  const Matrix U = A * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I);
  const Matrix V = A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;
  Matrix R = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < s; ++i) R = R * R;
  return R;
}

SchurForm schur(const Matrix& a) {
  Eigen::ComplexSchur<Matrix> cs(a);
  if (cs.info() != Eigen::Success) throw std::runtime_error("complex Schur decomposition did not converge");
  return {cs.matrixU(), cs.matrixT()};
}

namespace {

// Rotation [c s; -conj(s) c] mapping (f, g) to (r, 0).
void givens(cplx f, cplx g, double& c, cplx& s) {
  if (g == cplx(0.0)) {
    c = 1.0;
    s = 0.0;
  } else if (f == cplx(0.0)) {
    c = 0.0;
    s = std::conj(g) / std::abs(g);
  } else {
    const double nf = std::abs(f), nrm = std::hypot(nf, std::abs(g));
    c = nf / nrm;
    s = (f / nf) * std::conj(g) / nrm;
  }
}

// x <- c x + s y, y <- c y - conj(s) x
template <class X, class Y>
void rot(X&& x, Y&& y, double c, cplx s) {
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const cplx xi = x(i), yi = y(i);
    x(i) = c * xi + s * yi;
    y(i) = c * yi - std::conj(s) * xi;
  }
}

void swap_adjacent(SchurForm& sf, Eigen::Index k) {
  Matrix& T = sf.T;
  const Eigen::Index n = T.rows();
  const cplx t11 = T(k, k), t22 = T(k + 1, k + 1);
  if (t11 == t22) return;
  double c;
  cplx s;
  givens(T(k, k + 1), t22 - t11, c, s);
  if (k + 2 < n) rot(T.row(k).tail(n - k - 2), T.row(k + 1).tail(n - k - 2), c, s);
  if (k > 0) rot(T.col(k).head(k), T.col(k + 1).head(k), c, std::conj(s));
  T(k, k) = t22;
  T(k + 1, k + 1) = t11;
  rot(sf.Q.col(k), sf.Q.col(k + 1), c, std::conj(s));
}

}  // namespace

int reorder_schur(SchurForm& s, const std::vector<bool>& select) {
  const auto n = static_cast<Eigen::Index>(select.size());
  if (n != s.T.rows()) throw std::invalid_argument("reorder_schur: selection size mismatch");
  Eigen::Index placed = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!select[static_cast<std::size_t>(j)]) continue;
    for (Eigen::Index k = j - 1; k >= placed; --k) swap_adjacent(s, k);
    ++placed;
  }
  // Clear rounding below the diagonal left by the rotations.
  s.T.triangularView<Eigen::StrictlyLower>().setZero();
  return static_cast<int>(placed);
}

double norm2(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (std::min(a.rows(), a.cols()) <= 8) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues()(0);
  }
  // Largest singular value from the Gram matrix; accurate for the top of the spectrum.
  const Matrix g = a.rows() < a.cols() ? Matrix(a * a.adjoint()) : Matrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double norm2_power(int n, const std::function<Vector(const Vector&)>& apply,
                   const std::function<Vector(const Vector&)>& apply_adj, int iters, double rtol) {
  Vector x(n);
  for (int i = 0; i < n; ++i) x(i) = cplx(1.0 + 0.37 * std::sin(1.3 * i), 0.21 * std::cos(0.7 * i));
  x.normalize();
  double est = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector y = apply_adj(apply(x));
    const double nrm = y.norm();
    if (nrm == 0.0) return 0.0;
    const double next = std::sqrt(nrm);
    x = y / nrm;
    if (std::abs(next - est) <= rtol * next) return next;
    est = next;
  }
  return est;
}

}  // namespace mixlab::linalg
