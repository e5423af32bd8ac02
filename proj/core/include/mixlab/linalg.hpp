#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace mixlab::linalg {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// exp(A) by scaling and squaring with the degree-13 Pade approximant.
Matrix expm(const Matrix& a);

struct SchurForm {
  Matrix Q;  // unitary
  Matrix T;  // upper triangular, A = Q T Q^H
};

SchurForm schur(const Matrix& a);

/// Reorders a complex Schur form so that the diagonal entries flagged in `select`
/// (indexed by current diagonal position) come first, in their original relative order.
/// Adjacent swaps use Givens rotations. Returns the number of selected entries.
int reorder_schur(SchurForm& s, const std::vector<bool>& select);

/// Largest singular value.
double norm2(const Matrix& a);

/// Largest singular value of the operator x -> apply(x), with adjoint `apply_adj`,
/// by power iteration on apply_adj(apply(.)) from a deterministic start vector.
double norm2_power(int n, const std::function<Vector(const Vector&)>& apply,
                   const std::function<Vector(const Vector&)>& apply_adj, int iters = 200, double rtol = 1e-10);

}  // namespace mixlab::linalg
