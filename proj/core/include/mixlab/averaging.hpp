#pragma once

// Fast time-periodic flows u(A t, x, y) at spectral truncation: a pseudospectral
// solver, the averaged adjoint operator B* = nu Lap + ubar . grad, its detecting
// invariant subspace, and the constants of the fast-oscillation lower bound.
//
// Adjoint observables use the bilinear pairing <f, g> = sum_kappa f(kappa) g(-kappa);
// norms stay Hermitian.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixlab/flows.hpp"
#include "mixlab/linalg.hpp"
#include "mixlab/report.hpp"
#include "mixlab/spectral.hpp"

namespace mixlab::averaging {

using cplx = std::complex<double>;
using linalg::Matrix;
using linalg::Vector;

// ---------------------------------------------------------------------------
// Solver

struct Trajectory2D {
  double nu = 0.0;
  double A = 0.0;
  std::vector<double> times;
  std::vector<spectral::SpectralField2D> fields;
};

struct Evolve2DOptions {
  double dt = 0.0;  // <= 0: the CFL bound below
  /// CFL factor: dt <= cfl / (A 2 pi / L + lip kmax).
  double cfl = 0.2;
};

/// d_t rho = nu Lap rho - u(A t) . grad rho on rho0's lattice. Strang splitting: exact heat
/// half steps around an RK4 advection step; products are dealiased on a grid with
/// n >= 2 K + p + 1 per direction. A = 0 freezes the flow at phase 0.
/// Throws std::invalid_argument for a non-mean-zero rho0, nu < 0 or A < 0.
Trajectory2D evolve_2d(const spectral::SpectralField2D& rho0, const flows::FlowSpec& flow, double A, double nu,
                       const std::vector<double>& times, Evolve2DOptions opts = {});

/// Largest step evolve_2d takes by default.
double cfl_dt(const flows::FlowSpec& flow, double A, const spectral::Lattice& lattice, double cfl = 0.2);

// ---------------------------------------------------------------------------
// Averaged operator

struct OperatorBlock {
  std::vector<int> modes;  // indices into AveragedOperator::modes()
  Matrix matrix;
};

class AveragedOperator {
 public:
  /// Assembles B* on the mean-zero modes of Lattice(cutoff, cutoff). Invariant
  /// components of the drift coupling are stored as separate dense blocks.
  AveragedOperator(const flows::SteadyVelocity& ubar, double nu, int cutoff);

  double nu() const { return nu_; }
  int cutoff() const { return cutoff_; }
  spectral::Lattice lattice() const { return {cutoff_, cutoff_}; }
  const std::vector<std::pair<int, int>>& modes() const { return modes_; }
  int index_of(int k, int l) const;  // -1 for (0, 0)
  std::size_t dim() const { return modes_.size(); }
  const std::vector<OperatorBlock>& blocks() const { return blocks_; }
  std::size_t block_of(int mode) const { return block_of_[static_cast<std::size_t>(mode)]; }
  /// True when ubar's spectrum exceeds cutoff / 2 (convolution no longer exact on the truncation).
  bool band_warning() const { return band_warning_; }

  /// Full matrix (dim x dim); only for small cutoffs.
  Matrix dense() const;
  Vector apply(const Vector& f) const;
  Vector to_vector(const spectral::SpectralField2D& f) const;  // truncates / pads to the cutoff
  spectral::SpectralField2D to_field(const Vector& v) const;

 private:
  double nu_;
  int cutoff_;
  std::vector<std::pair<int, int>> modes_;
  std::vector<OperatorBlock> blocks_;
  std::vector<std::size_t> block_of_;
  std::vector<int> pos_in_block_;
  bool band_warning_ = false;
};

/// Builds the operator from the phase average of `flow` (panels as in flows::time_average).
AveragedOperator averaged_operator(const flows::FlowSpec& flow, double nu, int cutoff);

/// sum_kappa f(kappa) g(-kappa) over the operator's modes.
cplx bilinear(const AveragedOperator& op, const Vector& f, const Vector& g);

// ---------------------------------------------------------------------------
// Detecting spectrum

struct DetectOptions {
  double tol_cluster = -1.0;  // < 0: 1e-6 nu
  double eps_detect = 1e-8;
};

struct Cluster {
  std::vector<cplx> eigenvalues;
  cplx mean;
  double Q = 0.0;  // only set for clusters that were tested
  bool tested = false;
};

struct DetectingSpectrum {
  std::vector<cplx> eigenvalues;  // all, sorted by -Re (then Im)
  std::vector<Cluster> clusters;  // sorted by -Re of the mean
  std::size_t selected = 0;       // index into clusters
  cplx lambda_nu;
  double gamma_nu = 0.0;
  int d_nu = 0;
  std::vector<Vector> basis;      // Phi, columns of the invariant subspace basis
  Matrix G;                       // B* Phi = Phi G, sigma(G) = cluster
  Vector q0;                      // pairing of rho0 with Phi
  double Q_nu = 0.0;
  double K0_nu = 0.0;             // sqrt(sum ||phi_j||^2)
  double K2_nu = 0.0;             // sqrt(sum ||phi_j||_{H^2}^2), weight (1 + |kappa|^2)^2
  double g_nu = 0.0;              // ||G||_2
  double max_residual = 0.0;      // max_j ||B* phi_j - (Phi G)_j||
  double tol_cluster = 0.0;
  double eps_detect = 0.0;

  nlohmann::json to_json(std::size_t max_eigenvalues = 64) const;
};

/// Throws std::runtime_error if no cluster pairs with rho0 above eps_detect ||rho0||.
DetectingSpectrum detecting_spectrum(const AveragedOperator& op, const spectral::SpectralField2D& rho0,
                                     DetectOptions opts = {});

/// Eigenvalues of every block, sorted by -Re.
std::vector<cplx> operator_eigenvalues(const AveragedOperator& op);

/// q_j(t) = <rho(t), phi_j> for every sample.
std::vector<Vector> observable_series(const AveragedOperator& op, const std::vector<spectral::SpectralField2D>& fields,
                                      const std::vector<Vector>& basis);

// ---------------------------------------------------------------------------
// Damping constant

struct DampingResult {
  double D = 1.0;            // max(sampled sup, tail bound)
  double sampled_sup = 1.0;
  double t_argmax = 0.0;
  double T_sup = 0.0;
  double tail_bound = 0.0;   // bound on the integrand for t >= T_sup
  double similarity_bound = 1.0;  // cond(S) sum_{k < r} eta'^{-k} from a scaled Schur similarity
  int nilpotency = 1;
  double cond_S = 1.0;
  double eta_eff = 0.0;      // eta minus the spread of Re(spectrum) around -gamma
};

/// D = sup_{t >= 0} e^{-(gamma + eta) t} ||exp(-G^T t)||_2. Throws std::invalid_argument for
/// eta outside (0, 1] or an empty G.
DampingResult damping_constant(const Matrix& G, double gamma, double eta, int samples = 400);

// ---------------------------------------------------------------------------
// Sylvester constant

struct SylvesterResult {
  double gap = 0.0;
  double radius = 0.0;
  int nodes = 0;
  double max_R0 = 0.0;  // sup_z ||(z - B*)^{-1}||, L^2 -> L^2
  double max_R2 = 0.0;  // L^2 -> H^2
  double max_R1 = 0.0;  // H^-1 -> H^1
  double max_G = 0.0;   // sup_z ||(z - G)^{-1}||
  double C_S = 1.0;
  bool rigorous = false;

  nlohmann::json to_json() const;
};

/// ||(z - B*)^{-1}||_2 on the truncation.
double resolvent_norm(const AveragedOperator& op, cplx z);

/// Contour estimate on the circle around lambda_nu of radius gap / 2:
/// C_S = max{1, r (max(R2, R1) max ||(z - G)^{-1}|| + R0)}. Estimated at truncation,
/// not rigorous. Throws std::runtime_error when the gap is below tol_cluster.
SylvesterResult sylvester_constant(const AveragedOperator& op, const DetectingSpectrum& spec, int nodes = 32);

// ---------------------------------------------------------------------------
// Certificate

/// max{L / 2 pi, 1, sqrt(L / 4 pi)} sqrt(2 max(1 / L, L)).
double multiplier_constant(double L);

struct FastInputs {
  double D = 1.0;
  double C_S = 1.0;
  double C_R = 1.0;
  double M = 1.0;      // 1 + lip
  double S_nu = 1.0;   // 1 + K2 + g
  double nu = 0.0;
  double eta = 1.0;
  double gamma_nu = 0.0;
  double Q_nu = 1.0;
  double K0_nu = 0.0;
  double rho0_norm = 1.0;
};

struct FastCertificate {
  FastInputs in;
  double K_nu = 0.0;
  double A0_terms[6] = {0, 0, 0, 0, 0, 0};
  double A0 = 0.0;
  double c_A = 0.0;
  double C = 0.0;
  double lambda1 = 1.0;
  std::string basis;  // provenance notes (e.g. truncation cutoff)

  /// gamma + eta + D K / A.
  double sharper_exponent(double A) const;
  nlohmann::json to_json() const;
};

inline constexpr double kLambda1 = 1.0;

/// The arithmetic of the certificate from already-estimated constants.
FastCertificate assemble_fast(const FastInputs& in);

struct FastEstimates {
  DetectingSpectrum spectrum;
  DampingResult damping;
  SylvesterResult sylvester;
};

/// eta = nu lambda_1 when that is <= 1, else 1.
double small_viscosity_eta(double nu);

FastCertificate fast_certificate(const flows::FlowSpec& flow, const spectral::SpectralField2D& rho0, double nu,
                                 double eta, const FastEstimates& est);

/// Runs detecting_spectrum, damping_constant and sylvester_constant.
FastEstimates estimate_fast(const flows::FlowSpec& flow, const spectral::SpectralField2D& rho0, double nu, double eta,
                            int cutoff);

/// margin(t) = ||rho(t)|| / (C e^{-c t}) with c = c_A when A > A0, else the sharper
/// A-dependent exponent.
BoundReport check_fast_bound(const Trajectory2D& traj, const FastCertificate& cert, double tol = 1e-6);

}  // namespace mixlab::averaging
