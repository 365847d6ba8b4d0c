#pragma once

#include <Eigen/Dense>
#include <vector>

#include "droplet/geometry.hpp"

namespace droplet {

// Tensor Gauss-Legendre rule on a truncated box in the rotated coordinates
// of the Gaussian weight. Node counts must be powers of two in [64, 4096];
// the box is trunc_multiplier x the outer droplet extent plus sqrt(40/N).
struct QuadratureSpec {
  int radial_nodes = 256;
  int angular_nodes = 256;
  double trunc_multiplier = 1.5;
  double target_tolerance = 1e-9;
};

// Monic planar orthogonal polynomial data at matrix size N.
// P_n(z) = z^n + A_n z^{n-1} + B_n z^{n-2} + ...; h_j = squared norms;
// log_Z = log N! + sum_{j<N} log h_j.
struct OrthoSummary {
  int N = 0;
  std::vector<double> log_h;
  std::vector<double> A_coeffs;
  std::vector<double> B_coeffs;
  double log_Z = 0;
  Eigen::MatrixXd poly_coeffs;  // row n: coefficients of P_n in the monomial basis
  double achieved_tolerance = 0;
};

// Gram matrix G_jk = (1/pi) int z^j conj(z)^k |z-a|^{2cN} e^{-N [x^2/(1+tau) + y^2/(1-tau)]}.
// Requires integer cN >= 0, 1 <= M <= N+2, N <= 16. The rule is evaluated at
// the requested node counts and at doubled counts; a tolerance error is
// raised if any entry moves by more than target_tolerance relative to the
// diagonal scale sqrt(G_jj G_kk). Returns the doubled-rule matrix.
Eigen::MatrixXcd moment_matrix(const ModelParams& p, int N, int M,
                               const QuadratureSpec& q, double* achieved = nullptr);

// Same with the unreduced weight e^{-N [ (1-tau) x^2 + (1+tau) y^2 ]} and the
// charge moved to a/sqrt(1-tau^2).
Eigen::MatrixXcd moment_matrix_plain_weight(const ModelParams& p, int N, int M,
                                            const QuadratureSpec& q,
                                            double* achieved = nullptr);

// Scaled log-domain LDL factorization of the Gram matrix: h_j from pivots,
// A_n and B_n from the inverse unit-triangular factor. Throws on
// non-positive pivots or a non-real Gram matrix.
OrthoSummary ortho_from_moments(const Eigen::MatrixXcd& gram, int N);

// moment_matrix with M = N+2 followed by ortho_from_moments.
OrthoSummary oracle_summary(const ModelParams& p, int N, const QuadratureSpec& q);

// |centered difference of log Z_N in a  -  (2N/(1+tau)) A_{N,N}|.
double deformation_residual_a(const ModelParams& p, int N, const QuadratureSpec& q,
                              double h_step);

// |centered difference of log Z_N in tau  -  closed-form right-hand side|,
// RHS = -(N/(1-tau^2)) [ tau(1+2c)N + tau + (B_{N,N}+B_{N+1,N}-A_{N,N}A_{N+1,N})
//                        - (2 tau a/(1+tau)) A_{N,N} ].
double deformation_residual_tau(const ModelParams& p, int N, const QuadratureSpec& q,
                                double h_step);

// Maximum coefficient deviation between P_{n,N}(z; a,c,tau) and the
// (n/N)^{(n-m)/2}-rescaled coefficients of P_{n,n}(z; sqrt(N/n) a, (N/n) c, tau).
double scaling_identity_residual(const ModelParams& p, int n, int N,
                                 const QuadratureSpec& q);

// Leading finite-N coefficient asymptotics in the annular regime.
struct PredictedCoefficients {
  double a_nn = 0;    // A_{N,N}   -> a c N
  double b_nn = 0;    // B_{N,N}   -> quadratic polynomial in N
  double a_n1n = 0;   // A_{N+1,N} -> a c N
  double b_n1n = 0;   // B_{N+1,N}
};
PredictedCoefficients predicted_coefficients_regime1(const ModelParams& p, int N);

// f1 = (1/(DeltaQ phi'(inf))) (1/24 pi) oint (Re(w^2 {psi,w}) + |psi'|^2 kappa^2)
//      w / |psi'|^2 ds  over the unit circle; real by symmetry.
double f1_leading_coefficient(const ExteriorMap& m, const ModelParams& p,
                              int nodes = 512);

// A_{N,N} ~ -(M1/(1-tau^2)) N + f1/N for a simply connected droplet.
double predicted_a_regime2(const ModelParams& p, const ExteriorMap& m, int N);

}  // namespace droplet
