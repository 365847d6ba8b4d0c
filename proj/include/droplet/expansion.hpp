#pragma once

#include <utility>
#include <vector>

#include "droplet/geometry.hpp"

namespace droplet {

// Coefficients of the large-N expansion
//   log Z_N = C1 N^2 + C2 N log N + C3 N + C4 log N + C5 + tail,
// tail = sum_{k>=1} E_k N^{-k} (only available in the annular regime).
struct ExpansionReport {
  double C1 = 0;
  double C2 = 0.5;
  double C3 = 0;
  double C4 = 0;
  double C5 = 0;
  int chi = 1;                               // Euler characteristic of the droplet
  double liouville = 0;                      // domain action L[K]
  std::vector<std::pair<int, double>> tail;  // (k, E_k)
  int k0 = 0;
};

enum class ReferenceKind { induced, elliptic };

// Weighted equilibrium energy I_Q of the droplet.
double energy(const ModelParams& p, const PhaseLabel& phase, const ExteriorMap& m);
double energy(const ModelParams& p);

// C3 = log(2 pi)/2 - 1 + (1/2) log(1 - tau^2).
double entropy_coefficient(const ModelParams& p);

// Assembles all coefficients; throws PhaseError / NearCriticalError.
ExpansionReport expansion_coefficients(const ModelParams& p, int k0);

// Exact finite-N reference values of log Z_N.
// induced:  N! G(N+cN+1)/G(cN+1) N^{-(c+1/2)N^2 - N/2}   (integer cN via Barnes G,
//           otherwise a Gamma product); uses p.c only.
// elliptic: (1-tau^2)^{N/2} G(N+2) N^{-N^2/2 - N/2};      uses p.tau only.
double log_z_reference(ReferenceKind kind, int N, const ModelParams& p);

// Gamma-product route for the induced reference, valid for any real c >= 0.
double log_z_induced_gamma_product(int N, double c);

// Evaluates the truncated expansion at finite N.
double log_z_predicted(const ModelParams& p, int N, int k0);

// log E|det(X - a)|^{2cN} = log Z_N(Q) - log Z_N(Q^elliptic); exactly zero at c = 0.
double char_poly_moment_log(const ModelParams& p, int N, int k0);

}  // namespace droplet
