#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "droplet/geometry.hpp"

namespace droplet {

// Liouville action of a droplet by three independent routes.
struct LiouvilleReport {
  double closed_form = 0;       // residue route
  double explicit_formula = 0;  // closed parameter formula
  double numeric_integral = 0;  // disc quadrature route
  std::vector<std::pair<std::string, double>> per_component;  // closed route
};

// Residue evaluation of S[psi] for a map whose derivative is rational:
// S = -4 log psi'(inf) - sum_zeros log psi'(1/conj(p)) + sum_poles log psi'(1/conj(q)),
// zeros/poles inside the unit disc; roots at w=0 contribute log psi'(inf).
// Disc kind uses the interior convention S = +4 log|psi'(0)|.
double liouville_closed_rational(const ExteriorMap& m);

// Closed parameter formulas for the domain action L[K] (24 x the normalized
// form). Throws NearCriticalError when a logarithm argument degenerates.
double liouville_explicit(const ModelParams& p, const PhaseLabel& phase,
                          const ExteriorMap& m);

// Direct quadrature of int |psi''/psi'|^2 dA over the exterior, via w = 1/u
// on the unit disc (Gauss-Legendre radial x trapezoid angular), minus
// 4 log psi'(inf). Disc kind: interior convention, integral term zero.
double liouville_numeric(const ExteriorMap& m, int radial_nodes = 200,
                         int angular_nodes = 512);

// Loewner-Kufarev variational rate
//   -(2/pi) oint (Re(w^2 {psi,w}) + |psi'|^2 kappa^2) ReP ds
// with ReP sampled at theta_k = 2 pi k / nodes on the unit circle.
double liouville_variation_rate(const ExteriorMap& m,
                                const std::function<double(double)>& re_p_on_circle,
                                int nodes = 512);

// Boundary entropy term -(chi/12) log(DeltaQ) = (chi/12) log(1-tau^2),
// cross-checked against the contour integral -(1/24 pi) oint log(DeltaQ) kappa ds.
double boundary_entropy_term(const ModelParams& p, int chi);

// All three routes for the domain action of the droplet of p.
LiouvilleReport liouville_report(const ModelParams& p);

}  // namespace droplet
