#pragma once

#include <complex>
#include <map>
#include <string>

namespace droplet {

using Complex = std::complex<double>;

// Potential parameters: charge location a >= 0, charge strength c >= 0,
// anisotropy tau in [0,1). t0 = 1 - tau^2 is the droplet area in dA units.
struct ModelParams {
  double a = 0.0;
  double c = 0.0;
  double tau = 0.0;

  double t0() const { return 1.0 - tau * tau; }
  double delta_q() const { return 1.0 / (1.0 - tau * tau); }
  void validate() const;  // throws DomainError on violated bounds
};

enum class Regime { I, II, III };

// Phase classification with signed slacks for each inequality tested.
// Positive slack means the condition holds with room to spare.
struct PhaseLabel {
  Regime regime = Regime::I;
  std::map<std::string, double> margins;
};

// Exterior conformal map from {|w| > 1} onto the unbounded complement of a
// droplet component, psi'(infinity) > 0.
//   Ellipse:  psi(w) = scale * (w + tau / w),   scale = sqrt(1+c)
//   Disc:     psi(w) = center + radius * w      (interior uniformization of
//             the spectral gap around the charge)
//   RegimeII: psi(w) = R * (w + tau/w - lambda/(w-q) - lambda/(q(1-tau)))
struct ExteriorMap {
  enum class Kind { Ellipse, Disc, RegimeII };
  Kind kind = Kind::Ellipse;
  double tau = 0.0;
  double scale = 1.0;               // Ellipse
  double center = 0.0, radius = 1.0;  // Disc
  double R = 1.0, q = 0.5, lambda = 0.0;  // RegimeII
};

struct ModelTriple {
  double a, c, R;
};

struct BoundaryGeometry {
  double kappa;             // curvature of the image boundary
  Complex schwarzian;       // {psi, w}
  Complex pre_schwarzian;   // psi''/psi'
};

struct SchwarzResult {
  Complex schwarz;  // S(z) with conj(S(z)) = psi(1/conj(phi(z)))
  double r_value;   // Hele-Shaw obstacle gap R(z)
};

struct AreaMoment {
  double area_in_dA;
  double m1;
};

// Decide the droplet topology for given parameters. Doubly connected points
// classify as Regime I (boundary points inclusive), successfully solved
// simply connected maps with lambda < lambda_cri as Regime II, everything
// else as Regime III.
PhaseLabel classify_phase(const ModelParams& p);

// Criticality indicator H(q, lambda); lambda_cri is its unique zero.
double h_indicator(double q, double lambda, double tau);

// Larger root of q w^2 - (q^2 + 1 + lambda/(1-tau)) w + q = 0; always >= 1.
double w_star(double q, double lambda, double tau);

// Zero of lambda -> H(q, lambda) via bracketing and bisection to 1e-12.
double lambda_critical(double q, double tau);

// Closed forms a(q,lambda), c(q,lambda) and R from the coupled equations.
ModelTriple param_to_model(double q, double lambda, double tau);

// Invert (a, c) -> (q, lambda) by grid-seeded damped Newton; returns the
// RegimeII exterior map. Throws SolverError when no solution exists and
// PhaseError when the converged lambda >= lambda_cri.
ExteriorMap solve_map_params(const ModelParams& p);

ExteriorMap ellipse_map(double c, double tau);
ExteriorMap disc_map(double a, double c, double tau);

// psi (order 0), psi' (order 1), psi'' (order 2) at |w| >= 1.
Complex map_eval(const ExteriorMap& m, Complex w, int order);

// Curvature, Schwarzian derivative, and pre-Schwarzian at |w| = 1.
BoundaryGeometry boundary_geometry_at(const ExteriorMap& m, Complex w);

// phi = psi^{-1} by Newton, seeded from the Joukowski inverse.
Complex map_inverse(const ExteriorMap& m, Complex z);

// Schwarz function and Hele-Shaw obstacle gap R(z) for z within 0.2 of the
// outer boundary, outside or on it.
SchwarzResult schwarz_obstacle(const ExteriorMap& m, const ModelParams& p, Complex z);

// Droplet area (dA units) and first interior harmonic moment M1.
// Regime I: exact closed forms. Regime II: 512-node trapezoid contour
// integrals pulled back through the map.
AreaMoment droplet_area_and_m1(const ExteriorMap& m, const ModelParams& p);

}  // namespace droplet
