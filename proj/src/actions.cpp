#include "droplet/actions.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "droplet/errors.hpp"
#include "droplet/quadrature.hpp"

namespace droplet {

namespace {

// Roots of the monic quartic w^4 + c3 w^3 + c2 w^2 + c1 w + c0 via the
// companion matrix, polished by three Newton steps.
std::vector<Complex> quartic_roots(double c3, double c2, double c1, double c0) {
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  comp(0, 3) = -c0;
  comp(1, 0) = 1.0;
  comp(1, 3) = -c1;
  comp(2, 1) = 1.0;
  comp(2, 3) = -c2;
  comp(3, 2) = 1.0;
  comp(3, 3) = -c3;
  Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  std::vector<Complex> roots;
  roots.reserve(4);
  for (int i = 0; i < 4; ++i) {
    Complex r = es.eigenvalues()(i);
    for (int it = 0; it < 3; ++it) {
      Complex p = ((r + c3) * r + c2) * r * r + c1 * r + c0;
      Complex dp = ((4.0 * r + 3.0 * c3) * r + 2.0 * c2) * r + c1;
      if (std::abs(dp) == 0.0) break;
      r -= p / dp;
    }
    roots.push_back(r);
  }
  return roots;
}

double log_abs_dpsi(const ExteriorMap& m, Complex w) {
  return std::log(std::abs(map_eval(m, w, 1)));
}

// Contribution of one zero/pole location p of the rational derivative:
// evaluate log|psi'| at the reflected point 1/conj(p); p = 0 reflects to
// infinity where psi' -> leading scale.
double reflected_contribution(const ExteriorMap& m, Complex p, double log_scale_inf) {
  double ap = std::abs(p);
  if (ap < 1e-10) return log_scale_inf;
  if (std::abs(ap - 1.0) <= 1e-8)
    throw NearCriticalError(
        "map derivative has a zero on the unit circle; action formula degenerates");
  if (ap > 1.0) return 0.0;  // outside the disc: no contribution
  return log_abs_dpsi(m, 1.0 / std::conj(p));
}

double ellipse_or_regime2_closed(const ExteriorMap& m) {
  const double log_r_inf =
      (m.kind == ExteriorMap::Kind::Ellipse) ? std::log(m.scale) : std::log(m.R);
  std::vector<Complex> zeros;
  double pole_sum = 0.0;
  if (m.kind == ExteriorMap::Kind::Ellipse) {
    // psi' = s (w^2 - tau)/w^2: zeros +-sqrt(tau), double pole at 0.
    double st = std::sqrt(m.tau);
    zeros = {Complex(st, 0), Complex(-st, 0)};
    pole_sum = 2.0 * log_r_inf;
  } else if (m.lambda == 0.0) {
    // Degenerate rational map: the pole at q cancels against a double zero
    // of the numerator, leaving the Joukowski structure. The quartic route
    // would resolve that pair only to the double-root conditioning ~1e-9.
    double st = std::sqrt(m.tau);
    zeros = {Complex(st, 0), Complex(-st, 0)};
    pole_sum = 2.0 * log_r_inf;
  } else {
    // psi' = R N(w) / (w^2 (w-q)^2),
    // N(w) = w^4 - 2q w^3 + (q^2 - tau + lambda) w^2 + 2 tau q w - tau q^2.
    const double q = m.q, tau = m.tau, lam = m.lambda;
    zeros = quartic_roots(-2.0 * q, q * q - tau + lam, 2.0 * tau * q, -tau * q * q);
    pole_sum = 2.0 * log_r_inf + 2.0 * log_abs_dpsi(m, Complex(1.0 / q, 0));
  }
  double zero_sum = 0.0;
  for (Complex p : zeros) zero_sum += reflected_contribution(m, p, log_r_inf);
  return -4.0 * log_r_inf - zero_sum + pole_sum;
}

}  // namespace

double liouville_closed_rational(const ExteriorMap& m) {
  if (m.kind == ExteriorMap::Kind::Disc) {
    // Interior map psi(w) = center + radius w: S = +4 log|psi'(0)|.
    return 4.0 * std::log(m.radius);
  }
  return ellipse_or_regime2_closed(m);
}

double liouville_explicit(const ModelParams& p, const PhaseLabel& phase,
                          const ExteriorMap& m) {
  if (phase.regime == Regime::III)
    throw PhaseError("no explicit action formula for a two-component droplet");
  if (phase.regime == Regime::I) {
    if (p.c <= 0.0)
      throw NearCriticalError("action formula degenerates as the inner boundary vanishes");
    return 2.0 * std::log(p.c / (1.0 + p.c));
  }
  const double q = m.q, tau = m.tau, lam = m.lambda, R = m.R;
  const double u = 1.0 - q * q;
  const double tq = 1.0 - tau * q * q;
  // The final factor changes sign across the droplet family; only its modulus
  // enters, and the action diverges where it vanishes.
  const double args[5] = {
      R * u,
      lam + (1.0 - tau) * (1.0 - q) * (1.0 - q),
      lam + (1.0 - tau) * (1.0 + q) * (1.0 + q),
      q * q * lam + u * u * tq,
      std::abs((1.0 + tau * q * q) * (1.0 + tau * q * q) * lam -
               (1.0 + tau) * u * tq * tq)};
  for (double v : args)
    if (!(v > 0.0))
      throw NearCriticalError("action formula logarithm argument is not positive");
  return -4.0 * std::log(args[0]) - std::log(args[1]) - std::log(args[2]) +
         4.0 * std::log(args[3]) - 2.0 * std::log(args[4]);
}

double liouville_numeric(const ExteriorMap& m, int radial_nodes, int angular_nodes) {
  if (radial_nodes < 2 || angular_nodes < 4)
    throw DomainError("quadrature node counts are too small");
  if (m.kind == ExteriorMap::Kind::Disc) return 4.0 * std::log(m.radius);
  const double log_r_inf =
      (m.kind == ExteriorMap::Kind::Ellipse) ? std::log(m.scale) : std::log(m.R);
  // w = 1/u maps the exterior to the punctured disc; dA(w) = du dv/(pi rho^4)
  // with the extra rho from polar measure giving the rho^-3 radial kernel.
  const GaussLegendre& gl = gauss_legendre(radial_nodes);
  Kahan<double> acc;
  for (int k = 0; k < angular_nodes; ++k) {
    const double phi = 2.0 * M_PI * (k + 0.5) / angular_nodes;
    const Complex dir(std::cos(phi), std::sin(phi));
    for (int i = 0; i < radial_nodes; ++i) {
      const double rho = 0.5 * (gl.nodes[i] + 1.0);
      const double wrad = 0.5 * gl.weights[i];
      const Complex w = 1.0 / (rho * dir);
      const Complex pre = map_eval(m, w, 2) / map_eval(m, w, 1);
      acc.add(wrad * std::norm(pre) / (rho * rho * rho));
    }
  }
  const double integral = acc.sum * (2.0 * M_PI / angular_nodes) / M_PI;
  return integral - 4.0 * log_r_inf;
}

double liouville_variation_rate(const ExteriorMap& m,
                                const std::function<double(double)>& re_p_on_circle,
                                int nodes) {
  if (nodes < 8) throw DomainError("too few boundary nodes");
  Kahan<double> acc;
  for (int k = 0; k < nodes; ++k) {
    const double theta = 2.0 * M_PI * k / nodes;
    const Complex w = std::polar(1.0, theta);
    const BoundaryGeometry g = boundary_geometry_at(m, w);
    const double dpsi2 = std::norm(map_eval(m, w, 1));
    const double f = (w * w * g.schwarzian).real() + dpsi2 * g.kappa * g.kappa;
    acc.add(f * re_p_on_circle(theta));
  }
  return -4.0 * acc.sum / nodes;
}

double boundary_entropy_term(const ModelParams& p, int chi) {
  if (chi != 0 && chi != 1) throw DomainError("Euler characteristic must be 0 or 1");
  p.validate();
  const double log_dq = -std::log1p(-p.tau * p.tau);  // log DeltaQ
  const double closed = -(chi / 12.0) * log_dq;

  // Contour cross-check: -(1/24 pi) oint log(DeltaQ) kappa ds over the free
  // boundary. The outer component always integrates kappa ds to 2 pi; an
  // inner circular boundary contributes -2 pi regardless of its radius.
  ExteriorMap outer;
  if (chi == 0) {
    outer = ellipse_map(p.c, p.tau);
  } else if (p.c == 0.0) {
    outer = ellipse_map(0.0, p.tau);
  } else {
    outer = solve_map_params(p);
  }
  const int n = 512;
  Kahan<double> acc;
  for (int k = 0; k < n; ++k) {
    const Complex w = std::polar(1.0, 2.0 * M_PI * k / n);
    const BoundaryGeometry g = boundary_geometry_at(outer, w);
    acc.add(g.kappa * std::abs(map_eval(outer, w, 1)));
  }
  double total_turning = acc.sum * 2.0 * M_PI / n;
  if (chi == 0) total_turning -= 2.0 * M_PI;
  const double numeric = -log_dq * total_turning / (24.0 * M_PI);
  if (std::abs(numeric - closed) > 1e-10)
    throw ToleranceError("boundary entropy contour check failed");
  return closed;
}

LiouvilleReport liouville_report(const ModelParams& p) {
  p.validate();
  LiouvilleReport rep;
  if (p.c == 0.0) {
    // Simply connected elliptic droplet; all routes on the single free boundary.
    const ExteriorMap e = ellipse_map(0.0, p.tau);
    rep.closed_form = liouville_closed_rational(e);
    rep.explicit_formula = -2.0 * std::log1p(-p.tau * p.tau);
    rep.numeric_integral = liouville_numeric(e);
    rep.per_component.emplace_back("outer", rep.closed_form);
    return rep;
  }
  const PhaseLabel phase = classify_phase(p);
  if (phase.regime == Regime::III)
    throw PhaseError("two-component droplets are out of scope");
  if (phase.regime == Regime::I) {
    const ExteriorMap e = ellipse_map(p.c, p.tau);
    const ExteriorMap d = disc_map(p.a, p.c, p.tau);
    const double se = liouville_closed_rational(e);
    const double sd = liouville_closed_rational(d);
    rep.closed_form = se + sd;
    rep.numeric_integral = liouville_numeric(e) + liouville_numeric(d);
    rep.explicit_formula = liouville_explicit(p, phase, e);
    rep.per_component.emplace_back("outer", se);
    rep.per_component.emplace_back("inner", sd);
    return rep;
  }
  const ExteriorMap m = solve_map_params(p);
  rep.closed_form = liouville_closed_rational(m);
  rep.explicit_formula = liouville_explicit(p, phase, m);
  rep.numeric_integral = liouville_numeric(m);
  rep.per_component.emplace_back("outer", rep.closed_form);
  return rep;
}

}  // namespace droplet
