#include "droplet/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <vector>

#include "droplet/errors.hpp"
#include "droplet/quadrature.hpp"

namespace droplet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest lambda with positive common radicand D(q, lambda) at fixed q.
double lambda_radicand_root(double q, double tau) {
  double u = 1.0 - q * q;
  return u * (tau * u + std::sqrt(tau * tau * u * u + 1.0 - tau * tau));
}

double coupled_d(double q, double lambda, double tau) {
  double u = 1.0 - q * q;
  return u * u * (1.0 - tau * tau + 2.0 * tau * lambda) - lambda * lambda;
}

struct Regime1Margins {
  bool range1 = false, range2 = false;
  std::map<std::string, double> margins;
};

// Signed slacks of the doubly-connected parameter ranges. Non-strict
// inequalities: zero slack still counts as doubly connected.
Regime1Margins regime1_margins(const ModelParams& p) {
  Regime1Margins out;
  double a = p.a, c = p.c, tau = p.tau;
  if (tau == 0.0) {
    double slack = std::sqrt(1.0 + c) - std::sqrt(c) - a;
    out.margins["range_a"] = slack;
    out.range2 = slack >= 0.0;
    return out;
  }
  double bound_a = 2.0 * std::sqrt(2.0 * tau * (1.0 + tau) / (3.0 + tau * tau));
  double rad_b = tau * (1.0 - tau - 2.0 * c * tau) / (1.0 - tau);
  double bound_b = rad_b >= 0.0 ? 2.0 * std::sqrt(rad_b) : 0.0;
  double bound_c = (1.0 + tau) * std::sqrt(1.0 + c) - std::sqrt(c * (1.0 - tau * tau));
  double c_max1 = (1.0 - tau) / (2.0 * tau);
  double c_max2 = std::pow(1.0 - tau, 3) / (2.0 * tau * (3.0 + tau * tau));

  out.margins["range1_c"] = c_max1 - c;
  out.margins["range1_a"] = std::min(bound_a, bound_b) - a;
  out.margins["range2_c"] = c_max2 - c;
  out.margins["range2_a_low"] = a - bound_a;
  out.margins["range2_a_high"] = bound_c - a;
  out.range1 = c <= c_max1 && rad_b >= 0.0 && a <= std::min(bound_a, bound_b);
  out.range2 = c <= c_max2 && a >= bound_a && a <= bound_c;
  return out;
}

Complex map_d3(const ExteriorMap& m, Complex w) {
  switch (m.kind) {
    case ExteriorMap::Kind::Disc:
      return 0.0;
    case ExteriorMap::Kind::Ellipse:
      return m.scale * (-6.0 * m.tau / (w * w * w * w));
    case ExteriorMap::Kind::RegimeII: {
      Complex d = w - m.q;
      return m.R * (-6.0 * m.tau / (w * w * w * w) + 6.0 * m.lambda / (d * d * d * d));
    }
  }
  return 0.0;
}

struct SolveOutcome {
  enum class Status { ok, out_of_range, no_root, budget } status = Status::no_root;
  ExteriorMap map;
  double residual = kInf;
  double lambda_slack = 0.0;
};

// Raw residual norm of (a(q,l) - a, c(q,l) - c).
double solve_residual(double q, double lambda, const ModelParams& p) {
  if (!(q > 0.0 && q < 1.0 && lambda >= 0.0)) return kInf;
  if (coupled_d(q, lambda, p.tau) <= 0.0) return kInf;
  ModelTriple t = param_to_model(q, lambda, p.tau);
  return std::hypot(t.a - p.a, t.c - p.c);
}

// Damped Newton on (q, lambda) from one seed. Returns achieved residual.
double newton_from_seed(double& q, double& lambda, const ModelParams& p) {
  double res = solve_residual(q, lambda, p);
  for (int it = 0; it < 80; ++it) {
    if (!(res < kInf)) break;
    double lam_max = lambda_radicand_root(q, p.tau) * (1.0 - 1e-9);
    double hq = 1e-7 * std::max(q, 1e-3);
    double hl = 1e-7 * std::max(lambda, 1e-3);
    ModelTriple f0 = param_to_model(q, lambda, p.tau);
    double qp = std::min(q + hq, 1.0 - 1e-12), qm = std::max(q - hq, 1e-12);
    ModelTriple fq1 = param_to_model(qp, lambda, p.tau);
    ModelTriple fq0 = param_to_model(qm, lambda, p.tau);
    double lp = std::min(lambda + hl, lam_max), lm = std::max(lambda - hl, 0.0);
    ModelTriple fl1 = param_to_model(q, lp, p.tau);
    ModelTriple fl0 = param_to_model(q, lm, p.tau);
    double j11 = (fq1.a - fq0.a) / (qp - qm), j12 = (fl1.a - fl0.a) / (lp - lm);
    double j21 = (fq1.c - fq0.c) / (qp - qm), j22 = (fl1.c - fl0.c) / (lp - lm);
    double det = j11 * j22 - j12 * j21;
    if (!std::isfinite(det) || std::fabs(det) < 1e-300) break;
    double ra = f0.a - p.a, rc = f0.c - p.c;
    double dq = (j22 * ra - j12 * rc) / det;
    double dl = (-j21 * ra + j11 * rc) / det;
    double alpha = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      double qn = std::clamp(q - alpha * dq, 1e-9, 1.0 - 1e-12);
      double ln = std::clamp(lambda - alpha * dl, 0.0,
                             lambda_radicand_root(qn, p.tau) * (1.0 - 1e-9));
      double rn = solve_residual(qn, ln, p);
      if (rn < res) {
        q = qn;
        lambda = ln;
        res = rn;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    if (res < 1e-13 * std::max({1.0, std::fabs(p.a), std::fabs(p.c)})) break;
  }
  return res;
}

double lambda_critical_cached(double q, double tau) {
  static std::map<std::pair<double, double>, double> cache;
  static std::mutex mu;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find({q, tau});
    if (it != cache.end()) return it->second;
  }
  double v = lambda_critical(q, tau);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(std::make_pair(q, tau), v);
  return v;
}

SolveOutcome solve_regime2(const ModelParams& p) {
  SolveOutcome out;
  // c = 0: lambda = 0 and a = (1 + tau q^2)/q in closed form.
  if (p.c == 0.0) {
    double q;
    if (p.tau == 0.0) {
      if (p.a <= 1.0) return out;
      q = 1.0 / p.a;
    } else {
      double disc = p.a * p.a - 4.0 * p.tau;
      if (disc < 0.0) return out;
      q = (p.a - std::sqrt(disc)) / (2.0 * p.tau);
      if (!(q > 0.0 && q < 1.0)) return out;
    }
    out.status = SolveOutcome::Status::ok;
    out.map = {ExteriorMap::Kind::RegimeII, p.tau, 1.0, 0.0, 1.0, 1.0, q, 0.0};
    out.residual = solve_residual(q, 0.0, p);
    out.lambda_slack = lambda_critical_cached(q, p.tau);
    return out;
  }

  // Coarse scan over (q, lambda/lambda_cri) plus boundary-layer seeds.
  struct Seed {
    double score, q, lambda;
  };
  std::vector<Seed> seeds;
  const int nq = 64, ns = 64;
  double sa = std::max(1.0, std::fabs(p.a)), sc = std::max(1.0, std::fabs(p.c));
  auto push_seed = [&](double q, double lambda) {
    if (!(q > 0.0 && q < 1.0 && lambda >= 0.0)) return;
    if (coupled_d(q, lambda, p.tau) <= 0.0) return;
    ModelTriple t = param_to_model(q, lambda, p.tau);
    double s = std::hypot((t.a - p.a) / sa, (t.c - p.c) / sc);
    if (std::isfinite(s)) seeds.push_back({s, q, lambda});
  };
  for (int i = 0; i < nq; ++i) {
    double q = (i + 0.5) / nq;
    double lc = lambda_critical_cached(q, p.tau);
    for (int j = 0; j < ns; ++j) push_seed(q, (static_cast<double>(j) / ns) * lc);
    for (double s : {1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 0.999})
      push_seed(q, s * lc);
  }
  if (p.a > 2.0) {
    for (double f : {0.5, 1.0, 2.0}) {
      double q = std::min(0.999, f / p.a);
      double lc = lambda_critical_cached(q, p.tau);
      for (double s : {0.0, 1e-6, 1e-3, 0.1, 0.5}) push_seed(q, s * lc);
    }
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const Seed& x, const Seed& y) { return x.score < y.score; });

  double best_res = kInf, best_q = 0, best_l = 0;
  int tried = 0;
  for (const Seed& s : seeds) {
    double q = s.q, lambda = s.lambda;
    double r = newton_from_seed(q, lambda, p);
    if (r < best_res) {
      best_res = r;
      best_q = q;
      best_l = lambda;
    }
    if (best_res < 1e-11) break;
    if (++tried >= 8) break;
  }
  if (!(best_res < 1e-11)) {
    out.status = std::isfinite(best_res) ? SolveOutcome::Status::no_root
                                         : SolveOutcome::Status::budget;
    out.residual = best_res;
    return out;
  }
  double lc = lambda_critical_cached(best_q, p.tau);
  out.residual = best_res;
  out.lambda_slack = lc - best_l;
  if (best_l >= lc) {
    out.status = SolveOutcome::Status::out_of_range;
    return out;
  }
  double d = coupled_d(best_q, best_l, p.tau);
  double r_map = (1.0 - best_q * best_q) * std::sqrt((1.0 - p.tau * p.tau) / d);
  out.status = SolveOutcome::Status::ok;
  out.map = {ExteriorMap::Kind::RegimeII, p.tau, 1.0, 0.0, 1.0, r_map, best_q, best_l};
  return out;
}

}  // namespace

void ModelParams::validate() const {
  if (!(a >= 0.0) || !std::isfinite(a)) throw DomainError("ModelParams: a must be >= 0");
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("ModelParams: c must be >= 0");
  if (!(tau >= 0.0 && tau < 1.0)) throw DomainError("ModelParams: tau must lie in [0,1)");
}

double w_star(double q, double lambda, double tau) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("w_star: q must lie in (0,1)");
  if (!(lambda >= 0.0)) throw DomainError("w_star: lambda must be >= 0");
  double s = q * q + 1.0 + lambda / (1.0 - tau);
  double rad = (s - 2.0 * q) * (s + 2.0 * q);
  return (s + std::sqrt(rad)) / (2.0 * q);
}

double h_indicator(double q, double lambda, double tau) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("h_indicator: q must lie in (0,1)");
  if (!(lambda >= 0.0)) throw DomainError("h_indicator: lambda must be >= 0");
  double ws = w_star(q, lambda, tau);
  double u = 1.0 - q * q;
  double tq = 1.0 - tau * q * q;
  double term1 = ((1.0 - tau) / q) *
                 (1.0 + tau * q * q - (tq / (1.0 - tau)) * lambda / u) * (ws - 1.0 / ws);
  double term2 = 0.0;
  if (lambda > 0.0) {
    term2 = -2.0 * (tq * lambda / (q * q) + lambda * lambda / (u * u)) *
            std::log(std::fabs(q * ws - 1.0) / std::fabs(ws - q));
  }
  double term3 =
      -2.0 * (1.0 - tau * tau + (1.0 + tau * q * q) * lambda / (q * q)) * std::log(ws);
  return term1 + term2 + term3;
}

double lambda_critical(double q, double tau) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("lambda_critical: q must lie in (0,1)");
  double u = 1.0 - q * q;
  double hi = (1.0 - tau) * u * (1.0 + tau * q * q) / (1.0 - tau * q * q);
  double lo = 0.0;
  double h_lo = h_indicator(q, 0.0, tau);
  int doublings = 0;
  while (h_indicator(q, hi, tau) * h_lo > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > 60)
      throw SolverError("lambda_critical: no sign change within 60 doublings");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double mid = 0.5 * (lo + hi);
    if (h_indicator(q, mid, tau) * h_lo > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

ModelTriple param_to_model(double q, double lambda, double tau) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("param_to_model: q must lie in (0,1)");
  if (!(lambda >= 0.0)) throw DomainError("param_to_model: lambda must be >= 0");
  double u = 1.0 - q * q;
  double tq = 1.0 - tau * q * q;
  double d = coupled_d(q, lambda, tau);
  if (!(d > 0.0)) throw DomainError("param_to_model: common radicand is not positive");
  double c = (lambda / (q * q)) * (u * u * tq + q * q * lambda) / d;
  double a = std::sqrt((1.0 + tau) / (1.0 - tau)) *
             ((1.0 - tau) * u * (1.0 + tau * q * q) - tq * lambda) / (q * std::sqrt(d));
  double r = u * std::sqrt((1.0 - tau * tau) / d);
  return {a, c, r};
}

ExteriorMap solve_map_params(const ModelParams& p) {
  p.validate();
  SolveOutcome out = solve_regime2(p);
  switch (out.status) {
    case SolveOutcome::Status::ok:
      return out.map;
    case SolveOutcome::Status::out_of_range:
      throw PhaseError("solve_map_params: converged lambda is not below lambda_cri");
    case SolveOutcome::Status::budget:
      throw SolverError("solve_map_params: iteration budget exhausted");
    case SolveOutcome::Status::no_root:
    default:
      throw SolverError("solve_map_params: no convergence (no simply connected map)");
  }
}

ExteriorMap ellipse_map(double c, double tau) {
  ExteriorMap m;
  m.kind = ExteriorMap::Kind::Ellipse;
  m.tau = tau;
  m.scale = std::sqrt(1.0 + c);
  return m;
}

ExteriorMap disc_map(double a, double c, double tau) {
  ExteriorMap m;
  m.kind = ExteriorMap::Kind::Disc;
  m.tau = tau;
  m.center = a;
  m.radius = std::sqrt(c * (1.0 - tau * tau));
  return m;
}

namespace {

// Rational-formula evaluation without the exterior-domain guard; the Schwarz
// reflection needs psi at 1/conj(w) inside the unit disc.
Complex map_eval_raw(const ExteriorMap& m, Complex w, int order) {
  switch (m.kind) {
    case ExteriorMap::Kind::Disc:
      if (order == 0) return m.center + m.radius * w;
      if (order == 1) return Complex(m.radius);
      return 0.0;
    case ExteriorMap::Kind::Ellipse:
      if (order == 0) return m.scale * (w + m.tau / w);
      if (order == 1) return m.scale * (1.0 - m.tau / (w * w));
      return m.scale * (2.0 * m.tau / (w * w * w));
    case ExteriorMap::Kind::RegimeII: {
      Complex d = w - m.q;
      if (order == 0)
        return m.R * (w + m.tau / w - m.lambda / d - m.lambda / (m.q * (1.0 - m.tau)));
      if (order == 1) return m.R * (1.0 - m.tau / (w * w) + m.lambda / (d * d));
      return m.R * (2.0 * m.tau / (w * w * w) - 2.0 * m.lambda / (d * d * d));
    }
  }
  throw DomainError("map_eval: unknown map kind");
}

}  // namespace

Complex map_eval(const ExteriorMap& m, Complex w, int order) {
  if (order < 0 || order > 2) throw DomainError("map_eval: order must be 0, 1, or 2");
  if (std::abs(w) < 1.0 - 1e-12) throw DomainError("map_eval: |w| must be >= 1");
  return map_eval_raw(m, w, order);
}

BoundaryGeometry boundary_geometry_at(const ExteriorMap& m, Complex w) {
  if (std::fabs(std::abs(w) - 1.0) > 1e-12)
    throw DomainError("boundary_geometry_at: |w| must be 1");
  Complex d1 = map_eval(m, w, 1);
  Complex d2 = map_eval(m, w, 2);
  Complex d3 = map_d3(m, w);
  Complex pre = d2 / d1;
  BoundaryGeometry g;
  g.pre_schwarzian = pre;
  g.schwarzian = d3 / d1 - 1.5 * pre * pre;
  g.kappa = (1.0 + (w * pre).real()) / std::abs(d1);
  return g;
}

Complex map_inverse(const ExteriorMap& m, Complex z) {
  if (m.kind == ExteriorMap::Kind::Disc) return (z - m.center) / m.radius;
  double s = m.kind == ExteriorMap::Kind::Ellipse ? m.scale : m.R;
  Complex z0 = z;
  if (m.kind == ExteriorMap::Kind::RegimeII)
    z0 = z + m.R * m.lambda / (m.q * (1.0 - m.tau));  // undo the translation part
  // Joukowski inverse seed: exterior root of s w^2 - z0 w + s tau = 0.
  Complex w;
  if (m.tau == 0.0) {
    w = z0 / s;
  } else {
    Complex sq = std::sqrt(z0 * z0 - 4.0 * s * s * m.tau);
    Complex r1 = (z0 + sq) / (2.0 * s);
    Complex r2 = (z0 - sq) / (2.0 * s);
    w = std::abs(r1) >= std::abs(r2) ? r1 : r2;
  }
  auto newton = [&](Complex w0) -> std::pair<bool, Complex> {
    Complex wc = w0;
    if (std::abs(wc) < 1.0) wc /= std::abs(wc);
    for (int it = 0; it < 50; ++it) {
      Complex dp = map_eval(m, wc, 1);
      if (std::abs(dp) < 1e-14) {
        wc *= 1.0 + 1e-6;
        continue;
      }
      Complex f = map_eval(m, wc, 0) - z;
      wc -= f / dp;
      if (std::abs(wc) < 1.0 - 1e-10 && m.kind == ExteriorMap::Kind::Ellipse &&
          std::abs(wc) > 1e-14 && m.tau > 0.0)
        wc = m.tau / wc;  // the paired root of the Joukowski equation
      if (std::abs(wc) < 1.0) wc /= std::abs(wc);
      if (std::abs(map_eval(m, wc, 0) - z) < 1e-13 * std::max(1.0, std::abs(z)))
        return {true, wc};
    }
    return {false, wc};
  };
  auto [ok, wr] = newton(w);
  if (!ok) {
    // Fall back to the best node of a boundary grid.
    double best = kInf;
    Complex wbest = 1.0;
    for (int k = 0; k < 256; ++k) {
      Complex wk = std::polar(1.0 + 1e-9, 2.0 * M_PI * k / 256);
      double dist = std::abs(map_eval(m, wk, 0) - z);
      if (dist < best) {
        best = dist;
        wbest = wk;
      }
    }
    std::tie(ok, wr) = newton(wbest);
  }
  if (!ok || std::abs(wr) < 1.0 - 1e-8)
    throw SolverError("map_inverse: Newton inversion failed");
  return wr;
}

SchwarzResult schwarz_obstacle(const ExteriorMap& m, const ModelParams& p, Complex z) {
  if (m.kind == ExteriorMap::Kind::Disc)
    throw DomainError("schwarz_obstacle: outer-boundary maps only");
  // Nearest boundary point by grid scan plus ternary refinement.
  auto dist2 = [&](double theta) {
    Complex d = map_eval(m, std::polar(1.0, theta), 0) - z;
    return std::norm(d);
  };
  int n = 512;
  double best = kInf;
  int kbest = 0;
  for (int k = 0; k < n; ++k) {
    double v = dist2(2.0 * M_PI * k / n);
    if (v < best) {
      best = v;
      kbest = k;
    }
  }
  double lo = 2.0 * M_PI * (kbest - 1) / n, hi = 2.0 * M_PI * (kbest + 1) / n;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
    if (dist2(m1) < dist2(m2))
      hi = m2;
    else
      lo = m1;
  }
  double theta0 = 0.5 * (lo + hi);
  Complex z0 = map_eval(m, std::polar(1.0, theta0), 0);
  if (std::abs(z - z0) > 0.2 + 1e-9)
    throw DomainError("schwarz_obstacle: z farther than 0.2 from the outer boundary");

  auto schwarz_at = [&](Complex u, Complex seed_hint) -> std::pair<Complex, Complex> {
    Complex w = seed_hint;
    bool seeded = false;
    if (std::abs(seed_hint) >= 1.0 - 1e-10) {
      if (std::abs(w) < 1.0) w /= std::abs(w);
      for (int it = 0; it < 50; ++it) {
        Complex dp = map_eval(m, w, 1);
        if (std::abs(dp) < 1e-14) break;
        w -= (map_eval(m, w, 0) - u) / dp;
        if (std::abs(w) < 1.0) w /= std::abs(w);
        if (std::abs(map_eval(m, w, 0) - u) < 1e-13 * std::max(1.0, std::abs(u))) {
          seeded = true;
          break;
        }
      }
    }
    if (!seeded) w = map_inverse(m, u);
    Complex s = std::conj(map_eval_raw(m, 1.0 / std::conj(w), 0));
    return {s, w};
  };

  auto [s_z, w_z] = schwarz_at(z, map_inverse(m, z));
  // R(z) = (|z|^2 - |z0|^2 - 2 Re int_{z0}^{z} S(u) du) / t0, straight path.
  const GaussLegendre& gl = gauss_legendre(32);
  Kahan<double> re_int;
  Complex dz = z - z0;
  Complex w_prev = std::polar(1.0, theta0);
  for (int k = 0; k < 32; ++k) {
    double t = 0.5 * (gl.nodes[k] + 1.0);
    Complex u = z0 + t * dz;
    auto [s_u, w_u] = schwarz_at(u, w_prev);
    w_prev = w_u;
    re_int.add(0.5 * gl.weights[k] * (s_u * dz).real());
  }
  double r_value = (std::norm(z) - std::norm(z0) - 2.0 * re_int.sum) / p.t0();
  return {s_z, r_value};
}

AreaMoment droplet_area_and_m1(const ExteriorMap& m, const ModelParams& p) {
  if (m.kind != ExteriorMap::Kind::RegimeII) {
    double t0 = p.t0();
    return {t0, -p.a * p.c * t0};
  }
  const int n = 512;
  Kahan<double> area, m1;
  for (int k = 0; k < n; ++k) {
    Complex w = std::polar(1.0, 2.0 * M_PI * k / n);
    Complex z = map_eval(m, w, 0);
    Complex dp = map_eval(m, w, 1);
    Complex common = dp * w / static_cast<double>(n);
    area.add((std::conj(z) * common).real());
    m1.add((z * std::conj(z) * common).real());
  }
  return {area.sum, m1.sum};
}

PhaseLabel classify_phase(const ModelParams& p) {
  p.validate();
  PhaseLabel label;
  Regime1Margins r1 = regime1_margins(p);
  label.margins = r1.margins;
  if (r1.range1 || r1.range2) {
    label.regime = Regime::I;
    return label;
  }
  SolveOutcome out = solve_regime2(p);
  switch (out.status) {
    case SolveOutcome::Status::ok:
      label.regime = Regime::II;
      label.margins["lambda_slack"] = out.lambda_slack;
      label.margins["solve_residual"] = out.residual;
      return label;
    case SolveOutcome::Status::out_of_range:
      label.regime = Regime::III;
      label.margins["lambda_slack"] = out.lambda_slack;
      label.margins["solve_residual"] = out.residual;
      return label;
    case SolveOutcome::Status::no_root:
      label.regime = Regime::III;
      label.margins["solve_residual"] =
          std::isfinite(out.residual) ? out.residual : 1e99;
      return label;
    case SolveOutcome::Status::budget:
    default:
      throw SolverError("classify_phase: phase could not be resolved within budget");
  }
}

}  // namespace droplet
