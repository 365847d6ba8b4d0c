#include "droplet/expansion.hpp"

#include <cmath>

#include "droplet/actions.hpp"
#include "droplet/errors.hpp"
#include "droplet/quadrature.hpp"
#include "droplet/specfun.hpp"

namespace droplet {

namespace {

constexpr double kNearCriticalMargin = 1e-6;

double energy_regime1(const ModelParams& p) {
  const double c = p.c, tau = p.tau;
  double v = 0.75 + 1.5 * c - c * p.a * p.a / (1.0 + tau) -
             0.5 * (1.0 + c) * (1.0 + c) * std::log1p(c);
  if (c > 0.0) v += 0.5 * c * c * std::log(c * (1.0 - tau * tau));
  return v;
}

double energy_regime2(const ModelParams& p, const ExteriorMap& m) {
  const double c = p.c, tau = p.tau, a = p.a;
  const double q = m.q, lam = m.lambda, R = m.R;
  const double u = 1.0 - q * q;
  const double t0 = 1.0 - tau * tau;
  // Quartic-in-q prefactors of the area-integral cross terms, grouped so the
  // lambda = 0 limit is explicit.
  const double pplus = 2.0 - 3.0 * q * q - 3.0 * tau * q * q + 2.0 * tau * q * q * q * q;
  const double pminus = 2.0 - 3.0 * q * q + 3.0 * tau * q * q - 2.0 * tau * q * q * q * q;
  const double T = (R * R * R * lam * a / (2.0 * t0 * t0 * q * q * q)) *
                   ((1.0 - tau) * pplus - pminus * lam / u);
  double v = 0.75 + 1.5 * c - c * a * a / (1.0 + tau) + T -
             (1.0 + c) * (1.0 + c) * std::log(R);
  if (c > 0.0) {
    v += 2.0 * c * (1.0 + c) * std::log(q) +
         c * c * std::log(c * t0 * u / (R * lam));
  }
  return v;
}

void near_critical_guard_regime1(const PhaseLabel& phase) {
  // Smallest slack of the active holding range.
  double slack = -1.0;
  auto get = [&](const char* key) {
    auto it = phase.margins.find(key);
    return it == phase.margins.end() ? -1.0 : it->second;
  };
  const double r1c = get("range1_c"), r1a = get("range1_a");
  const double r2c = get("range2_c"), r2lo = get("range2_a_low"), r2hi = get("range2_a_high");
  const double ra = get("range_a");
  if (ra >= 0.0) slack = ra;
  if (r1c >= 0.0 && r1a >= 0.0) slack = std::max(slack, std::min(r1c, r1a));
  if (r2c >= 0.0 && r2lo >= 0.0 && r2hi >= 0.0)
    slack = std::max(slack, std::min({r2c, r2lo, r2hi}));
  if (slack >= 0.0 && slack < kNearCriticalMargin)
    throw NearCriticalError("parameters are within 1e-6 of the phase boundary");
}

}  // namespace

double energy(const ModelParams& p, const PhaseLabel& phase, const ExteriorMap& m) {
  p.validate();
  switch (phase.regime) {
    case Regime::I:
      return energy_regime1(p);
    case Regime::II:
      return energy_regime2(p, m);
    default:
      throw PhaseError("energy formula requires a connected droplet");
  }
}

double energy(const ModelParams& p) {
  p.validate();
  if (p.c == 0.0) {
    // lambda = 0, R = 1 reduction of the simply connected formula.
    return 0.75;
  }
  const PhaseLabel phase = classify_phase(p);
  if (phase.regime == Regime::III)
    throw PhaseError("energy formula requires a connected droplet");
  if (phase.regime == Regime::I) return energy_regime1(p);
  return energy_regime2(p, solve_map_params(p));
}

double entropy_coefficient(const ModelParams& p) {
  p.validate();
  return kHalfLog2Pi - 1.0 + 0.5 * std::log1p(-p.tau * p.tau);
}

ExpansionReport expansion_coefficients(const ModelParams& p, int k0) {
  p.validate();
  if (k0 < 0) throw DomainError("tail order must be nonnegative");
  ExpansionReport rep;
  rep.k0 = k0;
  rep.C2 = 0.5;
  rep.C3 = entropy_coefficient(p);
  const double log_t0 = std::log1p(-p.tau * p.tau);

  if (p.c == 0.0) {
    rep.chi = 1;
    rep.C1 = -0.75;
    rep.C4 = 5.0 / 12.0;
    rep.liouville = -2.0 * log_t0;
    rep.C5 = kZetaPrimeMinusOne + kHalfLog2Pi + rep.liouville / 24.0 +
             boundary_entropy_term(p, 1);
    return rep;
  }

  const PhaseLabel phase = classify_phase(p);
  if (phase.regime == Regime::III)
    throw PhaseError("expansion requires a connected droplet");

  if (phase.regime == Regime::I) {
    near_critical_guard_regime1(phase);
    rep.chi = 0;
    rep.C1 = -energy_regime1(p);
    rep.C4 = 0.5;
    rep.liouville = 2.0 * std::log(p.c / (1.0 + p.c));
    rep.C5 = kHalfLog2Pi + rep.liouville / 24.0 + boundary_entropy_term(p, 0);
    for (int k = 1; k <= k0; ++k) {
      double ek;
      if (k % 2 == 1) {
        ek = static_cast<double>(bernoulli_number_ld(k + 1) /
                                 (static_cast<long double>(k) * (k + 1)));
      } else {
        const long double w =
            std::pow(1.0L + p.c, -static_cast<long double>(k)) -
            std::pow(static_cast<long double>(p.c), -static_cast<long double>(k));
        ek = static_cast<double>(bernoulli_number_ld(k + 2) /
                                 (static_cast<long double>(k) * (k + 2)) * w);
      }
      rep.tail.emplace_back(k, ek);
    }
    return rep;
  }

  const ExteriorMap m = solve_map_params(p);
  if (1.0 - m.q < kNearCriticalMargin)
    throw NearCriticalError("conformal radius of the reflected point is nearly critical");
  const double lam_cri = lambda_critical(m.q, m.tau);
  if (lam_cri - m.lambda < kNearCriticalMargin)
    throw NearCriticalError("droplet is within 1e-6 of splitting");
  rep.chi = 1;
  rep.C1 = -energy_regime2(p, m);
  rep.C4 = 5.0 / 12.0;
  rep.liouville = liouville_explicit(p, phase, m);
  rep.C5 = kZetaPrimeMinusOne + kHalfLog2Pi + rep.liouville / 24.0 +
           boundary_entropy_term(p, 1);
  return rep;
}

double log_z_induced_gamma_product(int N, double c) {
  if (N < 1) throw DomainError("matrix size must be positive");
  if (N > 10000) throw DomainError("reference value would overflow the budget");
  if (c < 0.0) throw DomainError("charge must be nonnegative");
  const double cn = c * N;
  const double logn = std::log(static_cast<double>(N));
  Kahan<double> acc;
  acc.add(log_gamma(N + 1.0));
  for (int j = 0; j < N; ++j) {
    acc.add(log_gamma(j + 1.0 + cn));
    acc.add(-(j + 1.0 + cn) * logn);
  }
  return acc.sum;
}

double log_z_reference(ReferenceKind kind, int N, const ModelParams& p) {
  if (N < 1) throw DomainError("matrix size must be positive");
  if (N > 10000) throw DomainError("reference value would overflow the budget");
  const double logn = std::log(static_cast<double>(N));
  if (kind == ReferenceKind::elliptic) {
    return 0.5 * N * std::log1p(-p.tau * p.tau) + log_barnes_g_exact(N + 2) -
           (0.5 * static_cast<double>(N) * N + 0.5 * N) * logn;
  }
  const double cn = p.c * N;
  const double m = std::rint(cn);
  if (std::abs(cn - m) <= 1e-9 && m >= 0.0) {
    const long mm = static_cast<long>(m);
    return log_gamma(N + 1.0) + log_barnes_g_exact(N + mm + 1) -
           log_barnes_g_exact(mm + 1) -
           ((p.c + 0.5) * N * static_cast<double>(N) + 0.5 * N) * logn;
  }
  return log_z_induced_gamma_product(N, p.c);
}

double log_z_predicted(const ModelParams& p, int N, int k0) {
  if (N < 1) throw DomainError("matrix size must be positive");
  const ExpansionReport rep = expansion_coefficients(p, k0);
  const double dn = static_cast<double>(N);
  const double logn = std::log(dn);
  Kahan<double> acc;
  acc.add(rep.C1 * dn * dn);
  acc.add(rep.C2 * dn * logn);
  acc.add(rep.C3 * dn);
  acc.add(rep.C4 * logn);
  acc.add(rep.C5);
  for (const auto& [k, ek] : rep.tail) acc.add(ek * std::pow(dn, -k));
  return acc.sum;
}

double char_poly_moment_log(const ModelParams& p, int N, int k0) {
  p.validate();
  if (p.c == 0.0) return 0.0;
  return log_z_predicted(p, N, k0) - log_z_reference(ReferenceKind::elliptic, N, p);
}

}  // namespace droplet
