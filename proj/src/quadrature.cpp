#include "droplet/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "droplet/errors.hpp"

namespace droplet {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre(int n, long double x, long double& p, long double& dp) {
  long double p0 = 1.0L, p1 = x;
  for (int k = 2; k <= n; ++k) {
    long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = (n == 0) ? p0 : p1;
  dp = (n == 0) ? 0.0L : n * (x * p1 - p0) / (x * x - 1.0L);
}

GaussLegendre build(int n) {
  GaussLegendre g;
  g.nodes.resize(n);
  g.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    long double x = std::cos(M_PIl * (i + 0.75L) / (n + 0.5L));
    long double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(n, x, p, dp);
      long double dx = p / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-19L) break;
    }
    legendre(n, x, p, dp);
    g.nodes[n - 1 - i] = static_cast<double>(x);
    g.weights[n - 1 - i] = static_cast<double>(2.0L / ((1.0L - x * x) * dp * dp));
  }
  return g;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: n must be >= 1");
  static std::map<int, GaussLegendre> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build(n)).first;
  return it->second;
}

}  // namespace droplet
