#include "droplet/specfun.hpp"

#include <cmath>
#include <stdexcept>

#include "droplet/errors.hpp"

namespace droplet {

namespace {

// Compensated (Kahan) accumulator.
template <typename T>
struct Kahan {
  T sum = 0;
  T comp = 0;
  void add(T x) {
    T y = x - comp;
    T t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

constexpr long double kLog2PiHalfL = 0.918938533204672741780329736405617639861397473637783412817L;
constexpr long double kZetaPrimeMinusOneL = -0.165421143700450929213919660242780642764036380335237122307L;

// ln Gamma for integer n via direct log summation, long double internally.
long double log_gamma_integer(long n) {
  Kahan<long double> acc;
  for (long j = 2; j < n; ++j) acc.add(std::log(static_cast<long double>(j)));
  return acc.sum;
}

// Lanczos g=7, 9-term coefficient set.
double log_gamma_lanczos(double x) {
  static const double g = 7.0;
  static const double c[9] = {
      0.99999999999980993,   676.5203681218851,     -1259.1392167224028,
      771.32342877765313,    -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,  9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: ln Gamma(x) = ln(pi / sin(pi x)) - ln Gamma(1 - x).
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma_lanczos(1.0 - x);
  }
  double z = x - 1.0;
  double a = c[0];
  for (int i = 1; i < 9; ++i) a += c[i] / (z + i);
  double t = z + g + 0.5;
  return kHalfLog2Pi + (z + 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double AsymptoticSeries::evaluate(double n) const {
  Kahan<double> acc;
  for (const auto& [e, coeff] : terms) acc.add(coeff * std::pow(n, e));
  return acc.sum;
}

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  double r = std::rint(x);
  if (r == x && x <= 1e4) return static_cast<double>(log_gamma_integer(static_cast<long>(r)));
  return log_gamma_lanczos(x);
}

Rational bernoulli_number(int k) {
  if (k < 0) throw DomainError("bernoulli_number: negative index");
  if (k > 64) throw DomainError("bernoulli_number: index above supported range (64)");
  using boost::multiprecision::cpp_int;
  static const std::vector<Rational> table = [] {
    std::vector<Rational> b(65);
    // Binomial table C(k+1, j) for k up to 64.
    std::vector<std::vector<cpp_int>> ch(66);
    for (int n = 0; n <= 65; ++n) {
      ch[n].resize(n + 1);
      ch[n][0] = 1;
      ch[n][n] = 1;
      for (int j = 1; j < n; ++j) ch[n][j] = ch[n - 1][j - 1] + ch[n - 1][j];
    }
    b[0] = 1;
    for (int k2 = 1; k2 <= 64; ++k2) {
      Rational s = 0;
      for (int j = 0; j < k2; ++j) s += Rational(ch[k2 + 1][j]) * b[j];
      b[k2] = -s / Rational(ch[k2 + 1][k2]);
    }
    return b;
  }();
  return table[k];
}

long double bernoulli_number_ld(int k) {
  Rational b = bernoulli_number(k);
  return boost::multiprecision::numerator(b).convert_to<long double>() /
         boost::multiprecision::denominator(b).convert_to<long double>();
}

double log_barnes_g_exact(long n) {
  if (n < 1) throw DomainError("log_barnes_g_exact: argument must be >= 1");
  if (n > 100000) throw DomainError("log_barnes_g_exact: argument above supported range (1e5)");
  // ln G(n) = sum_{j=1}^{n-2} ln Gamma(j+1); ln Gamma accumulated incrementally.
  Kahan<long double> lgamma_acc;  // ln Gamma(j+1) after adding ln 2 .. ln j
  Kahan<long double> g_acc;
  for (long j = 1; j <= n - 2; ++j) {
    if (j >= 2) lgamma_acc.add(std::log(static_cast<long double>(j)));
    g_acc.add(lgamma_acc.sum);
  }
  return static_cast<double>(g_acc.sum);
}

double log_barnes_g_asymptotic(double z, int k0) {
  if (!(z >= 2.0)) throw DomainError("log_barnes_g_asymptotic: requires z >= 2");
  if (k0 < 0 || k0 > 10) throw DomainError("log_barnes_g_asymptotic: k0 out of [0,10]");
  long double zl = z;
  long double lz = std::log(zl);
  long double v = 0.5L * zl * zl * lz - 0.75L * zl * zl + zl * kLog2PiHalfL -
                  lz / 12.0L + kZetaPrimeMinusOneL;
  Kahan<long double> tail;
  long double z2 = zl * zl;
  long double zpow = z2;
  for (int k = 1; k <= k0; ++k) {
    tail.add(bernoulli_number_ld(2 * k + 2) / (4.0L * k * (k + 1) * zpow));
    zpow *= z2;
  }
  return static_cast<double>(v + tail.sum);
}

}  // namespace droplet
