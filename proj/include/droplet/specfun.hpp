#pragma once

#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace droplet {

using Rational = boost::multiprecision::cpp_rational;

// zeta'(-1) = 1/12 - log A (Glaisher), to 30+ digits.
inline constexpr double kZetaPrimeMinusOne =
    -0.16542114370045092921391966024278064276403638033L;

// log(2*pi)/2.
inline constexpr double kHalfLog2Pi =
    0.91893853320467274178032973640561763986139747363778L;

// Finite power sum in N: sum of coeff * N^exponent, exponents strictly
// decreasing. truncation_order records the k0 the series was built with.
struct AsymptoticSeries {
  std::vector<std::pair<double, double>> terms;  // (exponent, coefficient)
  int truncation_order = 0;

  double evaluate(double n) const;
};

// ln Gamma(x), x > 0. Exact summation path for integer x <= 1e4,
// Lanczos rational approximation otherwise (>= 1e-13 relative).
double log_gamma(double x);

// Exact Bernoulli number B_k, 0 <= k <= 64, generating-function recursion.
Rational bernoulli_number(int k);

// B_k as long double (for tail coefficients).
long double bernoulli_number_ld(int k);

// ln G(n) for integer n >= 1 via ln G(n) = sum_{j=1}^{n-2} ln Gamma(j+1),
// compensated summation. Supported up to n = 1e5.
double log_barnes_g_exact(long n);

// Large-z expansion of ln G(z+1) truncated after the B_{2k+2}/(4k(k+1) z^{2k})
// term with k <= k0. Requires z >= 2 and 0 <= k0 <= 10.
double log_barnes_g_asymptotic(double z, int k0);

}  // namespace droplet
