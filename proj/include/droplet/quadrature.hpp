#pragma once

#include <vector>

namespace droplet {

// Compensated (Kahan) accumulator; deterministic for a fixed add order.
template <typename T = double>
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

struct GaussLegendre {
  std::vector<double> nodes;    // ascending in (-1, 1)
  std::vector<double> weights;  // positive, sum to 2
};

// Gauss-Legendre rule on [-1, 1], cached per n. n >= 1.
const GaussLegendre& gauss_legendre(int n);

}  // namespace droplet
