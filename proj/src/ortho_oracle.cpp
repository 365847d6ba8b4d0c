#include "droplet/ortho_oracle.hpp"

#include <cmath>
#include <complex>

#include "droplet/errors.hpp"
#include "droplet/quadrature.hpp"
#include "droplet/specfun.hpp"

namespace droplet {

namespace {

struct WeightSpec {
  double alpha, beta;    // exponent -N (alpha x^2 + beta y^2)
  double charge_center;  // on the real axis
  double box_x, box_y;   // half-widths of the truncation box
};

bool power_of_two_in_range(int n) { return n >= 64 && n <= 4096 && (n & (n - 1)) == 0; }

void check_spec(const QuadratureSpec& q) {
  if (!power_of_two_in_range(q.radial_nodes) || !power_of_two_in_range(q.angular_nodes))
    throw DomainError("node counts must be powers of two in [64, 4096]");
  if (!(q.trunc_multiplier >= 1.0 && q.trunc_multiplier <= 10.0))
    throw DomainError("truncation multiplier must lie in [1, 10]");
  if (!(q.target_tolerance > 0.0 && q.target_tolerance <= 1e-2))
    throw DomainError("target tolerance must lie in (0, 1e-2]");
}

long charge_exponent(const ModelParams& p, int N) {
  const double cn = p.c * N;
  const double m = std::rint(cn);
  if (std::abs(cn - m) > 1e-9)
    throw DomainError("charge exponent cN must be a nonnegative integer");
  return static_cast<long>(m);
}

double ipow(double b, long e) {
  double r = 1.0, acc = b;
  for (long k = e; k > 0; k >>= 1) {
    if (k & 1) r *= acc;
    acc *= acc;
  }
  return r;
}

// Single tensor rule. Uses the y -> -y reflection symmetry of the weight:
// node pairs contribute 2 Re(z^j conj(z)^k), so the result is exactly real
// and exactly Hermitian.
Eigen::MatrixXd tensor_moments(const WeightSpec& ws, int N, int M, long cn, int nx,
                               int ny) {
  const GaussLegendre& glx = gauss_legendre(nx);
  const GaussLegendre& gly = gauss_legendre(ny);
  std::vector<double> xs(nx), wx(nx);
  for (int i = 0; i < nx / 2; ++i) {
    const double x = ws.box_x * glx.nodes[nx / 2 + i];
    const double w = ws.box_x * glx.weights[nx / 2 + i] * std::exp(-N * ws.alpha * x * x);
    xs[nx / 2 + i] = x;
    xs[nx / 2 - 1 - i] = -x;
    wx[nx / 2 + i] = w;
    wx[nx / 2 - 1 - i] = w;
  }
  std::vector<double> ys(ny / 2), wy(ny / 2);
  for (int i = 0; i < ny / 2; ++i) {
    const double y = ws.box_y * gly.nodes[ny / 2 + i];
    ys[i] = y;
    wy[i] = 2.0 * ws.box_y * gly.weights[ny / 2 + i] * std::exp(-N * ws.beta * y * y);
  }
  std::vector<Kahan<double>> acc(static_cast<size_t>(M) * M);
  std::vector<Complex> zp(M);
  for (int i = 0; i < nx; ++i) {
    const double x = xs[i];
    const double dx = x - ws.charge_center;
    for (int j = 0; j < ny / 2; ++j) {
      const double y = ys[j];
      double wt = wx[i] * wy[j] / M_PI;
      if (cn > 0) wt *= ipow(dx * dx + y * y, cn);
      const Complex z(x, y);
      zp[0] = Complex(1.0, 0.0);
      for (int m = 1; m < M; ++m) zp[m] = zp[m - 1] * z;
      for (int r = 0; r < M; ++r)
        for (int s = 0; s < M; ++s) {
          const double re = zp[r].real() * zp[s].real() + zp[r].imag() * zp[s].imag();
          acc[static_cast<size_t>(r) * M + s].add(wt * re);
        }
    }
  }
  Eigen::MatrixXd g(M, M);
  for (int r = 0; r < M; ++r)
    for (int s = 0; s < M; ++s) g(r, s) = acc[static_cast<size_t>(r) * M + s].sum;
  return g;
}

Eigen::MatrixXcd moments_with_doubling(const WeightSpec& ws, int N, int M, long cn,
                                       const QuadratureSpec& q, double* achieved) {
  const Eigen::MatrixXd base = tensor_moments(ws, N, M, cn, q.radial_nodes, q.angular_nodes);
  const Eigen::MatrixXd fine =
      tensor_moments(ws, N, M, cn, 2 * q.radial_nodes, 2 * q.angular_nodes);
  double worst = 0.0;
  for (int r = 0; r < M; ++r)
    for (int s = 0; s < M; ++s) {
      const double scale = std::sqrt(std::max(fine(r, r) * fine(s, s), 1e-300));
      worst = std::max(worst, std::abs(fine(r, s) - base(r, s)) / scale);
    }
  if (achieved != nullptr) *achieved = worst;
  if (worst > q.target_tolerance)
    throw ToleranceError("moment quadrature did not reach the target tolerance");
  return fine.cast<Complex>();
}

void check_sizes(const ModelParams& p, int N, int M) {
  p.validate();
  if (N < 1 || N > 16) throw DomainError("oracle matrix size must lie in [1, 16]");
  if (M < 1 || M > N + 2) throw DomainError("moment order must lie in [1, N+2]");
}

WeightSpec standard_weight(const ModelParams& p, int N, const QuadratureSpec& q) {
  const double semi_x = (1.0 + p.tau) * std::sqrt(1.0 + p.c);
  const double semi_y = (1.0 - p.tau) * std::sqrt(1.0 + p.c);
  const double pad = std::sqrt(40.0 / N);
  WeightSpec ws;
  ws.alpha = 1.0 / (1.0 + p.tau);
  ws.beta = 1.0 / (1.0 - p.tau);
  ws.charge_center = p.a;
  ws.box_x = q.trunc_multiplier * std::max(semi_x, p.a) + pad;
  ws.box_y = q.trunc_multiplier * semi_y + pad;
  return ws;
}

}  // namespace

Eigen::MatrixXcd moment_matrix(const ModelParams& p, int N, int M,
                               const QuadratureSpec& q, double* achieved) {
  check_sizes(p, N, M);
  check_spec(q);
  const long cn = charge_exponent(p, N);
  return moments_with_doubling(standard_weight(p, N, q), N, M, cn, q, achieved);
}

Eigen::MatrixXcd moment_matrix_plain_weight(const ModelParams& p, int N, int M,
                                            const QuadratureSpec& q, double* achieved) {
  check_sizes(p, N, M);
  check_spec(q);
  const long cn = charge_exponent(p, N);
  const double root_t0 = std::sqrt(1.0 - p.tau * p.tau);
  WeightSpec ws = standard_weight(p, N, q);
  ws.alpha = 1.0 - p.tau;
  ws.beta = 1.0 + p.tau;
  ws.charge_center = p.a / root_t0;
  ws.box_x /= root_t0;
  ws.box_y /= root_t0;
  return moments_with_doubling(ws, N, M, cn, q, achieved);
}

OrthoSummary ortho_from_moments(const Eigen::MatrixXcd& gram, int N) {
  const int M = static_cast<int>(gram.rows());
  if (gram.cols() != M || M < 1) throw DomainError("Gram matrix must be square");
  if (N < 1 || M < N) throw DomainError("Gram matrix is too small for the requested size");

  Eigen::MatrixXd g(M, M);
  for (int r = 0; r < M; ++r)
    for (int s = 0; s < M; ++s) {
      const Complex v = gram(r, s);
      const Complex vt = std::conj(gram(s, r));
      const double scale =
          std::sqrt(std::max(gram(r, r).real() * gram(s, s).real(), 1e-300));
      if (std::abs(v - vt) > 1e-12 * scale)
        throw ToleranceError("Gram matrix is not Hermitian");
      if (std::abs(v.imag()) > 1e-12 * scale)
        throw ToleranceError("Gram matrix is not real");
      g(r, s) = v.real();
    }

  std::vector<double> colscale(M);
  for (int j = 0; j < M; ++j) {
    if (!(g(j, j) > 0.0)) throw SolverError("Gram diagonal is not positive");
    colscale[j] = 1.0 / std::sqrt(g(j, j));
  }
  Eigen::MatrixXd gs(M, M);
  for (int r = 0; r < M; ++r)
    for (int s = 0; s < M; ++s) gs(r, s) = g(r, s) * colscale[r] * colscale[s];

  // Unpivoted LDL of the unit-diagonal scaled Gram matrix.
  Eigen::MatrixXd lower = Eigen::MatrixXd::Identity(M, M);
  std::vector<double> pivot(M);
  for (int j = 0; j < M; ++j) {
    Kahan<double> dj;
    dj.add(gs(j, j));
    for (int k = 0; k < j; ++k) dj.add(-lower(j, k) * lower(j, k) * pivot[k]);
    if (!(dj.sum > 0.0))
      throw SolverError("non-positive pivot in the Gram factorization");
    pivot[j] = dj.sum;
    for (int i = j + 1; i < M; ++i) {
      Kahan<double> lij;
      lij.add(gs(i, j));
      for (int k = 0; k < j; ++k) lij.add(-lower(i, k) * lower(j, k) * pivot[k]);
      lower(i, j) = lij.sum / pivot[j];
    }
  }

  // Inverse of the unit lower factor gives the monic polynomial coefficients.
  Eigen::MatrixXd tinv = Eigen::MatrixXd::Identity(M, M);
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < i; ++j) {
      Kahan<double> s;
      for (int k = j; k < i; ++k) s.add(-lower(i, k) * tinv(k, j));
      tinv(i, j) = s.sum;
    }

  OrthoSummary out;
  out.N = N;
  out.poly_coeffs = Eigen::MatrixXd::Zero(M, M);
  for (int n = 0; n < M; ++n)
    for (int m = 0; m <= n; ++m)
      out.poly_coeffs(n, m) = tinv(n, m) * colscale[m] / colscale[n];
  out.log_h.resize(N);
  Kahan<double> lz;
  lz.add(log_gamma(N + 1.0));
  for (int j = 0; j < N; ++j) {
    out.log_h[j] = std::log(pivot[j]) + std::log(g(j, j));
    lz.add(out.log_h[j]);
  }
  out.log_Z = lz.sum;
  out.A_coeffs.assign(M, 0.0);
  out.B_coeffs.assign(M, 0.0);
  for (int n = 1; n < M; ++n) out.A_coeffs[n] = out.poly_coeffs(n, n - 1);
  for (int n = 2; n < M; ++n) out.B_coeffs[n] = out.poly_coeffs(n, n - 2);
  return out;
}

OrthoSummary oracle_summary(const ModelParams& p, int N, const QuadratureSpec& q) {
  double achieved = 0.0;
  OrthoSummary out = ortho_from_moments(moment_matrix(p, N, N + 2, q, &achieved), N);
  out.achieved_tolerance = achieved;
  return out;
}

double deformation_residual_a(const ModelParams& p, int N, const QuadratureSpec& q,
                              double h_step) {
  if (!(h_step > 0.0 && h_step <= 0.1)) throw DomainError("step must lie in (0, 0.1]");
  if (p.a < h_step) throw DomainError("step exceeds the distance to a = 0");
  ModelParams lo = p, hi = p;
  lo.a -= h_step;
  hi.a += h_step;
  const double zlo = ortho_from_moments(moment_matrix(lo, N, N, q), N).log_Z;
  const double zhi = ortho_from_moments(moment_matrix(hi, N, N, q), N).log_Z;
  const OrthoSummary mid = ortho_from_moments(moment_matrix(p, N, N + 1, q), N);
  const double fd = (zhi - zlo) / (2.0 * h_step);
  const double rhs = (2.0 * N / (1.0 + p.tau)) * mid.A_coeffs[N];
  return std::abs(fd - rhs);
}

double deformation_residual_tau(const ModelParams& p, int N, const QuadratureSpec& q,
                                double h_step) {
  if (!(h_step > 0.0 && h_step <= 0.1)) throw DomainError("step must lie in (0, 0.1]");
  if (p.tau < h_step || p.tau + h_step >= 1.0)
    throw DomainError("step exceeds the distance to the tau range boundary");
  ModelParams lo = p, hi = p;
  lo.tau -= h_step;
  hi.tau += h_step;
  const double zlo = ortho_from_moments(moment_matrix(lo, N, N, q), N).log_Z;
  const double zhi = ortho_from_moments(moment_matrix(hi, N, N, q), N).log_Z;
  const OrthoSummary mid = ortho_from_moments(moment_matrix(p, N, N + 2, q), N);
  const double fd = (zhi - zlo) / (2.0 * h_step);
  const double ann = mid.A_coeffs[N], an1 = mid.A_coeffs[N + 1];
  const double bnn = mid.B_coeffs[N], bn1 = mid.B_coeffs[N + 1];
  const double t0 = 1.0 - p.tau * p.tau;
  const double rhs = -(static_cast<double>(N) / t0) *
                     (p.tau * (1.0 + 2.0 * p.c) * N + p.tau + (bnn + bn1 - ann * an1) -
                      (2.0 * p.tau * p.a / (1.0 + p.tau)) * ann);
  return std::abs(fd - rhs);
}

double scaling_identity_residual(const ModelParams& p, int n, int N,
                                 const QuadratureSpec& q) {
  if (n < 1 || n > N + 1) throw DomainError("degree must lie in [1, N+1]");
  const OrthoSummary lhs = ortho_from_moments(moment_matrix(p, N, n + 1, q), n);
  ModelParams ps = p;
  const double ratio = static_cast<double>(N) / n;
  ps.a = p.a * std::sqrt(ratio);
  ps.c = p.c * ratio;
  const OrthoSummary rhs = ortho_from_moments(moment_matrix(ps, n, n + 1, q), n);
  double worst = 0.0;
  for (int m = 0; m <= n; ++m) {
    const double scaled =
        std::pow(static_cast<double>(n) / N, 0.5 * (n - m)) * rhs.poly_coeffs(n, m);
    worst = std::max(worst, std::abs(lhs.poly_coeffs(n, m) - scaled));
  }
  return worst;
}

PredictedCoefficients predicted_coefficients_regime1(const ModelParams& p, int N) {
  p.validate();
  if (N < 1) throw DomainError("matrix size must be positive");
  if (classify_phase(p).regime != Regime::I)
    throw PhaseError("coefficient prediction requires the annular regime");
  const double a = p.a, c = p.c, tau = p.tau;
  const double dn = static_cast<double>(N);
  PredictedCoefficients out;
  out.a_nn = a * c * dn;
  out.a_n1n = a * c * dn;
  const double quad = 0.5 * c * c * a * a * dn * dn +
                      (0.5 * c * a * a - 0.5 * tau * (1.0 + c) * (1.0 + c)) * dn;
  out.b_nn = quad + 0.5 * tau * (1.0 + c);
  out.b_n1n = quad - 0.5 * tau * (1.0 + c);
  return out;
}

double f1_leading_coefficient(const ExteriorMap& m, const ModelParams& p, int nodes) {
  if (m.kind == ExteriorMap::Kind::Disc)
    throw DomainError("leading coefficient asymptotics require an exterior map");
  if (nodes < 8) throw DomainError("too few boundary nodes");
  const double lead = (m.kind == ExteriorMap::Kind::Ellipse) ? m.scale : m.R;
  Kahan<double> sum_re, sum_im;
  for (int k = 0; k < nodes; ++k) {
    const Complex w = std::polar(1.0, 2.0 * M_PI * k / nodes);
    const BoundaryGeometry g = boundary_geometry_at(m, w);
    const double dpsi2 = std::norm(map_eval(m, w, 1));
    const double f = (w * w * g.schwarzian).real() + dpsi2 * g.kappa * g.kappa;
    const Complex term = f * w / dpsi2;
    sum_re.add(term.real());
    sum_im.add(term.imag());
  }
  const double t0 = 1.0 - p.tau * p.tau;
  const double factor = t0 * lead / (12.0 * nodes);
  if (std::abs(factor * sum_im.sum) > 1e-12)
    throw ToleranceError("leading coefficient integral is not real");
  return factor * sum_re.sum;
}

double predicted_a_regime2(const ModelParams& p, const ExteriorMap& m, int N) {
  if (N < 1) throw DomainError("matrix size must be positive");
  const AreaMoment am = droplet_area_and_m1(m, p);
  const double t0 = 1.0 - p.tau * p.tau;
  return -(am.m1 / t0) * N + f1_leading_coefficient(m, p) / N;
}

}  // namespace droplet
