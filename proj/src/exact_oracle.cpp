#include "faultsearch/exact_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace faultsearch {

const char* to_string(Route r) {
  switch (r) {
    case Route::ClosedForm: return "closed_form";
    case Route::SystemSolve: return "system_solve";
    case Route::BlockInverse: return "block_inverse";
  }
  return "?";
}

double int_pow(double x, int k) {
  if (k < 0) throw std::invalid_argument("int_pow: negative exponent");
  const bool negative = x < 0.0 && (k % 2 == 1);
  const double mag = std::pow(std::abs(x), static_cast<double>(k));
  return negative ? -mag : mag;
}

namespace {

void check_zigzag_domain(const char* who, double g, double p) {
  if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument(std::string(who) + ": requires 0 < p < 1/2");
  if (!(g >= 2.0)) throw std::invalid_argument(std::string(who) + ": requires g >= 2");
  if (!(g * p < 1.0)) throw std::invalid_argument(std::string(who) + ": requires g < 1/p");
}

void check_interval(const char* who, double g, int t, double n) {
  if (t < 0) throw std::invalid_argument(std::string(who) + ": requires t >= 0");
  const double lo = std::pow(g, t);
  const double hi = std::pow(g, t + 1);
  const double slack = 1e-12 * hi;
  if (!(n > lo - slack && n <= hi + slack)) {
    throw std::invalid_argument(std::string(who) + ": n must lie in (g^t, g^(t+1)]");
  }
}

void check_randomized(const char* who, double g, double p, int t, double delta, double n) {
  check_zigzag_domain(who, g, p);
  if (t < 0) throw std::invalid_argument(std::string(who) + ": requires t >= 0");
  if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument(std::string(who) + ": delta in (0,1]");
  const double expect = std::pow(g, t + delta);
  if (std::abs(n - expect) > 1e-9 * expect) {
    throw std::invalid_argument(std::string(who) + ": n must equal g^(t+delta)");
  }
}

ExactExpectation make(double value, Route route, double p, double g, int t, double delta, double n) {
  return ExactExpectation{value, route, p, g, t, delta, n};
}

}  // namespace

Eigen::MatrixXd fault_matrix(double p, int t) {
  const int m = t + 1;
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) P(i, j) = -(1.0 - p) * int_pow(p, j - i - 1);
  }
  return P;
}

SystemMatrices assemble_system(double g, double p, int levels, double scale, double n) {
  if (levels < 0) throw std::invalid_argument("assemble_system: levels must be >= 0");
  SystemMatrices s;
  s.levels = levels;
  s.p = p;
  s.g = g;
  s.scale = scale;
  s.n = n;
  const int m = levels;
  s.P = m > 0 ? fault_matrix(p, m - 1) : Eigen::MatrixXd(0, 0);
  s.A = Eigen::MatrixXd::Identity(2 * m, 2 * m);
  if (m > 0) {
    s.A.topRightCorner(m, m) = s.P;
    s.A.bottomLeftCorner(m, m) = s.P;
  }
  s.alpha.resize(m);
  s.beta.resize(m);
  const double pg = p * g;
  for (int k = 0; k < m; ++k) {
    const int rest = m - 1 - k;
    const double sweep = 2.0 * (1.0 - p) * scale * std::pow(g, k) / (1.0 - pg);
    s.alpha(k) = sweep * (1.0 + (1.0 - 2.0 * p) * g * int_pow(pg, rest)) + n * int_pow(p, rest);
    s.beta(k) = sweep + n * int_pow(p, rest);
  }
  return s;
}

SystemSolution solve_system(const SystemMatrices& sys) {
  SystemSolution sol;
  const int m = sys.levels;
  sol.L_boundary =
      2.0 * (1.0 - sys.p) * sys.scale * std::pow(sys.g, m) / (1.0 - sys.g * sys.p) + sys.n;
  if (m == 0) {
    sol.R0 = sys.n;
    sol.L0 = sol.L_boundary;
    return sol;
  }
  Eigen::VectorXd b(2 * m);
  b << sys.alpha, sys.beta;
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys.A);
  if (std::abs(lu.determinant()) < 1e-300) throw std::logic_error("solve_system: singular system");
  const Eigen::VectorXd x = lu.solve(b);
  sol.R.assign(x.data(), x.data() + m);
  sol.L.assign(x.data() + m, x.data() + 2 * m);
  sol.R0 = sol.R.front();
  sol.L0 = sol.L.front();
  return sol;
}

double system_residual(const SystemMatrices& sys, const SystemSolution& sol) {
  const int m = sys.levels;
  if (m == 0) return 0.0;
  double worst = 0.0;
  const double q = 1.0 - sys.p;
  for (int k = 0; k < m; ++k) {
    double sum_l = 0.0;
    double sum_r = 0.0;
    for (int i = 0; k + 1 + i < m; ++i) {
      sum_l += int_pow(sys.p, i) * sol.L[k + 1 + i];
      sum_r += int_pow(sys.p, i) * sol.R[k + 1 + i];
    }
    worst = std::max(worst, std::abs(sol.R[k] - q * sum_l - sys.alpha(k)));
    worst = std::max(worst, std::abs(sol.L[k] - q * sum_r - sys.beta(k)));
  }
  return worst;
}

ExactExpectation expected_time_det_closed(double g, double p, int t, double n) {
  check_zigzag_domain("expected_time_det_closed", g, p);
  check_interval("expected_time_det_closed", g, t, n);
  const double sgn = int_pow(2.0 * p - 1.0, t);
  const double value = (1.0 - p) * std::pow(g, t + 1) * (1.0 + (1.0 - 2.0 * p) * (g + (g - 1.0) * sgn)) /
                           ((g - 1.0) * (1.0 - g * p)) -
                       2.0 * (1.0 - p) / (g - 1.0) + n;
  return make(value, Route::ClosedForm, p, g, t, 0.0, n);
}

DetSystemResult expected_time_det_system(double g, double p, int t, double n) {
  check_zigzag_domain("expected_time_det_system", g, p);
  check_interval("expected_time_det_system", g, t, n);
  const SystemMatrices sys = assemble_system(g, p, t + 1, 1.0, n);
  DetSystemResult r;
  r.solution = solve_system(sys);
  r.expectation = make(r.solution.R0, Route::SystemSolve, p, g, t, 0.0, n);
  return r;
}

Eigen::MatrixXd inverse_B_closed(double p, int t) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_B_closed: requires 0 < p < 1");
  if (t < 0) throw std::invalid_argument("inverse_B_closed: requires t >= 0");
  const int m = t + 1;
  auto delta = [p](int k) {
    return k == 1 ? 1.0 : 0.5 * (1.0 - p) * (1.0 - int_pow(2.0 * p - 1.0, k - 2));
  };
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) B(i, j) = delta(j - i + 1);
  }
  return B;
}

std::vector<double> inverse_BP_row(double p, int t) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_BP_row: requires 0 < p < 1");
  if (t < 0) throw std::invalid_argument("inverse_BP_row: requires t >= 0");
  std::vector<double> row(t + 1, 0.0);
  for (int r = 2; r <= t + 1; ++r) {
    row[r - 1] = -0.5 * (1.0 - p) * (int_pow(2.0 * p - 1.0, r - 2) + 1.0);
  }
  return row;
}

Eigen::MatrixXd block_inverse_closed(double p, int t) {
  const int m = t + 1;
  const Eigen::MatrixXd P = fault_matrix(p, t);
  const Eigen::MatrixXd Binv = inverse_B_closed(p, t);
  Eigen::MatrixXd inv(2 * m, 2 * m);
  inv.topLeftCorner(m, m) = Binv;
  inv.topRightCorner(m, m) = -Binv * P;
  inv.bottomLeftCorner(m, m) = -P * Binv;
  inv.bottomRightCorner(m, m) = Eigen::MatrixXd::Identity(m, m) + P * Binv * P;
  return inv;
}

ExactExpectation expected_time_det_block_inverse(double g, double p, int t, double n) {
  check_zigzag_domain("expected_time_det_block_inverse", g, p);
  check_interval("expected_time_det_block_inverse", g, t, n);
  const SystemMatrices sys = assemble_system(g, p, t + 1, 1.0, n);
  const Eigen::MatrixXd Binv = inverse_B_closed(p, t);
  const std::vector<double> bp = inverse_BP_row(p, t);
  double value = 0.0;
  for (int j = 0; j <= t; ++j) value += Binv(0, j) * sys.alpha(j) - bp[j] * sys.beta(j);
  return make(value, Route::BlockInverse, p, g, t, 0.0, n);
}

namespace {

// Shared numerator of the randomized R(0) for a target reached at level `level`.
double rand_core(double g, double p, int level) {
  return -2.0 + g * (2.0 * p + std::pow(g, level) *
                                   (1.0 + g - 2.0 * g * p - (g - 1.0) * int_pow(2.0 * p - 1.0, level + 1)));
}

}  // namespace

double rand_r0_below(double g, double p, int t, double n, double eps) {
  return n + std::pow(g, eps) * (p - 1.0) * rand_core(g, p, t) / ((g - 1.0) * (g * p - 1.0));
}

double rand_r0_above(double g, double p, int t, double n, double eps) {
  if (t == 0) return n;
  return n + std::pow(g, eps) * (p - 1.0) * rand_core(g, p, t - 1) / ((g - 1.0) * (g * p - 1.0));
}

RandExact expected_time_rand_exact(double g, double p, int t, double delta, double n) {
  check_randomized("expected_time_rand_exact", g, p, t, delta, n);
  const double lg = std::log(g);
  const double den = (g - 1.0) * (g * p - 1.0) * lg;
  const double s_t = int_pow(2.0 * p - 1.0, t);
  const double gt = std::pow(g, t);

  RandExact r;
  r.integral_below = n * delta + (std::pow(g, delta) - 1.0) * (p - 1.0) * rand_core(g, p, t) / den;
  r.integral_above = n - n * delta +
                     (g - std::pow(g, delta)) * (p - 1.0) *
                         (-2.0 + gt + g * gt + 2.0 * g * p - 2.0 * g * gt * p - (g - 1.0) * gt * s_t) / den;

  const double d = (g * p - 1.0) * lg;
  const double combined = n * (1.0 + (1.0 - p) * (g * (2.0 * p - 1.0) - 1.0) * (1.0 + s_t) / d) -
                          2.0 * (p - 1.0) / d + 2.0 * g * (p - 1.0) * (p + gt * (p - 1.0) * s_t) / d;
  r.expectation = make(combined, Route::ClosedForm, p, g, t, delta, n);
  return r;
}

namespace {

// R(0) and L(0) are affine in the turning-point scale c = g^eps, so two solves
// (c = 0 and c = 1) give them exactly for every eps.
struct AffineInScale {
  double r_const, r_slope, l_const, l_slope;
};

AffineInScale affine_solution(double g, double p, int levels, double n) {
  const SystemSolution at0 = solve_system(assemble_system(g, p, levels, 0.0, n));
  const SystemSolution at1 = solve_system(assemble_system(g, p, levels, 1.0, n));
  return {at0.R0, at1.R0 - at0.R0, at0.L0, at1.L0 - at0.L0};
}

// Integral over eps in [lo, hi) of (c0 + c1 g^eps).
double integrate_affine(double c0, double c1, double g, double lo, double hi) {
  return c0 * (hi - lo) + c1 * (std::pow(g, hi) - std::pow(g, lo)) / std::log(g);
}

}  // namespace

ExactExpectation expected_time_rand_system(double g, double p, int t, double delta, double n) {
  check_randomized("expected_time_rand_system", g, p, t, delta, n);
  const AffineInScale below = affine_solution(g, p, t + 1, n);
  const AffineInScale above = affine_solution(g, p, t, n);
  const double value = integrate_affine(below.r_const, below.r_slope, g, 0.0, delta) +
                       integrate_affine(above.r_const, above.r_slope, g, delta, 1.0);
  return make(value, Route::SystemSolve, p, g, t, delta, n);
}

ExactExpectation expected_time_rand_unconditioned(double g, double p, int t, double delta, double n) {
  check_randomized("expected_time_rand_unconditioned", g, p, t, delta, n);
  const AffineInScale below = affine_solution(g, p, t + 1, n);
  const AffineInScale above = affine_solution(g, p, t, n);
  const double r = integrate_affine(below.r_const, below.r_slope, g, 0.0, delta) +
                   integrate_affine(above.r_const, above.r_slope, g, delta, 1.0);
  const double l = integrate_affine(below.l_const, below.l_slope, g, 0.0, delta) +
                   integrate_affine(above.l_const, above.l_slope, g, delta, 1.0);
  return make(0.5 * r + 0.5 * l, Route::SystemSolve, p, g, t, delta, n);
}

double cr_bound_det(double g, double p, int t) {
  check_zigzag_domain("cr_bound_det", g, p);
  if (t < 0) throw std::invalid_argument("cr_bound_det: requires t >= 0");
  return (1.0 - p) * g / (1.0 - g * p) *
             ((1.0 + (1.0 - 2.0 * p) * g) / (g - 1.0) + int_pow(1.0 - 2.0 * p, t + 1)) +
         1.0;
}

double cr_bound_rand(double g, double p, int t) {
  check_zigzag_domain("cr_bound_rand", g, p);
  if (t < 0) throw std::invalid_argument("cr_bound_rand: requires t >= 0");
  const double s_t = int_pow(2.0 * p - 1.0, t);
  const double gt = std::pow(g, t);
  const double bracket = (1.0 - p) * (1.0 - g * (2.0 * p - 1.0)) * (1.0 + s_t) + 2.0 * (1.0 - p) / gt +
                         2.0 * g * (1.0 - p) * (p / gt + (p - 1.0) * s_t);
  return 1.0 + bracket / ((1.0 - g * p) * std::log(g));
}

}  // namespace faultsearch
