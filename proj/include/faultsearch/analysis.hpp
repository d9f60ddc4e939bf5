// Competitive-ratio functions, optimal expansion factors and thresholds.

#pragma once

#include <string>
#include <vector>

#include "faultsearch/core.hpp"

namespace faultsearch {

struct CrCurve {
  double p = 0.0;
  double g_star = 0.0;
  double cr = 0.0;
  double cr_scaled = 0.0;  // (1/2 - p) * cr
};

struct Thresholds {
  double p_det_g2 = 0.0;        // optimal_g_det reaches 2
  double p0 = 0.0;              // optimal_g_rand reaches 2
  double p_det_cr9 = 0.0;       // cr_theorem_det = 9
  double p_rand_cr9 = 0.0;      // cr_theorem_rand = 9
  double p_wireless_459 = 0.0;  // cr_wireless = 1/W(1/e) + 1
};

double f_det(double g, double p);
double f_rand(double g, double p);
double h(double g, double p);

double optimal_g_det(double p);
double optimal_g_rand(double p);

double cr_theorem_det(double p);
double cr_theorem_rand(double p);

/// The closed form of p0, where h(2, p0) = 0.
double p0_closed();

Thresholds compute_thresholds();

/// Same thresholds found by bisection on their defining equations.
Thresholds compute_thresholds_bisection();

struct LambertReference {
  double w = 0.0;   // 1/W(1/e), the optimal randomized expansion factor at p = 0
  double cr = 0.0;  // w + 1
  double W = 0.0;   // W(1/e) itself
};
LambertReference lambert_reference();

double wireless_speed(double p);
double cr_wireless(double p);
/// (5 - s(s + 4 - 8p)) / (1 - s^2), the wireless ratio as a function of the speed.
double cr_wireless_at_speed(double s, double p);

/// Partial sums of sum_{i<depth} (1-p) p^i 2^i d.
std::vector<double> divergence_partial_sums(double p, double d, int depth);

struct Figure1Row {
  double p = 0.0;
  double det_scaled = 0.0;
  double rand_scaled = 0.0;
  double g_det = 0.0;
  double g_rand = 0.0;
};

struct Figure1Tables {
  std::vector<CrCurve> det;
  std::vector<CrCurve> rand;
  std::vector<Figure1Row> rows;
};

Figure1Tables figure1_tables(const std::vector<double>& p_grid);

/// Bisection for a sign change of f on [lo, hi], to absolute tolerance tol.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-12);

}  // namespace faultsearch

#include <cmath>
#include <stdexcept>

template <class F>
double faultsearch::bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw std::invalid_argument("bisect: no sign change on bracket");
  for (int i = 0; i < 200 && hi - lo > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}
