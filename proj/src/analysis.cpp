#include "faultsearch/analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace faultsearch {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
const double kLn2 = std::log(2.0);

void check_p(const char* who, double p) {
  if (!(p > 0.0 && p < 0.5)) throw std::invalid_argument(std::string(who) + ": requires 0 < p < 1/2");
}

void check_g(const char* who, double g, double p) {
  check_p(who, p);
  if (!(g >= 2.0 && g * p < 1.0)) throw std::invalid_argument(std::string(who) + ": requires 2 <= g < 1/p");
}

double p_det_g2_closed() { return (2.0 - kSqrt2) / 4.0; }

}  // namespace

double f_det(double g, double p) {
  check_g("f_det", g, p);
  return (1.0 - g * (2.0 * g * (p - 2.0) * p + g + 2.0)) / ((1.0 - g) * (1.0 - g * p));
}

double f_rand(double g, double p) {
  check_g("f_rand", g, p);
  return 1.0 + (1.0 - p) * (1.0 + g * (1.0 - 2.0 * p)) / ((1.0 - g * p) * std::log(g));
}

double h(double g, double p) {
  if (!(g >= 2.0)) throw std::invalid_argument("h: requires g >= 2");
  return (1.0 - g * p) * (1.0 + g * (1.0 - 2.0 * p)) - g * (1.0 - p) * std::log(g);
}

double optimal_g_det(double p) {
  check_p("optimal_g_det", p);
  if (p > p_det_g2_closed()) return 2.0;
  return std::max(2.0, (-(kSqrt2 + 2.0) * p + kSqrt2 + 1.0) / (1.0 - 2.0 * p * p));
}

double p0_closed() {
  return (5.0 - std::sqrt(1.0 + kLn2 * kLn2 + 6.0 * kLn2) - kLn2) / 8.0;
}

double optimal_g_rand(double p) {
  check_p("optimal_g_rand", p);
  if (h(2.0, p) <= 0.0) return 2.0;
  return bisect([p](double g) { return h(g, p); }, 2.0, 4.0);
}

double cr_theorem_det(double p) {
  check_p("cr_theorem_det", p);
  if (p <= p_det_g2_closed()) return 2.0 * (kSqrt2 + 2.0);
  return 6.0 - 4.0 * p + 1.0 / (1.0 - 2.0 * p);
}

double cr_theorem_rand(double p) {
  check_p("cr_theorem_rand", p);
  const double g = optimal_g_rand(p);
  if (g > 2.0) {
    const double r = (1.0 - p) / (1.0 - g * p);
    return g * r * r + 1.0;
  }
  return (1.0 - p) * (3.0 - 4.0 * p) / ((1.0 - 2.0 * p) * kLn2) + 1.0;
}

Thresholds compute_thresholds() {
  Thresholds t;
  t.p_det_g2 = p_det_g2_closed();
  t.p0 = p0_closed();
  t.p_det_cr9 = (std::sqrt(17.0) - 1.0) / 8.0;
  t.p_rand_cr9 = (7.0 + std::sqrt(1.0 + 256.0 * kLn2 * kLn2 - 96.0 * kLn2) - 16.0 * kLn2) / 8.0;
  const double target = lambert_reference().cr;
  t.p_wireless_459 = bisect([target](double p) { return cr_wireless(p) - target; }, 1e-9, 0.5 - 1e-9);
  return t;
}

Thresholds compute_thresholds_bisection() {
  Thresholds t;
  t.p_det_g2 = bisect(
      [](double p) { return (-(kSqrt2 + 2.0) * p + kSqrt2 + 1.0) / (1.0 - 2.0 * p * p) - 2.0; }, 1e-9, 0.3);
  t.p0 = bisect([](double p) { return h(2.0, p); }, 1e-9, 0.5 - 1e-9);
  // On the g = 2 branch both ratios are explicit in p.
  t.p_det_cr9 = bisect([](double p) { return 6.0 - 4.0 * p + 1.0 / (1.0 - 2.0 * p) - 9.0; }, 0.2, 0.49);
  t.p_rand_cr9 = bisect([](double p) { return cr_theorem_rand(p) - 9.0; }, 0.3, 0.49);
  const double target = lambert_reference().cr;
  t.p_wireless_459 = bisect([target](double p) { return cr_wireless(p) - target; }, 1e-9, 0.5 - 1e-9);
  return t;
}

LambertReference lambert_reference() {
  // W(x) e^W(x) = x with x = 1/e; the root lies in (0, 1).
  const double x = std::exp(-1.0);
  double lo = 0.0;
  double hi = 1.0;
  double w = 0.3;
  for (int i = 0; i < 100; ++i) {
    const double f = w * std::exp(w) - x;
    if (f > 0.0) hi = w; else lo = w;
    double next = w - f / ((1.0 + w) * std::exp(w));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) < 1e-16) {
      w = next;
      break;
    }
    w = next;
  }
  return LambertReference{1.0 / w, 1.0 / w + 1.0, w};
}

double wireless_speed(double p) {
  check_p("wireless_speed", p);
  return (1.0 - 2.0 * std::sqrt(p - p * p)) / (1.0 - 2.0 * p);
}

double cr_wireless(double p) {
  check_p("cr_wireless", p);
  return 3.0 + 4.0 * std::sqrt(p * (1.0 - p));
}

double cr_wireless_at_speed(double s, double p) {
  if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("cr_wireless_at_speed: requires 0 < s < 1");
  return (5.0 - s * (s + 4.0 - 8.0 * p)) / (1.0 - s * s);
}

std::vector<double> divergence_partial_sums(double p, double d, int depth) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("divergence_partial_sums: requires 0 < p < 1");
  if (!(d > 0.0)) throw std::invalid_argument("divergence_partial_sums: requires d > 0");
  if (depth < 1) throw std::invalid_argument("divergence_partial_sums: requires depth >= 1");
  std::vector<double> sums;
  sums.reserve(depth);
  double term = (1.0 - p) * d;
  double acc = 0.0;
  for (int i = 0; i < depth; ++i) {
    acc += term;
    sums.push_back(acc);
    term *= 2.0 * p;
  }
  return sums;
}

Figure1Tables figure1_tables(const std::vector<double>& p_grid) {
  if (p_grid.empty()) throw std::invalid_argument("figure1_tables: empty grid");
  Figure1Tables out;
  for (double p : p_grid) {
    check_p("figure1_tables", p);
    const double gd = optimal_g_det(p);
    const double gr = optimal_g_rand(p);
    const double cd = cr_theorem_det(p);
    const double cr = cr_theorem_rand(p);
    out.det.push_back({p, gd, cd, (0.5 - p) * cd});
    out.rand.push_back({p, gr, cr, (0.5 - p) * cr});
    out.rows.push_back({p, (0.5 - p) * cd, (0.5 - p) * cr, gd, gr});
  }
  return out;
}

}  // namespace faultsearch
