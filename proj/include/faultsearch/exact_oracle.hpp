// Exact expected termination times of the faulty zig-zag, by three routes:
//   closed form      - the final formulas for R_0 and the randomized integrals,
//   system solve     - assemble the R_k/L_k linear system and solve it densely,
//   block inverse    - the explicit inverse of [[I, P], [P, I]].
// The routes are computed independently so that they can check each other.

#pragma once

#include <Eigen/Dense>
#include <vector>

namespace faultsearch {

enum class Route { ClosedForm, SystemSolve, BlockInverse };

const char* to_string(Route r);

struct ExactExpectation {
  double value = 0.0;
  Route route = Route::ClosedForm;
  double p = 0.0;
  double g = 0.0;
  int t = 0;
  double delta = 0.0;  // 0 when not applicable
  double n = 0.0;
};

/// Coefficients of the R_k / L_k system for a zig-zag whose right sweeps at
/// level k >= levels reach the target. `scale` multiplies every turning point
/// (1 for the deterministic start, g^eps for the randomized one).
///
///   R_k - (1-p) sum_{i} p^i L_{k+1+i} = alpha_k
///   L_k - (1-p) sum_{i} p^i R_{k+1+i} = beta_k,      k = 0..levels-1
struct SystemMatrices {
  int levels = 0;  // t + 1 for the deterministic system
  double p = 0.0;
  double g = 0.0;
  double scale = 1.0;
  double n = 0.0;
  Eigen::MatrixXd P;  // strictly upper triangular, P(i,j) = -(1-p) p^(j-i-1)
  Eigen::MatrixXd A;  // [[I, P], [P, I]]; block-symmetric, not symmetric
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
};

SystemMatrices assemble_system(double g, double p, int levels, double scale, double n);

struct SystemSolution {
  std::vector<double> R;  // R_0 .. R_{levels-1}
  std::vector<double> L;  // L_0 .. L_{levels-1}
  double R0 = 0.0;        // R_0 (equals n when levels == 0)
  double L0 = 0.0;        // L_0 (equals the boundary value when levels == 0)
  double L_boundary = 0.0;  // L_levels = 2(1-p) scale g^levels / (1 - g p) + n
};

/// Partial-pivot dense solve of the assembled system.
SystemSolution solve_system(const SystemMatrices& sys);

/// Max |row residual| of a solution against the system it came from.
double system_residual(const SystemMatrices& sys, const SystemSolution& sol);

// ---- deterministic start (exponent 0, heading right, target at +n) ----

ExactExpectation expected_time_det_closed(double g, double p, int t, double n);

struct DetSystemResult {
  ExactExpectation expectation;
  SystemSolution solution;
};
DetSystemResult expected_time_det_system(double g, double p, int t, double n);

/// R_0 from the closed rows of (I-P^2)^-1 and (I-P^2)^-1 P.
ExactExpectation expected_time_det_block_inverse(double g, double p, int t, double n);

/// (I - P^2)^-1: zero below the diagonal, delta_{j-i+1} on and above it, with
/// delta_1 = 1 and delta_m = (1-p)/2 (1 - (2p-1)^(m-2)).
Eigen::MatrixXd inverse_B_closed(double p, int t);

/// First row of (I - P^2)^-1 P: 0, then -(1-p)/2 ((2p-1)^(r-2) + 1).
std::vector<double> inverse_BP_row(double p, int t);

/// Explicit inverse of A assembled from inverse_B_closed:
///   [[B^-1, -B^-1 P], [-P B^-1, I + P B^-1 P]],  B = I - P^2.
Eigen::MatrixXd block_inverse_closed(double p, int t);

/// The (t+1) x (t+1) matrix P on its own.
Eigen::MatrixXd fault_matrix(double p, int t);

// ---- randomized start (exponent eps ~ U[0,1)) ----

/// R(0) when eps < delta (target reached by the right sweep at level t+1).
double rand_r0_below(double g, double p, int t, double n, double eps);
/// R(0) when eps >= delta (target reached one level earlier).
double rand_r0_above(double g, double p, int t, double n, double eps);

struct RandExact {
  ExactExpectation expectation;  // E[T | initial direction towards the target]
  double integral_below = 0.0;   // integral of rand_r0_below over [0, delta)
  double integral_above = 0.0;   // integral of rand_r0_above over [delta, 1)
};

/// Closed-form combined expression, plus the two per-case integrals.
RandExact expected_time_rand_exact(double g, double p, int t, double delta, double n);

/// Same conditional expectation through system solves integrated exactly in eps.
ExactExpectation expected_time_rand_system(double g, double p, int t, double delta, double n);

/// Unconditioned expectation 1/2 R(0) + 1/2 L(0), both from system solves.
ExactExpectation expected_time_rand_unconditioned(double g, double p, int t, double delta, double n);

// ---- per-interval ratio bounds ----

/// Upper bound on E[T]/n for the deterministic start, target in (g^t, g^(t+1)].
double cr_bound_det(double g, double p, int t);
/// Combined randomized expression divided by n, at n = g^t.
double cr_bound_rand(double g, double p, int t);

/// x^k for integer k >= 0 with the sign tracked explicitly.
double int_pow(double x, int k);

}  // namespace faultsearch
