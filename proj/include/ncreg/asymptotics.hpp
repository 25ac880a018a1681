#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ncreg/penalty.hpp"

namespace ncreg {

// Multiplier on the soft-thresholding asymptotic bias for the bounded-tail
// penalties: (-log eps) * eps^|w| for laplace, 2*gamma/(pi*(1+gamma^2 w^2))
// for arctan; 1 reproduces the l1 bias. Throws on w == 0 (the factor only
// makes sense on nonzero true coordinates) and for other families.
double bias_factor(const PenaltySpec& spec, double w);

// Smallest w^2 with bias_factor < 1 for the arctan penalty at a given gamma:
// (2*gamma - pi)/(pi*gamma^2), clamped at 0 for gamma <= pi/2 (factor < 1
// everywhere). Maximized over gamma at gamma = pi with value 1/pi^2.
double arctan_crossover_w_squared(double gamma);

enum class LambdaRule { none, o_of_n, sqrt_n_lambda0, hhm_scaled, linear };

LambdaRule lambda_rule_from_name(const std::string& name);
std::string lambda_rule_name(LambdaRule r);

// lambda_n for a sample size n and number k of nonzero true coordinates:
//   none            0
//   o_of_n          coefficient * n^0.4
//   sqrt_n_lambda0  coefficient * sqrt(n)
//   hhm_scaled      coefficient * n^0.4 / sqrt(k)   (so lambda_n*sqrt(k/n) -> 0)
//   linear          coefficient * n                 (violates lambda_n = o(n))
double lambda_for_n(LambdaRule rule, double coefficient, std::size_t n, std::size_t k);

struct SimScenario {
  std::vector<double> true_w;
  double noise_sd = 1.0;
  std::vector<std::size_t> n_grid;
  LambdaRule lambda_rule = LambdaRule::o_of_n;
  double lambda_coefficient = 1.0;
  int trials = 500;
  std::uint64_t seed = 1;
};

struct ConsistencyRow {
  std::size_t n = 0;
  double mean_error = 0.0;  // mean of ||w_hat - w_true||_2 over trials
  double sd_error = 0.0;
  int trials = 0;
  std::string lambda_rule;
};

// Gaussian designs X_ij ~ N(0,1), y = X w + noise; one penalized
// least-squares fit per trial; each trial draws from an independent stream
// keyed by (seed, n index, trial index).
std::vector<ConsistencyRow> simulate_consistency(const SimScenario& scenario,
                                                 const PenaltySpec& spec_shape);

struct SqrtnBiasRow {
  std::string family;
  double w = 0.0;
  double theoretical_factor = 0.0;  // bias_factor, or 1 for l1
  double empirical_bias = 0.0;      // control-variate mean of sqrt(n)(w_hat - w)
  double empirical_bias_raw = 0.0;  // plain Monte-Carlo mean
  double zero_frequency = 0.0;      // fraction of trials fitted exactly to 0
};

// Orthonormal-design limit experiment: w_hat0_j ~ N(w_j, noise_sd^2/n), each
// coordinate solved by the exact scalar prox with lambda_n/n, lambda_n =
// lambda0*sqrt(n). The asymptotic prediction for sqrt(n)(w_hat - w_j) on a
// nonzero coordinate is -(lambda0/2)*sign(w_j)*bias_factor. empirical_bias
// subtracts the shared noise sqrt(n)(w_hat0 - w) from each draw (a control
// variate; the raw column keeps the unadjusted mean).
std::vector<SqrtnBiasRow> simulate_sqrtn_bias(const std::vector<double>& true_w,
                                              double noise_sd, std::size_t n,
                                              double lambda0, int trials,
                                              std::uint64_t seed,
                                              const PenaltySpec& spec_shape);

enum class ApproxKind { bridge, laplace, arctan };

struct ApproxError {
  double numeric_error = 0.0;  // |integral of the approximant over [a,a+1] - 1|
  double paper_approx = 0.0;   // leading-order closed form
};

// How well |t|^eps, 1 - eps^t, (2/pi)atan(t/eps) track the indicator of
// t != 0 over the unit interval [a, a+1], a > 1. numeric_error integrates by
// adaptive Simpson (absolute tolerance 1e-12); paper_approx is a^eps - 1,
// eps^a, |1 - (2/pi)atan(a/eps)| respectively.
ApproxError approximation_error(ApproxKind kind, double eps, double a);

// |sum over nonzero-truth coordinates of p(w_j) - p(w0_j)| and its
// theoretical bound lambda*L*sqrt(k)*||(w - w0)_nonzero||_2 (L = -log eps for
// laplace, 2*gamma/pi for arctan). Returns {lhs, bound}.
std::pair<double, double> penalty_perturbation_bound(const PenaltySpec& spec,
                                                     const Eigen::VectorXd& w,
                                                     const Eigen::VectorXd& w0);

inline bool penalty_perturbation_holds(const PenaltySpec& spec,
                                       const Eigen::VectorXd& w,
                                       const Eigen::VectorXd& w0) {
  auto [lhs, bound] = penalty_perturbation_bound(spec, w, w0);
  return lhs <= bound + 1e-12 * (1.0 + bound);
}

}  // namespace ncreg
