#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ncreg/dataset.hpp"
#include "ncreg/penalty.hpp"

namespace ncreg {

enum class Loss { least_squares, logistic };
enum class Algorithm { cgd, dca };

// Objectives are unnormalized sums:
//   least_squares  sum_i (y_i - x_i'w)^2 + sum_j p_lambda(|w_j|)
//   logistic       sum_i [log(1 + exp(x_i'w)) - y_i x_i'w] + sum_j p_lambda(|w_j|)
double penalized_objective(const Dataset& data, const Eigen::VectorXd& w,
                           const PenaltySpec& spec, Loss loss);

struct SolverConfig {
  Algorithm algorithm = Algorithm::cgd;
  int max_iters = 500;
  double tol = 1e-10;          // relative objective change
  double zero_tol = 1e-8;      // |w_j| <= zero_tol counts as zero
  int dca_inner_max_iters = 1000;
  double dca_inner_tol = 1e-8;
};

struct FitResult {
  Eigen::VectorXd weights;
  std::vector<double> objective_trace;  // objective after each outer step
  int n_nonzero = 0;
  bool converged = false;
  int iterations = 0;
};

nlohmann::json to_json(const FitResult& r);

// Thrown when the objective turns non-finite; carries the trace so far.
struct DivergenceError : std::runtime_error {
  DivergenceError(const std::string& what, std::vector<double> trace_so_far)
      : std::runtime_error(what), trace(std::move(trace_so_far)) {}
  std::vector<double> trace;
};

// cgd: proximal gradient descent; each step shifts by a backtracked gradient
// step on the smooth loss and applies the exact scalar prox coordinatewise.
// Accepted steps never increase the objective.
// dca: difference-of-convex outer loop (penalty split g - h with h
// linearized at the incumbent), each inner problem an l1-penalized convex fit
// solved by monotone ISTA; supports none/l1/scad/mcp/laplace/arctan.
// Both start from w = 0 and return the best iterate visited.
FitResult fit_penalized_ls(const Dataset& data, const PenaltySpec& spec,
                           const SolverConfig& config = {});
FitResult fit_penalized_logistic(const Dataset& data, const PenaltySpec& spec,
                                 const SolverConfig& config = {});

// dense least-squares solve; throws std::runtime_error on rank deficiency
Eigen::VectorXd ols_solution(const Dataset& data);

}  // namespace ncreg
