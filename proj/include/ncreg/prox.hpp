#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ncreg/penalty.hpp"

namespace ncreg {

// Scalar objective behind every routine in this header:
//   phi(w) = -2*w_hat*w + w^2 + scale * p_lambda(|w|)
// i.e. (w - w_hat)^2 + scale * p_lambda(|w|) up to the constant -w_hat^2.
// The unit coefficient on w^2 (not 1/2) matches the orthonormal-design
// least-squares reduction; closed forms below are derived for this scaling.
double prox_objective(const PenaltySpec& spec, double w_hat, double w,
                      double pen_scale = 1.0);

enum class ProxMethod { closed_form, fixed_point, grid_refine };

std::string prox_method_name(ProxMethod m);

struct LocalMin {
  double w = 0.0;
  double objective = 0.0;
};

struct ProxResult {
  double global_min = 0.0;
  double objective_at_min = 0.0;
  std::vector<LocalMin> local_minima;  // global first, ascending objective
  ProxMethod method = ProxMethod::closed_form;
};

nlohmann::json to_json(const ProxResult& r);

// Global minimizer of phi. Routes per family: closed forms for none/l1/l2
// and piecewise closed forms for scad/mcp; damped fixed-point iteration on
// the stationarity equations for laplace/arctan (candidates compared against
// w = 0); dense-grid refinement for the remaining families. pen_scale
// multiplies the whole penalty term (used by the composite-gradient solver).
ProxResult prox_scalar(const PenaltySpec& spec, double w_hat, double pen_scale = 1.0);

// Brute-force grid minimizer of phi over [-half_width, half_width] united
// with {0, w_hat}, refined by shrinking windows around the incumbent.
// Resolves the argmin to about oracle_final_step().
double prox_oracle(const PenaltySpec& spec, double w_hat,
                   double half_width = -1.0,  // <= 0 means max(2|w_hat|, 10)
                   int points = 100001);

// Grid spacing after the refinement rounds, for a given initial window.
double oracle_final_step(double half_width, int points);

// Smallest lambda at which the global minimizer is exactly zero, located by
// bisection on [1e-4, 1e4] (60 rounds) with prox_oracle deciding zero vs
// nonzero. Throws std::runtime_error when the bracket does not straddle the
// switch. spec_shape.lambda is ignored.
double global_min_threshold(const PenaltySpec& spec_shape, double w_hat);

// phi evaluated on the grid {w_grid} x {lambda_grid}; rows in lambda-major
// order. Written as CSV "w,lambda,objective" by the CLI.
struct ObjectiveCurve {
  std::vector<double> w;
  std::vector<double> lambda;
  std::vector<double> objective;  // size w.size() * lambda.size()
};

ObjectiveCurve objective_curve(const PenaltySpec& spec_shape, double w_hat,
                               const std::vector<double>& lambda_grid,
                               const std::vector<double>& w_grid);

}  // namespace ncreg
