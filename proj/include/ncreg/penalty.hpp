#pragma once

#include <string>
#include <utility>

#include <json.hpp>

namespace ncreg {

enum class Family {
  none,
  l1,
  l2,
  bridge,
  scad,
  mcp,
  laplace,
  arctan,
  geman_mcclure,
  log_penalty,
  capped_l1,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

// Coordinate-separable penalty p_lambda(t), applied as sum_j p_lambda(|w_j|).
//
// Families and shape parameters:
//   none           0
//   l1             lambda*|t|
//   l2             lambda*t^2
//   bridge         lambda*|t|^kappa,                         kappa > 0
//   scad           Fan-Li quadratic spline,                  a > 2
//   mcp            minimax concave (symmetric in t),         b > 0
//   laplace        lambda*(1 - epsilon^|t|),                 epsilon in (0,1)
//   arctan         lambda*(2/pi)*atan(gamma*|t|),            gamma > 0
//   geman_mcclure  lambda*|t|/(sigma + |t|),                 sigma > 0
//   log_penalty    lambda*log(|t|/sigma + 1),                sigma > 0
//   capped_l1      lambda*min(|t|/c, 1),                     c > 0
//
// Only the fields relevant to `family` are validated or used; the rest are
// ignored. Construct via the factories or from JSON.
struct PenaltySpec {
  Family family = Family::none;
  double lambda = 0.0;
  double epsilon = 0.0;
  double gamma = 0.0;
  double a = 0.0;
  double b = 0.0;
  double kappa = 0.0;
  double sigma = 0.0;
  double c = 0.0;

  // throws std::invalid_argument naming the offending field
  void validate() const;

  static PenaltySpec none();
  static PenaltySpec l1(double lambda);
  static PenaltySpec l2(double lambda);
  static PenaltySpec bridge(double lambda, double kappa);
  static PenaltySpec scad(double lambda, double a);
  static PenaltySpec mcp(double lambda, double b);
  static PenaltySpec laplace(double lambda, double epsilon);
  static PenaltySpec arctan(double lambda, double gamma);
  static PenaltySpec geman_mcclure(double lambda, double sigma);
  static PenaltySpec log_penalty(double lambda, double sigma);
  static PenaltySpec capped_l1(double lambda, double c);
};

// Flat JSON object, e.g. {"family":"laplace","lambda":1.0,"epsilon":0.01}.
// Unknown keys are rejected; known keys irrelevant to the family are ignored.
nlohmann::json to_json(const PenaltySpec& spec);
PenaltySpec penalty_spec_from_json(const nlohmann::json& j);

// p_lambda(|t|); nonnegative, even, zero at the origin
double penalty_value(const PenaltySpec& spec, double t);

// dp/dt at t != 0. Throws std::domain_error at t == 0 (use
// subgradient_interval) and at the capped-l1 kinks t == +-c.
double penalty_deriv(const PenaltySpec& spec, double t);

// Subdifferential at 0, the symmetric interval [-lambda*L, lambda*L].
// Throws for bridge with kappa < 1 (unbounded) and for capped_l1 (more than
// one nondifferentiable point, excluded from this machinery).
std::pair<double, double> subgradient_interval(const PenaltySpec& spec);

// Global Lipschitz constant of t -> p_lambda(|t|), equal to the upper end of
// subgradient_interval for the families that have one.
double lipschitz_bound(const PenaltySpec& spec);

// Smallest exposed mu >= 0 such that p_lambda(|t|) + (mu/2) t^2 is convex.
// Closed forms: 0 for none/l1/l2 and bridge kappa >= 1, 1/(a-1) for scad,
// 1/b for mcp, lambda*log(eps)^2 for laplace, 2*lambda*gamma^2/pi for arctan,
// 2*lambda/sigma^2 for geman_mcclure. Throws for bridge kappa < 1 (no finite
// mu exists: curvature blows up at 0) and for log_penalty / capped_l1
// (outside the weak-convexity machinery here).
double weak_convexity_mu(const PenaltySpec& spec);

// Difference-of-convex split p = g - h (g, h convex, h differentiable with
// Lipschitz derivative). Supported: none, l1, scad, mcp, laplace, arctan.
struct DCParts {
  double g_value = 0.0;
  double h_value = 0.0;
  double h_deriv = 0.0;
  double h_lipschitz = 0.0;  // Lipschitz constant of h', not a function of t
};

// Textbook scaling: for laplace, g-h equals the penalty exactly; for arctan
// the split is written for gamma*|t| - atan(gamma*|t|), so the penalty equals
// (2/pi)*(g-h). scad/mcp use g = lambda*|t|, h = lambda*|t| - p(t), with
// h_lipschitz 1/(a-1) resp. 1/b.
DCParts dc_components(const PenaltySpec& spec, double t);

// Same split rescaled so g - h == penalty_value for every supported family
// (multiplies the arctan parts by 2/pi). This is the form consumed by the
// difference-of-convex solver.
DCParts dc_components_penalty_scale(const PenaltySpec& spec, double t);

}  // namespace ncreg
