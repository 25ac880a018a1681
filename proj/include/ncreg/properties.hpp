#pragma once

#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "ncreg/penalty.hpp"

namespace ncreg {

enum class Verdict { holds, fails, not_applicable };

std::string verdict_name(Verdict v);

struct PropertyCheck {
  Verdict verdict = Verdict::not_applicable;
  double witness_t = 0.0;   // worst grid point (or probe) for this property
  double residual = 0.0;    // signed margin; negative means violated
};

// Numerical audit of the standard penalty properties on a dense grid:
//   P1  even, zero at the origin
//   P2  nondecreasing on [0, inf)
//   P3  t -> p(t)/t nonincreasing on (0, inf)
//   P4  differentiable off 0 with a bounded symmetric subdifferential at 0
//   P5  p(|t|) + (mu/2) t^2 convex for the exposed mu
//   P6  derivative exactly zero beyond a multiple of lambda
//   P6' derivative vanishing as |t| grows (limit form of P6)
//   P7  min of t + p'(t) positive (thresholding / sparsity)
//   P8  scalar objective minimized at 0 (continuity at the origin)
//   P9  max curvature tends to 0 with lambda
struct PropertyReport {
  std::map<std::string, PropertyCheck> checks;
  // lambda interval on which P7 and P8 hold together; present only for the
  // families with a closed-form interval (laplace, arctan)
  std::optional<std::pair<double, double>> sparsity_continuity_lambda;
};

nlohmann::json to_json(const PropertyReport& report);

PropertyReport check_properties(const PenaltySpec& spec);

// Closed-form lambda interval on which P7 and P8 hold simultaneously:
// laplace (1/(e log(eps)^2), 1/log(eps)^2), arctan (0, pi/gamma^2).
// Throws std::invalid_argument for other families.
std::pair<double, double> sparsity_continuity_region(const PenaltySpec& spec);

// Unconstrained minimizer and minimum of f(t) = t - (lambda log eps) eps^t,
// the scalar function whose sign decides P7 for the laplace penalty:
//   t_min = log(lambda log(eps)^2) / (-log eps)
//   f_min = (log(lambda log(eps)^2) + 1) / (-log eps)
// t_min may be negative; f_min > 0 iff lambda > 1/(e log(eps)^2).
struct ThresholdMin {
  double t_min = 0.0;
  double f_min = 0.0;
};
ThresholdMin laplace_threshold_min(double lambda, double epsilon);

}  // namespace ncreg
