#include "ncreg/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ncreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_local_min(const PenaltySpec& spec, double w_hat, double scale, double w) {
  const double delta = 1e-6 * std::max(1.0, std::fabs(w));
  const double here = prox_objective(spec, w_hat, w, scale);
  const double slack = 1e-12 * std::max(1.0, std::fabs(here));
  return prox_objective(spec, w_hat, w + delta, scale) >= here - slack &&
         prox_objective(spec, w_hat, w - delta, scale) >= here - slack;
}

ProxResult finish(const PenaltySpec& spec, double w_hat, double scale,
                  std::vector<double> candidates, ProxMethod method) {
  // every supported penalty is symmetric and nondecreasing in |w|, so the
  // minimizer lies between 0 and w_hat; projecting candidates into that
  // interval never raises the objective and keeps |prox(w)| <= |w| exactly
  const double lo = std::min(0.0, w_hat), hi = std::max(0.0, w_hat);
  for (double& w : candidates) w = std::clamp(w, lo, hi);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](double a, double b) {
                                 return std::fabs(a - b) <= 1e-8 * std::max(1.0, std::fabs(a));
                               }),
                   candidates.end());
  ProxResult out;
  out.method = method;
  for (double w : candidates) {
    if (!is_local_min(spec, w_hat, scale, w)) continue;
    out.local_minima.push_back({w, prox_objective(spec, w_hat, w, scale)});
  }
  if (out.local_minima.empty()) {
    // degenerate flat ties; fall back to the best candidate by objective
    double best = candidates.front(), bobj = prox_objective(spec, w_hat, best, scale);
    for (double w : candidates) {
      double o = prox_objective(spec, w_hat, w, scale);
      if (o < bobj) {
        best = w;
        bobj = o;
      }
    }
    out.local_minima.push_back({best, bobj});
  }
  std::stable_sort(out.local_minima.begin(), out.local_minima.end(),
                   [](const LocalMin& a, const LocalMin& b) { return a.objective < b.objective; });
  out.global_min = out.local_minima.front().w;
  out.objective_at_min = out.local_minima.front().objective;
  return out;
}

// Damped fixed-point iteration x <- (1-d) x + d T(x) on [0, inf), followed by
// a Newton polish of x = T(x). Returns converged nonnegative roots.
template <typename Map, typename MapDeriv>
std::vector<double> stable_roots(Map T, MapDeriv Tp, std::initializer_list<double> seeds) {
  std::vector<double> roots;
  for (double seed : seeds) {
    double x = seed;
    bool ok = false;
    for (int it = 0; it < 200; ++it) {
      double nx = 0.5 * x + 0.5 * T(x);
      if (nx < 0.0) nx = 0.0;
      if (std::fabs(nx - x) <= 1e-13 * std::max(1.0, std::fabs(nx))) {
        x = nx;
        ok = true;
        break;
      }
      x = nx;
    }
    for (int it = 0; it < 50; ++it) {  // quadratic cleanup near the root
      double g = x - T(x);
      double gp = 1.0 - Tp(x);
      if (std::fabs(gp) < 1e-12) break;
      double nx = x - g / gp;
      if (nx < 0.0) nx = 0.0;
      if (std::fabs(nx - x) <= 1e-15 * std::max(1.0, std::fabs(nx))) {
        x = nx;
        ok = true;
        break;
      }
      x = nx;
      ok = true;
    }
    if (ok && x > 0.0 && std::fabs(x - T(x)) <= 1e-9 * std::max(1.0, x)) roots.push_back(x);
  }
  return roots;
}

struct OracleRun {
  double argmin = 0.0;
  std::vector<double> coarse_local_minima;
};

OracleRun oracle_engine(const PenaltySpec& spec, double w_hat, double scale,
                        double half_width, int points, bool collect_local) {
  if (half_width <= 0.0) half_width = std::max(2.0 * std::fabs(w_hat), 10.0);
  if (points < 3) throw std::invalid_argument("prox_oracle: points must be >= 3");
  auto phi = [&](double w) { return prox_objective(spec, w_hat, w, scale); };

  OracleRun run;
  double step = 2.0 * half_width / (points - 1);
  double best_w = 0.0, best_obj = phi(0.0);
  auto consider = [&](double w) {
    double o = phi(w);
    if (o < best_obj) {
      best_obj = o;
      best_w = w;
    }
    return o;
  };
  consider(w_hat);
  double prev2 = std::numeric_limits<double>::infinity();
  double prev1 = std::numeric_limits<double>::infinity();
  double prev_w = 0.0;
  for (int i = 0; i < points; ++i) {
    double w = -half_width + step * i;
    double o = consider(w);
    if (collect_local && prev1 <= prev2 && prev1 <= o &&
        prev1 < std::numeric_limits<double>::infinity()) {
      run.coarse_local_minima.push_back(prev_w);
    }
    prev2 = prev1;
    prev1 = o;
    prev_w = w;
  }
  for (int round = 0; round < 3; ++round) {
    double w0 = best_w;
    double lo = w0 - 2.0 * step, hi = w0 + 2.0 * step;
    step = (hi - lo) / 400.0;
    for (int i = 0; i <= 400; ++i) consider(lo + step * i);
  }
  // shrinkage holds exactly for these penalties; see note in finish()
  run.argmin = std::clamp(best_w, std::min(0.0, w_hat), std::max(0.0, w_hat));
  return run;
}

}  // namespace

double prox_objective(const PenaltySpec& spec, double w_hat, double w, double pen_scale) {
  return -2.0 * w_hat * w + w * w + pen_scale * penalty_value(spec, w);
}

std::string prox_method_name(ProxMethod m) {
  switch (m) {
    case ProxMethod::closed_form: return "closed_form";
    case ProxMethod::fixed_point: return "fixed_point";
    case ProxMethod::grid_refine: return "grid_refine";
  }
  throw std::logic_error("prox_method_name: unhandled enum value");
}

nlohmann::json to_json(const ProxResult& r) {
  nlohmann::json j;
  j["global_min"] = r.global_min;
  j["objective_at_min"] = r.objective_at_min;
  j["method"] = prox_method_name(r.method);
  j["local_minima"] = nlohmann::json::array();
  for (const auto& m : r.local_minima)
    j["local_minima"].push_back({{"w", m.w}, {"objective", m.objective}});
  return j;
}

ProxResult prox_scalar(const PenaltySpec& spec, double w_hat, double pen_scale) {
  spec.validate();
  if (!std::isfinite(w_hat)) throw std::domain_error("prox_scalar: non-finite w_hat");
  if (!(pen_scale >= 0.0) || !std::isfinite(pen_scale))
    throw std::invalid_argument("prox_scalar: pen_scale must be finite and >= 0");

  const double S = pen_scale;
  const double lam = spec.lambda;
  if (S * lam == 0.0 || spec.family == Family::none) {
    ProxResult out;
    out.method = ProxMethod::closed_form;
    out.global_min = w_hat;
    out.objective_at_min = prox_objective(spec, w_hat, w_hat, S);
    out.local_minima = {{w_hat, out.objective_at_min}};
    return out;
  }

  const double s = (w_hat >= 0.0) ? 1.0 : -1.0;
  const double z = std::fabs(w_hat);  // reduce to w_hat >= 0 by symmetry

  switch (spec.family) {
    case Family::l1: {
      double x = std::max(z - S * lam / 2.0, 0.0);
      return finish(spec, w_hat, S, {0.0, s * x}, ProxMethod::closed_form);
    }
    case Family::l2: {
      double x = z / (1.0 + S * lam);
      return finish(spec, w_hat, S, {s * x}, ProxMethod::closed_form);
    }
    case Family::scad: {
      const double a = spec.a;
      std::vector<double> cand = {0.0, s * lam, s * a * lam, s * std::max(a * lam, z)};
      double v1 = z - S * lam / 2.0;
      cand.push_back(s * std::clamp(v1, 0.0, lam));
      double A = 1.0 - S / (2.0 * (a - 1.0));
      if (A > 1e-12) {
        double v2 = (z - S * a * lam / (2.0 * (a - 1.0))) / A;
        cand.push_back(s * std::clamp(v2, lam, a * lam));
      }
      return finish(spec, w_hat, S, cand, ProxMethod::closed_form);
    }
    case Family::mcp: {
      const double b = spec.b;
      std::vector<double> cand = {0.0, s * b * lam, s * std::max(b * lam, z)};
      double A = 1.0 - S / (2.0 * b);
      if (A > 1e-12) {
        double v1 = (z - S * lam / 2.0) / A;
        cand.push_back(s * std::clamp(v1, 0.0, b * lam));
      }
      return finish(spec, w_hat, S, cand, ProxMethod::closed_form);
    }
    case Family::laplace: {
      const double log_eps = std::log(spec.epsilon);
      const double C = S * lam / 2.0 * (-log_eps);  // shrink amount at x = 0
      auto T = [&](double x) { return z - C * std::exp(x * log_eps); };
      auto Tp = [&](double x) { return -C * log_eps * std::exp(x * log_eps); };
      std::vector<double> cand = {0.0};
      for (double r : stable_roots(T, Tp, {z, 0.1})) cand.push_back(s * r);
      return finish(spec, w_hat, S, cand, ProxMethod::fixed_point);
    }
    case Family::arctan: {
      const double g = spec.gamma;
      const double C = S * lam * g / kPi;
      auto T = [&](double x) { return z - C / (1.0 + g * g * x * x); };
      auto Tp = [&](double x) {
        double d = 1.0 + g * g * x * x;
        return C * 2.0 * g * g * x / (d * d);
      };
      std::vector<double> cand = {0.0};
      for (double r : stable_roots(T, Tp, {z, 0.1})) cand.push_back(s * r);
      return finish(spec, w_hat, S, cand, ProxMethod::fixed_point);
    }
    default: {
      OracleRun run = oracle_engine(spec, w_hat, S, -1.0, 20001, true);
      std::vector<double> cand = {0.0, run.argmin};
      for (double w : run.coarse_local_minima) cand.push_back(w);
      return finish(spec, w_hat, S, cand, ProxMethod::grid_refine);
    }
  }
}

double prox_oracle(const PenaltySpec& spec, double w_hat, double half_width, int points) {
  spec.validate();
  if (!std::isfinite(w_hat)) throw std::domain_error("prox_oracle: non-finite w_hat");
  return oracle_engine(spec, w_hat, 1.0, half_width, points, false).argmin;
}

double oracle_final_step(double half_width, int points) {
  double step = 2.0 * half_width / (points - 1);
  for (int round = 0; round < 3; ++round) step = 4.0 * step / 400.0;
  return step;
}

double global_min_threshold(const PenaltySpec& spec_shape, double w_hat) {
  PenaltySpec spec = spec_shape;
  const double ztol = 1e-6;
  auto zero_at = [&](double lambda) {
    spec.lambda = lambda;
    return std::fabs(prox_oracle(spec, w_hat, -1.0, 20001)) <= ztol;
  };
  double lo = 1e-4, hi = 1e4;
  if (zero_at(lo) || !zero_at(hi))
    throw std::runtime_error(
        "global_min_threshold: no zero/nonzero switch inside lambda bracket [1e-4, 1e4]");
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (zero_at(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

ObjectiveCurve objective_curve(const PenaltySpec& spec_shape, double w_hat,
                               const std::vector<double>& lambda_grid,
                               const std::vector<double>& w_grid) {
  PenaltySpec spec = spec_shape;
  spec.validate();
  ObjectiveCurve out;
  out.w = w_grid;
  out.lambda = lambda_grid;
  out.objective.reserve(w_grid.size() * lambda_grid.size());
  for (double lam : lambda_grid) {
    spec.lambda = lam;
    for (double w : w_grid) out.objective.push_back(prox_objective(spec, w_hat, w));
  }
  return out;
}

}  // namespace ncreg
