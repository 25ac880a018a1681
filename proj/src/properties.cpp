#include "ncreg/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ncreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

// 4001 equally spaced points on [-10, 10] plus logarithmic tails out to 1e6.
std::vector<double> audit_grid() {
  std::vector<double> g;
  g.reserve(4001 + 2 * 200);
  for (int i = 0; i < 4001; ++i) g.push_back(-10.0 + 20.0 * i / 4000.0);
  for (int i = 1; i <= 200; ++i) {
    double t = std::pow(10.0, 1.0 + 5.0 * i / 200.0);
    g.push_back(t);
    g.push_back(-t);
  }
  std::sort(g.begin(), g.end());
  return g;
}

std::vector<double> positive_part(const std::vector<double>& grid) {
  std::vector<double> g;
  for (double t : grid)
    if (t > 0.0) g.push_back(t);
  return g;
}

struct Worst {
  double residual = std::numeric_limits<double>::infinity();
  double witness = 0.0;
  void offer(double r, double t) {
    if (r < residual) {
      residual = r;
      witness = t;
    }
  }
};

PropertyCheck from_worst(const Worst& w, double tol) {
  PropertyCheck c;
  c.verdict = (w.residual >= -tol) ? Verdict::holds : Verdict::fails;
  c.witness_t = w.witness;
  c.residual = w.residual;
  return c;
}

PropertyCheck failed(double witness, double residual) {
  return {Verdict::fails, witness, residual};
}

// golden-section refinement inside [lo, hi] for a unimodal-enough bracket
template <typename F>
std::pair<double, double> golden_min(F f, double lo, double hi, int iters) {
  const double phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = f(x2);
    }
  }
  double m = 0.5 * (a + b);
  return {m, f(m)};
}

// coarse scan over [lo, hi] (log-spaced when spanning decades) + refinement
template <typename F>
std::pair<double, double> scan_min(F f, double lo, double hi, int n) {
  double best_t = lo, best_f = f(lo);
  std::vector<double> ts;
  ts.reserve(2 * n);
  for (int i = 0; i <= n; ++i) ts.push_back(lo + (hi - lo) * i / n);
  // log-spaced points resolve structure near the left end
  if (lo > 0.0 && hi / lo > 100.0) {
    double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i <= n; ++i) ts.push_back(std::exp(llo + (lhi - llo) * i / n));
  }
  for (double t : ts) {
    double v = f(t);
    if (v < best_f) {
      best_f = v;
      best_t = t;
    }
  }
  double span = (hi - lo) / n;
  auto [rt, rf] = golden_min(f, std::max(lo, best_t - span), std::min(hi, best_t + span), 80);
  return rf < best_f ? std::make_pair(rt, rf) : std::make_pair(best_t, best_f);
}

bool has_exact_zero_tail(Family f) {
  return f == Family::scad || f == Family::mcp || f == Family::capped_l1 ||
         f == Family::none;
}

// start of the exactly-zero derivative region, where one exists
double zero_tail_start(const PenaltySpec& s) {
  switch (s.family) {
    case Family::scad: return s.a * s.lambda;
    case Family::mcp: return s.b * s.lambda;
    case Family::capped_l1: return s.c;
    default: return 0.0;
  }
}

double deriv_or_nan(const PenaltySpec& spec, double t) {
  try {
    return penalty_deriv(spec, t);
  } catch (const std::domain_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// max |second difference quotient| of the penalty over fixed nonzero probes
double max_probe_curvature(const PenaltySpec& spec) {
  const double h = 1e-3;
  double worst = 0.0;
  for (double t : {0.5, 1.0, 2.0, 5.0}) {
    double d2 = (penalty_value(spec, t + h) - 2.0 * penalty_value(spec, t) +
                 penalty_value(spec, t - h)) /
                (h * h);
    worst = std::max(worst, std::fabs(d2));
  }
  return worst;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not_applicable";
  }
  throw std::logic_error("verdict_name: unhandled enum value");
}

nlohmann::json to_json(const PropertyReport& report) {
  nlohmann::json j;
  for (const auto& [name, check] : report.checks) {
    j["checks"][name] = {{"verdict", verdict_name(check.verdict)},
                         {"witness_t", check.witness_t},
                         {"residual", check.residual}};
  }
  if (report.sparsity_continuity_lambda) {
    j["sparsity_continuity_lambda"] = {report.sparsity_continuity_lambda->first,
                                       report.sparsity_continuity_lambda->second};
  }
  return j;
}

std::pair<double, double> sparsity_continuity_region(const PenaltySpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::laplace: {
      const double l2 = std::pow(std::log(spec.epsilon), 2);
      return {1.0 / (std::exp(1.0) * l2), 1.0 / l2};
    }
    case Family::arctan:
      return {0.0, kPi / (spec.gamma * spec.gamma)};
    default:
      throw std::invalid_argument(
          "sparsity_continuity_region: closed form only for laplace and arctan");
  }
}

ThresholdMin laplace_threshold_min(double lambda, double epsilon) {
  if (!(lambda > 0.0)) throw std::invalid_argument("laplace_threshold_min: lambda must be > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw std::invalid_argument("laplace_threshold_min: epsilon must be in (0, 1)");
  const double log_eps = std::log(epsilon);
  const double s = std::log(lambda * log_eps * log_eps);
  return {s / (-log_eps), (s + 1.0) / (-log_eps)};
}

PropertyReport check_properties(const PenaltySpec& spec) {
  spec.validate();
  PropertyReport rep;
  const std::vector<double> grid = audit_grid();
  const std::vector<double> pos = positive_part(grid);
  const double lam = spec.lambda;
  const double tol_exact = 1e-8;

  // P1: symmetry and p(0) == 0
  {
    Worst w;
    w.offer(-std::fabs(penalty_value(spec, 0.0)), 0.0);
    for (double t : pos) {
      double d = std::fabs(penalty_value(spec, t) - penalty_value(spec, -t));
      w.offer(-d, t);
    }
    rep.checks["P1"] = from_worst(w, tol_exact);
  }

  // P2: nondecreasing on [0, inf)
  {
    Worst w;
    double prev = penalty_value(spec, 0.0);
    for (double t : pos) {
      double v = penalty_value(spec, t);
      w.offer(v - prev, t);
      prev = v;
    }
    rep.checks["P2"] = from_worst(w, tol_exact);
  }

  // P3: p(t)/t nonincreasing on (0, inf)
  {
    Worst w;
    double prev = std::numeric_limits<double>::infinity();
    for (double t : pos) {
      double r = penalty_value(spec, t) / t;
      w.offer(prev - r, t);
      prev = r;
    }
    rep.checks["P3"] = from_worst(w, tol_exact);
  }
  const bool p3_holds = rep.checks["P3"].verdict == Verdict::holds;

  // P4: differentiable off 0, subdifferential at 0 bounded by lambda*L
  {
    bool interval_ok = true;
    double L = 0.0;
    try {
      L = subgradient_interval(spec).second;
    } catch (const std::invalid_argument&) {
      interval_ok = false;
    }
    if (!interval_ok) {
      double witness = (spec.family == Family::capped_l1) ? spec.c : 1e-6;
      rep.checks["P4"] = failed(witness, -std::fabs(deriv_or_nan(spec, witness)));
    } else {
      Worst w;
      // one-sided limit at 0 matches the interval end
      double d0 = deriv_or_nan(spec, 1e-9);
      w.offer(1e-6 * std::max(1.0, L) - std::fabs(std::fabs(d0) - L), 1e-9);
      if (p3_holds) {
        // for concave-type penalties the derivative stays inside the interval
        for (double t : pos) {
          double d = deriv_or_nan(spec, t);
          if (std::isnan(d)) {
            w.offer(-1.0, t);
            continue;
          }
          w.offer(L * (1.0 + 1e-8) + 1e-12 - std::fabs(d), t);
        }
      }
      rep.checks["P4"] = from_worst(w, tol_exact);
    }
  }

  // P5: p(|t|) + (mu/2) t^2 convex, checked by midpoint convexity
  if (spec.family == Family::log_penalty) {
    rep.checks["P5"] = {Verdict::not_applicable, 0.0, 0.0};
  } else {
    bool have_mu = true;
    double mu = 0.0;
    try {
      mu = weak_convexity_mu(spec);
    } catch (const std::invalid_argument&) {
      have_mu = false;
    }
    if (!have_mu) {
      rep.checks["P5"] = failed(0.0, -1.0);
    } else {
      auto q = [&](double t) { return penalty_value(spec, t) + 0.5 * mu * t * t; };
      Worst w;
      for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        double a = grid[i], b = grid[i + 1], m = 0.5 * (a + b);
        double r = q(a) + q(b) - 2.0 * q(m);
        double noise = 1e-8 + 1e-13 * std::fabs(q(m));
        w.offer(r + noise, m);  // require r >= -noise
      }
      rep.checks["P5"] = from_worst(w, 0.0);
      rep.checks["P5"].residual -= 1e-8;  // report the raw margin
    }
  }

  // P6: derivative exactly zero beyond a multiple of lambda
  if (has_exact_zero_tail(spec.family) || lam == 0.0) {
    Worst w;
    double start = zero_tail_start(spec);
    for (double m : {1.000001, 1.5, 3.0, 10.0, 1e3}) {
      double t = std::max(start * m, start + 1e-9) + (start == 0.0 ? m : 0.0);
      double d = deriv_or_nan(spec, t);
      w.offer(-std::fabs(d), t);
    }
    rep.checks["P6"] = from_worst(w, 0.0);
  } else {
    double t = 1e6;
    rep.checks["P6"] = failed(t, -std::fabs(deriv_or_nan(spec, t)));
  }

  // P6': derivative vanishing at the probes 10^1..10^4
  {
    Worst w;
    for (double t : {10.0, 1e2, 1e3, 1e4}) {
      double d = deriv_or_nan(spec, t);
      w.offer(1e-6 - std::fabs(d), t);
    }
    rep.checks["P6'"] = from_worst(w, 0.0);
  }

  // P7/P8 via the thresholding function f(t) = t + p'(t) on t > 0
  {
    auto f = [&](double t) { return t + std::fabs(deriv_or_nan(spec, t)); };
    const bool unbounded_at_zero = spec.family == Family::bridge && spec.kappa < 1.0;
    double f0 = 0.0;
    if (!unbounded_at_zero) {
      f0 = (spec.family == Family::capped_l1) ? lam / spec.c
                                              : subgradient_interval(spec).second;
    }
    double hi = (spec.family == Family::arctan) ? 100.0 / spec.gamma
                                                : std::max(10.0, 10.0 * lam);
    auto [tmin, fmin_pos] = scan_min(f, hi * 1e-9, hi, 2000);

    if (spec.family == Family::laplace) {
      // closed-form unconstrained minimum of the smooth extension; its sign
      // reproduces the classical lambda > 1/(e log(eps)^2) region
      if (lam > 0.0) {
        ThresholdMin tm = laplace_threshold_min(lam, spec.epsilon);
        PropertyCheck c;
        c.verdict = tm.f_min > 0.0 ? Verdict::holds : Verdict::fails;
        c.witness_t = tm.t_min;
        c.residual = tm.f_min;
        rep.checks["P7"] = c;
      } else {
        rep.checks["P7"] = failed(0.0, 0.0);
      }
    } else {
      double m = unbounded_at_zero ? fmin_pos : std::min(f0, fmin_pos);
      PropertyCheck c;
      c.verdict = m > tol_exact ? Verdict::holds : Verdict::fails;
      c.witness_t = (m == f0) ? 0.0 : tmin;
      c.residual = m;
      rep.checks["P7"] = c;
    }

    if (unbounded_at_zero) {
      // f(0+) = +inf, so the minimum is never at the origin
      rep.checks["P8"] = failed(tmin, -(std::numeric_limits<double>::infinity()));
      rep.checks["P8"].residual = -1.0;
    } else {
      PropertyCheck c;
      double margin = fmin_pos - f0;
      c.verdict = margin >= -tol_exact ? Verdict::holds : Verdict::fails;
      c.witness_t = tmin;
      c.residual = margin;
      rep.checks["P8"] = c;
    }
  }

  // P9: probe curvature vanishes as lambda -> 0
  {
    if (lam == 0.0) {
      rep.checks["P9"] = {Verdict::holds, 0.0, 0.0};
    } else {
      PenaltySpec small = spec;
      small.lambda = lam * 1e-6;
      double m0 = max_probe_curvature(spec);
      double m6 = max_probe_curvature(small);
      PropertyCheck c;
      double bound = std::max(1e-8, 1e-4 * m0);
      c.verdict = m6 <= bound ? Verdict::holds : Verdict::fails;
      c.witness_t = 0.5;
      c.residual = bound - m6;
      rep.checks["P9"] = c;
    }
  }

  if (spec.family == Family::laplace || spec.family == Family::arctan) {
    rep.sparsity_continuity_lambda = sparsity_continuity_region(spec);
  }
  return rep;
}

}  // namespace ncreg
