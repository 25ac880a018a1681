#include "ncreg/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ncreg/prox.hpp"
#include "ncreg/rng.hpp"
#include "ncreg/solvers.hpp"

namespace ncreg {

namespace {

constexpr double kPi = 3.14159265358979323846;

template <typename F>
double simpson(F f, double a, double b) {
  double m = 0.5 * (a + b);
  return (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
}

template <typename F>
double adaptive_simpson(F f, double a, double b, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double left = simpson(f, a, m), right = simpson(f, m, b);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, m, left, tol / 2.0, depth - 1) +
         adaptive_simpson(f, m, b, right, tol / 2.0, depth - 1);
}

template <typename F>
double integrate(F f, double a, double b, double tol = 1e-12) {
  return adaptive_simpson(f, a, b, simpson(f, a, b), tol, 48);
}

}  // namespace

double bias_factor(const PenaltySpec& spec, double w) {
  spec.validate();
  if (w == 0.0)
    throw std::invalid_argument("bias_factor: defined only on nonzero true coordinates");
  switch (spec.family) {
    case Family::laplace: {
      double log_eps = std::log(spec.epsilon);
      return (-log_eps) * std::exp(std::fabs(w) * log_eps);
    }
    case Family::arctan: {
      double g = spec.gamma;
      return 2.0 * g / (kPi * (1.0 + g * g * w * w));
    }
    default:
      throw std::invalid_argument("bias_factor: closed form only for laplace and arctan");
  }
}

double arctan_crossover_w_squared(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("arctan_crossover_w_squared: gamma <= 0");
  return std::max(0.0, (2.0 * gamma - kPi) / (kPi * gamma * gamma));
}

LambdaRule lambda_rule_from_name(const std::string& name) {
  if (name == "none") return LambdaRule::none;
  if (name == "o_of_n") return LambdaRule::o_of_n;
  if (name == "sqrt_n_lambda0") return LambdaRule::sqrt_n_lambda0;
  if (name == "hhm_scaled") return LambdaRule::hhm_scaled;
  if (name == "linear") return LambdaRule::linear;
  throw std::invalid_argument("unknown lambda rule: " + name);
}

std::string lambda_rule_name(LambdaRule r) {
  switch (r) {
    case LambdaRule::none: return "none";
    case LambdaRule::o_of_n: return "o_of_n";
    case LambdaRule::sqrt_n_lambda0: return "sqrt_n_lambda0";
    case LambdaRule::hhm_scaled: return "hhm_scaled";
    case LambdaRule::linear: return "linear";
  }
  throw std::logic_error("lambda_rule_name: unhandled enum value");
}

double lambda_for_n(LambdaRule rule, double coefficient, std::size_t n, std::size_t k) {
  double nn = static_cast<double>(n);
  switch (rule) {
    case LambdaRule::none: return 0.0;
    case LambdaRule::o_of_n: return coefficient * std::pow(nn, 0.4);
    case LambdaRule::sqrt_n_lambda0: return coefficient * std::sqrt(nn);
    case LambdaRule::hhm_scaled:
      return coefficient * std::pow(nn, 0.4) / std::sqrt(static_cast<double>(std::max<std::size_t>(k, 1)));
    case LambdaRule::linear: return coefficient * nn;
  }
  throw std::logic_error("lambda_for_n: unhandled enum value");
}

std::vector<ConsistencyRow> simulate_consistency(const SimScenario& scenario,
                                                 const PenaltySpec& spec_shape) {
  PenaltySpec spec = spec_shape;
  const auto p = static_cast<Eigen::Index>(scenario.true_w.size());
  if (p == 0) throw std::invalid_argument("simulate_consistency: empty true_w");
  Eigen::VectorXd w0(p);
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    w0(j) = scenario.true_w[static_cast<std::size_t>(j)];
    if (w0(j) != 0.0) ++k;
  }

  std::vector<ConsistencyRow> table;
  for (std::size_t ni = 0; ni < scenario.n_grid.size(); ++ni) {
    const std::size_t n = scenario.n_grid[ni];
    spec.lambda = lambda_for_n(scenario.lambda_rule, scenario.lambda_coefficient, n, k);
    double sum = 0.0, sumsq = 0.0;
    int completed = 0;
    for (int trial = 0; trial < scenario.trials; ++trial) {
      auto g = rng::stream(scenario.seed, ni + 1, static_cast<std::uint64_t>(trial));
      Dataset d;
      d.X.resize(static_cast<Eigen::Index>(n), p);
      d.y.resize(static_cast<Eigen::Index>(n));
      for (Eigen::Index i = 0; i < d.X.rows(); ++i)
        for (Eigen::Index j = 0; j < p; ++j) d.X(i, j) = rng::normal(g);
      for (Eigen::Index i = 0; i < d.y.size(); ++i)
        d.y(i) = d.X.row(i).dot(w0) + scenario.noise_sd * rng::normal(g);
      SolverConfig cfg;
      cfg.max_iters = 300;
      cfg.tol = 1e-9;
      try {
        FitResult fit = fit_penalized_ls(d, spec, cfg);
        double err = (fit.weights - w0).norm();
        sum += err;
        sumsq += err * err;
        ++completed;
      } catch (const DivergenceError&) {
        // diverged trial becomes a missing cell; the row records how many
        // trials actually contributed
      }
    }
    ConsistencyRow row;
    row.n = n;
    row.trials = completed;
    if (completed > 0) {
      row.mean_error = sum / completed;
      row.sd_error = std::sqrt(
          std::max(0.0, sumsq / completed - row.mean_error * row.mean_error));
    }
    row.lambda_rule = lambda_rule_name(scenario.lambda_rule);
    table.push_back(row);
  }
  return table;
}

std::vector<SqrtnBiasRow> simulate_sqrtn_bias(const std::vector<double>& true_w,
                                              double noise_sd, std::size_t n,
                                              double lambda0, int trials,
                                              std::uint64_t seed,
                                              const PenaltySpec& spec_shape) {
  if (true_w.empty()) throw std::invalid_argument("simulate_sqrtn_bias: empty true_w");
  PenaltySpec spec = spec_shape;
  // lambda_n = lambda0*sqrt(n) on the unnormalized objective; the
  // per-coordinate orthonormal reduction divides by n
  spec.lambda = lambda0 * std::sqrt(static_cast<double>(n)) / static_cast<double>(n);
  const double sqn = std::sqrt(static_cast<double>(n));

  std::vector<SqrtnBiasRow> rows;
  for (std::size_t j = 0; j < true_w.size(); ++j) {
    const double wj = true_w[j];
    double sum_cv = 0.0, sum_raw = 0.0;
    int zeros = 0;
    for (int trial = 0; trial < trials; ++trial) {
      auto g = rng::stream(seed, j + 1, static_cast<std::uint64_t>(trial));
      double w_hat0 = wj + noise_sd / sqn * rng::normal(g);
      double w_hat = prox_scalar(spec, w_hat0).global_min;
      sum_raw += sqn * (w_hat - wj);
      sum_cv += sqn * (w_hat - w_hat0);
      if (w_hat == 0.0) ++zeros;
    }
    SqrtnBiasRow row;
    row.family = family_name(spec.family);
    row.w = wj;
    if (wj == 0.0) {
      row.theoretical_factor = 0.0;
    } else if (spec.family == Family::l1) {
      row.theoretical_factor = 1.0;
    } else if (spec.family == Family::laplace || spec.family == Family::arctan) {
      row.theoretical_factor = bias_factor(spec, wj);
    } else {
      row.theoretical_factor = std::numeric_limits<double>::quiet_NaN();
    }
    row.empirical_bias = sum_cv / trials;
    row.empirical_bias_raw = sum_raw / trials;
    row.zero_frequency = static_cast<double>(zeros) / trials;
    rows.push_back(row);
  }
  return rows;
}

ApproxError approximation_error(ApproxKind kind, double eps, double a) {
  if (!(eps > 0.0)) throw std::invalid_argument("approximation_error: eps must be > 0");
  if (!(a > 1.0)) throw std::invalid_argument("approximation_error: a must be > 1");
  ApproxError out;
  switch (kind) {
    case ApproxKind::bridge: {
      auto f = [eps](double x) { return std::pow(x, eps); };
      out.numeric_error = std::fabs(integrate(f, a, a + 1.0) - 1.0);
      out.paper_approx = std::pow(a, eps) - 1.0;
      return out;
    }
    case ApproxKind::laplace: {
      if (eps >= 1.0)
        throw std::invalid_argument("approximation_error: laplace needs eps in (0,1)");
      double log_eps = std::log(eps);
      auto f = [log_eps](double x) { return -std::expm1(x * log_eps); };
      out.numeric_error = std::fabs(integrate(f, a, a + 1.0) - 1.0);
      out.paper_approx = std::exp(a * log_eps);
      return out;
    }
    case ApproxKind::arctan: {
      double gamma = 1.0 / eps;
      auto f = [gamma](double x) { return 2.0 / kPi * std::atan(gamma * x); };
      out.numeric_error = std::fabs(integrate(f, a, a + 1.0) - 1.0);
      out.paper_approx = std::fabs(1.0 - 2.0 / kPi * std::atan(gamma * a));
      return out;
    }
  }
  throw std::logic_error("approximation_error: unhandled kind");
}

std::pair<double, double> penalty_perturbation_bound(const PenaltySpec& spec,
                                                     const Eigen::VectorXd& w,
                                                     const Eigen::VectorXd& w0) {
  spec.validate();
  if (w.size() != w0.size())
    throw std::invalid_argument("penalty_perturbation_bound: size mismatch");
  if (spec.family != Family::laplace && spec.family != Family::arctan)
    throw std::invalid_argument("penalty_perturbation_bound: laplace or arctan only");
  double lhs = 0.0, norm_sq = 0.0;
  std::size_t k = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w0(j) == 0.0) continue;
    ++k;
    lhs += penalty_value(spec, w(j)) - penalty_value(spec, w0(j));
    double d = w(j) - w0(j);
    norm_sq += d * d;
  }
  double L = spec.family == Family::laplace ? -std::log(spec.epsilon)
                                            : 2.0 * spec.gamma / kPi;
  double bound = spec.lambda * L * std::sqrt(static_cast<double>(k)) * std::sqrt(norm_sq);
  return {std::fabs(lhs), bound};
}

}  // namespace ncreg
