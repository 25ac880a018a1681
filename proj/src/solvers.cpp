#include "ncreg/solvers.hpp"

#include <cmath>
#include <limits>

#include "ncreg/prox.hpp"

namespace ncreg {

namespace {

double stable_log1pexp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

struct SmoothLoss {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  Loss kind;

  double value(const Eigen::VectorXd& w) const {
    Eigen::VectorXd eta = X * w;
    if (kind == Loss::least_squares) return (y - eta).squaredNorm();
    double v = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
      v += stable_log1pexp(eta(i)) - y(i) * eta(i);
    return v;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& w) const {
    Eigen::VectorXd eta = X * w;
    if (kind == Loss::least_squares) return 2.0 * (X.transpose() * (eta - y));
    Eigen::VectorXd p(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) p(i) = 1.0 / (1.0 + std::exp(-eta(i)));
    return X.transpose() * (p - y);
  }

  // upper bound on the Hessian spectral norm: 2*eigmax(X'X) for least
  // squares, eigmax(X'X)/4 for logistic; eigmax by 50 power-iteration steps
  double lipschitz() const {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(X.cols()).normalized();
    double eig = 0.0;
    for (int it = 0; it < 50; ++it) {
      Eigen::VectorXd u = X.transpose() * (X * v);
      eig = u.norm();
      if (eig <= 0.0) break;
      v = u / eig;
    }
    if (eig <= 0.0) eig = 1.0;
    return kind == Loss::least_squares ? 2.0 * eig : 0.25 * eig;
  }
};

double penalty_sum(const PenaltySpec& spec, const Eigen::VectorXd& w) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < w.size(); ++j) s += penalty_value(spec, w(j));
  return s;
}

int count_nonzero(const Eigen::VectorXd& w, double zero_tol) {
  int k = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j)
    if (std::fabs(w(j)) > zero_tol) ++k;
  return k;
}

struct BestTracker {
  Eigen::VectorXd w;
  double objective = std::numeric_limits<double>::infinity();
  void offer(const Eigen::VectorXd& cand, double obj) {
    if (obj < objective) {
      objective = obj;
      w = cand;
    }
  }
};

FitResult run_cgd(const SmoothLoss& loss, const PenaltySpec& spec,
                  const SolverConfig& cfg) {
  const Eigen::Index p = loss.X.cols();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double sm = loss.value(w);
  double obj = sm + penalty_sum(spec, w);
  std::vector<double> trace = {obj};
  BestTracker best;
  best.offer(w, obj);

  double eta = 1.0 / loss.lipschitz();
  bool converged = false;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    Eigen::VectorXd g = loss.grad(w);
    Eigen::VectorXd w_new(p);
    double sm_new = 0.0;
    while (true) {
      Eigen::VectorXd v = w - eta * g;
      for (Eigen::Index j = 0; j < p; ++j)
        w_new(j) = prox_scalar(spec, v(j), 2.0 * eta).global_min;
      sm_new = loss.value(w_new);
      Eigen::VectorXd d = w_new - w;
      double bound = sm + g.dot(d) + d.squaredNorm() / (2.0 * eta) +
                     1e-12 * std::max(1.0, std::fabs(sm));
      if (sm_new <= bound) break;
      eta *= 0.5;
      if (eta < 1e-18) throw std::runtime_error("cgd: backtracking step size underflow");
    }
    double obj_new = sm_new + penalty_sum(spec, w_new);
    if (!std::isfinite(obj_new))
      throw DivergenceError("cgd: objective became non-finite at iteration " +
                                std::to_string(it + 1),
                            trace);
    trace.push_back(obj_new);
    best.offer(w_new, obj_new);
    double change = std::fabs(obj - obj_new);
    w = std::move(w_new);
    sm = sm_new;
    obj = obj_new;
    if (change <= cfg.tol * std::max(1.0, std::fabs(obj))) {
      converged = true;
      ++it;
      break;
    }
  }

  FitResult out;
  out.weights = best.w;
  out.objective_trace = std::move(trace);
  out.n_nonzero = count_nonzero(out.weights, cfg.zero_tol);
  out.converged = converged;
  out.iterations = it;
  return out;
}

FitResult run_dca(const SmoothLoss& loss, const PenaltySpec& spec,
                  const SolverConfig& cfg) {
  const Eigen::Index p = loss.X.cols();
  // the convex part of every supported split is alpha*|t|
  const double alpha = dc_components_penalty_scale(spec, 1.0).g_value;

  Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
  double obj = loss.value(w) + penalty_sum(spec, w);
  std::vector<double> trace = {obj};
  BestTracker best;
  best.offer(w, obj);

  const double L = loss.lipschitz();
  bool converged = false;
  int outer = 0;
  for (; outer < cfg.max_iters; ++outer) {
    Eigen::VectorXd hp(p);
    for (Eigen::Index j = 0; j < p; ++j)
      hp(j) = dc_components_penalty_scale(spec, w(j)).h_deriv;

    // inner l1 problem: smooth(u) - hp.u + alpha*||u||_1, ISTA from u = w.
    // Starting at the incumbent keeps the outer objective monotone even when
    // the inner solve stops early.
    Eigen::VectorXd u = w;
    double ism = loss.value(u) - hp.dot(u);
    double iobj = ism + alpha * u.lpNorm<1>();
    double eta = 1.0 / L;
    for (int in = 0; in < cfg.dca_inner_max_iters; ++in) {
      Eigen::VectorXd g = loss.grad(u) - hp;
      Eigen::VectorXd u_new(p);
      double ism_new = 0.0;
      while (true) {
        Eigen::VectorXd v = u - eta * g;
        for (Eigen::Index j = 0; j < p; ++j) {
          double t = eta * alpha;
          u_new(j) = (v(j) > t) ? v(j) - t : (v(j) < -t ? v(j) + t : 0.0);
        }
        ism_new = loss.value(u_new) - hp.dot(u_new);
        Eigen::VectorXd d = u_new - u;
        double bound = ism + g.dot(d) + d.squaredNorm() / (2.0 * eta) +
                       1e-12 * std::max(1.0, std::fabs(ism));
        if (ism_new <= bound) break;
        eta *= 0.5;
        if (eta < 1e-18) throw std::runtime_error("dca: backtracking step size underflow");
      }
      double iobj_new = ism_new + alpha * u_new.lpNorm<1>();
      double change = std::fabs(iobj - iobj_new);
      u = std::move(u_new);
      ism = ism_new;
      iobj = iobj_new;
      if (change <= cfg.dca_inner_tol * std::max(1.0, std::fabs(iobj))) break;
    }

    double obj_new = loss.value(u) + penalty_sum(spec, u);
    if (!std::isfinite(obj_new))
      throw DivergenceError("dca: objective became non-finite at outer iteration " +
                                std::to_string(outer + 1),
                            trace);
    trace.push_back(obj_new);
    best.offer(u, obj_new);
    double change = std::fabs(obj - obj_new);
    w = std::move(u);
    obj = obj_new;
    if (change <= cfg.tol * std::max(1.0, std::fabs(obj))) {
      converged = true;
      ++outer;
      break;
    }
  }

  FitResult out;
  out.weights = best.w;
  out.objective_trace = std::move(trace);
  out.n_nonzero = count_nonzero(out.weights, cfg.zero_tol);
  out.converged = converged;
  out.iterations = outer;
  return out;
}

FitResult fit_impl(const Dataset& data, const PenaltySpec& spec, const SolverConfig& cfg,
                   Loss kind) {
  spec.validate();
  if (data.n() == 0 || data.p() == 0)
    throw std::invalid_argument("fit: empty design matrix");
  SmoothLoss loss{data.X, data.y, kind};
  return cfg.algorithm == Algorithm::cgd ? run_cgd(loss, spec, cfg)
                                         : run_dca(loss, spec, cfg);
}

}  // namespace

double penalized_objective(const Dataset& data, const Eigen::VectorXd& w,
                           const PenaltySpec& spec, Loss loss) {
  if (w.size() != data.p())
    throw std::invalid_argument("penalized_objective: weight size mismatch");
  SmoothLoss sl{data.X, data.y, loss};
  return sl.value(w) + penalty_sum(spec, w);
}

nlohmann::json to_json(const FitResult& r) {
  nlohmann::json j;
  j["weights"] = std::vector<double>(r.weights.data(), r.weights.data() + r.weights.size());
  j["objective_trace"] = r.objective_trace;
  j["n_nonzero"] = r.n_nonzero;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  return j;
}

FitResult fit_penalized_ls(const Dataset& data, const PenaltySpec& spec,
                           const SolverConfig& config) {
  return fit_impl(data, spec, config, Loss::least_squares);
}

FitResult fit_penalized_logistic(const Dataset& data, const PenaltySpec& spec,
                                 const SolverConfig& config) {
  return fit_impl(data, spec, config, Loss::logistic);
}

Eigen::VectorXd ols_solution(const Dataset& data) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.X);
  if (qr.rank() < data.p())
    throw std::runtime_error("ols_solution: design matrix is rank deficient (rank " +
                             std::to_string(qr.rank()) + " < " + std::to_string(data.p()) +
                             ")");
  return qr.solve(data.y);
}

}  // namespace ncreg
