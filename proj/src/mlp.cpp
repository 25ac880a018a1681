#include "ncreg/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "ncreg/rng.hpp"
#include "ncreg/solvers.hpp"

namespace ncreg {

namespace {

double sgn(double t) { return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0); }

// Slope of the penalty at |w| = x, as used by the clipped per-weight step.
// At x = 0 this is the right derivative: the strongest pull the penalty can
// exert on a zero weight, and the re-activation threshold for the loss
// gradient.
double penalty_pull(const PenaltySpec& spec, double x) {
  const double lam = spec.lambda;
  if (lam == 0.0) return 0.0;
  switch (spec.family) {
    case Family::none:
      return 0.0;
    case Family::l1:
      return lam;
    case Family::l2:
      return 2.0 * lam * x;
    case Family::bridge:
      if (spec.kappa == 1.0) return lam;
      if (x == 0.0)
        return spec.kappa > 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
      return lam * spec.kappa * std::pow(x, spec.kappa - 1.0);
    case Family::capped_l1:
      return x < spec.c ? lam / spec.c : 0.0;
    default:
      break;
  }
  if (x == 0.0) return lipschitz_bound(spec);
  return penalty_deriv(spec, x);
}

struct Cache {
  std::vector<Eigen::MatrixXd> a;  // a[0] = input, columns are samples
  std::vector<Eigen::MatrixXd> z;  // pre-activations per layer
  Eigen::MatrixXd prob;            // softmax of the last layer
};

void forward(const MLPParams& P, const Eigen::MatrixXd& Xcols, Cache& c) {
  const std::size_t L = P.W.size();
  c.a.assign(L + 1, Eigen::MatrixXd());
  c.z.assign(L, Eigen::MatrixXd());
  c.a[0] = Xcols;
  for (std::size_t l = 0; l < L; ++l) {
    c.z[l] = P.W[l] * c.a[l];
    c.z[l].colwise() += P.b[l];
    c.a[l + 1] = (l + 1 < L) ? c.z[l].cwiseMax(0.0) : c.z[l];
  }
  c.prob = c.a[L];
  for (Eigen::Index j = 0; j < c.prob.cols(); ++j) {
    double m = c.prob.col(j).maxCoeff();
    c.prob.col(j) = (c.prob.col(j).array() - m).exp();
    c.prob.col(j) /= c.prob.col(j).sum();
  }
}

// gradient of mean cross entropy over the batch
void backward(const MLPParams& P, const Cache& c, const std::vector<int>& labels,
              std::vector<Eigen::MatrixXd>& gW, std::vector<Eigen::VectorXd>& gb) {
  const std::size_t L = P.W.size();
  const auto B = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd delta = c.prob;
  for (Eigen::Index j = 0; j < B; ++j) delta(labels[j], j) -= 1.0;
  delta /= static_cast<double>(B);
  gW.resize(L);
  gb.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    gW[l] = delta * c.a[l].transpose();
    gb[l] = delta.rowwise().sum();
    if (l > 0)
      delta = (P.W[l].transpose() * delta)
                  .cwiseProduct((c.z[l - 1].array() > 0.0).cast<double>().matrix());
  }
}

double total_ce(const MLPParams& P, const Eigen::MatrixXd& Xcols,
                const std::vector<int>& labels) {
  Cache c;
  forward(P, Xcols, c);
  double s = 0.0;
  for (Eigen::Index j = 0; j < Xcols.cols(); ++j)
    s -= std::log(c.prob(labels[static_cast<std::size_t>(j)], j));
  return s;
}

double error_rate(const MLPParams& P, const Eigen::MatrixXd& Xcols,
                  const std::vector<int>& labels) {
  Cache c;
  forward(P, Xcols, c);
  Eigen::Index wrong = 0;
  for (Eigen::Index j = 0; j < Xcols.cols(); ++j) {
    Eigen::Index arg = 0;
    c.a.back().col(j).maxCoeff(&arg);
    if (arg != labels[static_cast<std::size_t>(j)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(Xcols.cols());
}

int label_of(double yv, int classes, const char* who) {
  int li = static_cast<int>(std::lround(yv));
  if (std::fabs(yv - li) > 1e-9 || li < 0 || li >= classes)
    throw std::invalid_argument(std::string(who) + ": label " + std::to_string(yv) +
                                " is not an integer in [0, " +
                                std::to_string(classes) + ")");
  return li;
}

void gather_cols(const Dataset& d, const std::vector<Eigen::Index>& idx,
                 int classes, Eigen::MatrixXd& Xc, std::vector<int>& lab,
                 const char* who) {
  Xc.resize(d.p(), static_cast<Eigen::Index>(idx.size()));
  lab.resize(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    Xc.col(static_cast<Eigen::Index>(k)) = d.X.row(idx[k]).transpose();
    lab[k] = label_of(d.y(idx[k]), classes, who);
  }
}

}  // namespace

void MLPConfig::validate() const {
  if (layer_sizes.size() < 3)
    throw std::invalid_argument(
        "MLPConfig: need input, at least one hidden, and output layer sizes");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("MLPConfig: layer sizes must be positive");
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size < 1");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs < 1");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience < 1");
  if (!(lr_min > 0.0) || !(lr_min <= lr_max))
    throw std::invalid_argument("TrainConfig: need 0 < lr_min <= lr_max");
}

LRSchedule lr_schedule_from_name(const std::string& name) {
  if (name == "triangular") return LRSchedule::triangular;
  if (name == "constant") return LRSchedule::constant;
  throw std::invalid_argument("unknown lr schedule: " + name);
}

std::string lr_schedule_name(LRSchedule s) {
  return s == LRSchedule::triangular ? "triangular" : "constant";
}

MLPParams init_weights(const MLPConfig& config) {
  config.validate();
  MLPParams P;
  const std::size_t L = config.layer_sizes.size() - 1;
  P.W.resize(L);
  P.b.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const int fan_in = config.layer_sizes[l];
    const int fan_out = config.layer_sizes[l + 1];
    const double sd = std::sqrt(4.0 / (fan_in + fan_out));
    auto g = rng::stream(config.seed, 0x696e69, l);  // one stream per layer
    P.W[l].resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < P.W[l].rows(); ++i)
      for (Eigen::Index j = 0; j < P.W[l].cols(); ++j)
        P.W[l](i, j) = sd * rng::normal(g);
    P.b[l] = Eigen::VectorXd::Zero(fan_out);
  }
  return P;
}

double triangular_lr(int epoch, int total, double lr_min, double lr_max) {
  if (epoch < 0 || epoch >= total)
    throw std::invalid_argument("triangular_lr: epoch outside [0, total)");
  const double half = total / 2.0;
  const double x = static_cast<double>(epoch);
  if (x <= half) return lr_min + (lr_max - lr_min) * x / half;
  return lr_min + (lr_max - lr_min) * (total - x) / (total - half);
}

TrainResult train_mlp(const Dataset& data, const MLPConfig& mlp,
                      const TrainConfig& train, const PenaltySpec& spec) {
  mlp.validate();
  train.validate();
  spec.validate();
  if (data.p() != mlp.layer_sizes.front())
    throw std::invalid_argument("train_mlp: dataset width does not match input layer");
  const int classes = mlp.layer_sizes.back();

  Eigen::MatrixXd Xtr, Xva, Xte;
  std::vector<int> ytr, yva, yte;
  gather_cols(data, data.indices(Role::train), classes, Xtr, ytr, "train_mlp");
  gather_cols(data, data.indices(Role::validation), classes, Xva, yva, "train_mlp");
  gather_cols(data, data.indices(Role::test), classes, Xte, yte, "train_mlp");
  if (ytr.empty() || yva.empty() || yte.empty())
    throw std::invalid_argument(
        "train_mlp: needs nonempty train, validation, and test splits");

  MLPParams P = init_weights(mlp);
  const std::size_t L = P.W.size();
  const auto n_train = static_cast<Eigen::Index>(ytr.size());

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  std::iota(order.begin(), order.end(), 0);

  std::vector<Eigen::MatrixXd> gW;
  std::vector<Eigen::VectorXd> gb;
  Eigen::MatrixXd Xb;
  std::vector<int> yb;

  double best_val = std::numeric_limits<double>::infinity();
  MLPParams best = P;
  int best_epoch = 0, stale = 0, epochs_run = 0;
  std::vector<double> val_trace;

  for (int epoch = 0; epoch < train.max_epochs; ++epoch) {
    const double lr =
        train.lr_schedule == LRSchedule::triangular
            ? triangular_lr(epoch, train.max_epochs, train.lr_min, train.lr_max)
            : train.lr_min;
    auto g = rng::stream(train.seed, 0x657063, static_cast<std::uint64_t>(epoch));
    rng::shuffle(order, g);

    for (Eigen::Index start = 0; start < n_train; start += train.batch_size) {
      const Eigen::Index bsz = std::min<Eigen::Index>(train.batch_size, n_train - start);
      Xb.resize(data.p(), bsz);
      yb.resize(static_cast<std::size_t>(bsz));
      for (Eigen::Index k = 0; k < bsz; ++k) {
        Xb.col(k) = Xtr.col(order[static_cast<std::size_t>(start + k)]);
        yb[static_cast<std::size_t>(k)] =
            ytr[static_cast<std::size_t>(order[static_cast<std::size_t>(start + k)])];
      }
      Cache c;
      forward(P, Xb, c);
      double batch_ce = 0.0;
      for (Eigen::Index j = 0; j < bsz; ++j)
        batch_ce -= std::log(c.prob(yb[static_cast<std::size_t>(j)], j));
      batch_ce /= static_cast<double>(bsz);
      if (!std::isfinite(batch_ce))
        throw DivergenceError(
            "train_mlp: non-finite batch loss at epoch " + std::to_string(epoch),
            val_trace);
      backward(P, c, yb, gW, gb);
      for (std::size_t l = 0; l < L; ++l) {
        P.b[l] -= lr * gb[l];
        for (Eigen::Index i = 0; i < P.W[l].rows(); ++i)
          for (Eigen::Index j = 0; j < P.W[l].cols(); ++j) {
            const double u = P.W[l](i, j) - lr * gW[l](i, j);
            const double au = std::fabs(u);
            const double pull = lr * penalty_pull(spec, au);
            P.W[l](i, j) = au > pull ? sgn(u) * (au - pull) : 0.0;
          }
      }
    }

    const double val = total_ce(P, Xva, yva);
    if (!std::isfinite(val))
      throw DivergenceError(
          "train_mlp: non-finite validation loss at epoch " + std::to_string(epoch),
          val_trace);
    val_trace.push_back(val);
    epochs_run = epoch + 1;
    if (val < best_val) {
      best_val = val;
      best = P;
      best_epoch = epoch;
      stale = 0;
    } else if (++stale >= train.patience) {
      break;
    }
  }

  TrainResult out;
  out.best_validation_loss = best_val;
  out.epochs_run = epochs_run;
  out.best_epoch = best_epoch;
  out.test_error_rate = error_rate(best, Xte, yte);

  std::size_t n_weights = 0, n_zero = 0;
  double abs_sum = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    n_weights += static_cast<std::size_t>(best.W[l].size());
    for (Eigen::Index i = 0; i < best.W[l].size(); ++i) {
      double w = best.W[l].data()[i];
      if (w == 0.0) ++n_zero;
      abs_sum += std::fabs(w);
    }
  }
  out.sparsity_fraction = static_cast<double>(n_zero) / static_cast<double>(n_weights);
  out.mean_abs_weight = abs_sum / static_cast<double>(n_weights);
  out.weight_snapshot.reserve(n_weights);
  for (std::size_t l = 0; l < L; ++l)
    out.weight_snapshot.insert(out.weight_snapshot.end(), best.W[l].data(),
                               best.W[l].data() + best.W[l].size());
  for (std::size_t l = 0; l < L; ++l)
    out.weight_snapshot.insert(out.weight_snapshot.end(), best.b[l].data(),
                               best.b[l].data() + best.b[l].size());
  return out;
}

double gradient_check(const MLPConfig& mlp, const Dataset& data,
                      const PenaltySpec& spec) {
  mlp.validate();
  spec.validate();
  if (data.p() != mlp.layer_sizes.front())
    throw std::invalid_argument("gradient_check: dataset width does not match input layer");
  const int classes = mlp.layer_sizes.back();
  const auto n = data.n();
  if (n == 0) throw std::invalid_argument("gradient_check: empty dataset");

  Eigen::MatrixXd Xc(data.p(), n);
  std::vector<int> lab(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Xc.col(i) = data.X.row(i).transpose();
    lab[static_cast<std::size_t>(i)] = label_of(data.y(i), classes, "gradient_check");
  }

  MLPParams P = init_weights(mlp);
  const std::size_t L = P.W.size();
  for (std::size_t l = 0; l < L; ++l)
    for (Eigen::Index i = 0; i < P.W[l].size(); ++i) {
      double& w = P.W[l].data()[i];
      w = w >= 0.0 ? w + 0.05 : w - 0.05;  // keep probes clear of the |w| kink
    }

  Cache c;
  forward(P, Xc, c);
  std::vector<Eigen::MatrixXd> gW;
  std::vector<Eigen::VectorXd> gb;
  backward(P, c, lab, gW, gb);
  for (std::size_t l = 0; l < L; ++l)
    for (Eigen::Index i = 0; i < gW[l].size(); ++i)
      gW[l].data()[i] += penalty_deriv(spec, P.W[l].data()[i]);

  auto objective = [&]() {
    double f = total_ce(P, Xc, lab) / static_cast<double>(n);
    for (std::size_t l = 0; l < L; ++l)
      for (Eigen::Index i = 0; i < P.W[l].size(); ++i)
        f += penalty_value(spec, P.W[l].data()[i]);
    return f;
  };

  const double h = 1e-5;
  double worst = 0.0;
  auto probe = [&](double& theta, double analytic) {
    const double saved = theta;
    theta = saved + h;
    const double fp = objective();
    theta = saved - h;
    const double fm = objective();
    theta = saved;
    const double fd = (fp - fm) / (2.0 * h);
    const double rel = std::fabs(analytic - fd) /
                       std::max({1.0, std::fabs(analytic), std::fabs(fd)});
    worst = std::max(worst, rel);
  };
  for (std::size_t l = 0; l < L; ++l) {
    for (Eigen::Index i = 0; i < P.W[l].size(); ++i)
      probe(P.W[l].data()[i], gW[l].data()[i]);
    for (Eigen::Index i = 0; i < P.b[l].size(); ++i)
      probe(P.b[l].data()[i], gb[l].data()[i]);
  }
  return worst;
}

}  // namespace ncreg
