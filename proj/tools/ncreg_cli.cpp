#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ncreg/asymptotics.hpp"
#include "ncreg/dataset.hpp"
#include "ncreg/idx.hpp"
#include "ncreg/mlp.hpp"
#include "ncreg/penalty.hpp"
#include "ncreg/properties.hpp"
#include "ncreg/prox.hpp"
#include "ncreg/solvers.hpp"
#include "ncreg/sweep.hpp"
#include "ncreg/version.hpp"

namespace {

using nlohmann::json;

struct GlobalOpts {
  std::uint64_t seed = 1;
  std::string out;
  bool json_errors = false;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << body;
  if (!out) throw std::runtime_error(path + ": write failed");
}

// The report body goes to --out (or stdout when --out is absent). A manifest
// sidecar <out>.manifest.json records the canonical config, its digest, the
// seed set, the output paths with body digests, wall clock, and the toolkit
// version. Rerunning an identical config reproduces the body byte for byte;
// only the manifest's wall clock differs.
int emit(const GlobalOpts& g, const std::string& subcommand, const json& config,
         const std::vector<std::uint64_t>& seeds, const std::string& body,
         double wall_seconds) {
  if (g.out.empty()) {
    std::fwrite(body.data(), 1, body.size(), stdout);
    return 0;
  }
  write_file(g.out, body);
  json manifest{{"subcommand", subcommand},
                {"config", config},
                {"config_digest", fnv1a_hex(config.dump())},
                {"seeds", seeds},
                {"outputs", json::array({g.out})},
                {"output_digests", {{g.out, fnv1a_hex(body)}}},
                {"wall_clock_seconds", wall_seconds},
                {"version", NCREG_VERSION}};
  write_file(g.out + ".manifest.json", manifest.dump(2) + "\n");
  return 0;
}

struct PenaltyFlags {
  std::string family;
  double lambda = 0.0, epsilon = 0.0, gamma = 0.0, a = 0.0, b = 0.0;
  double kappa = 0.0, sigma = 0.0, c = 0.0;
  CLI::Option *o_epsilon = nullptr, *o_gamma = nullptr, *o_a = nullptr,
              *o_b = nullptr, *o_kappa = nullptr, *o_sigma = nullptr,
              *o_c = nullptr;
};

void add_penalty_flags(CLI::App* cmd, PenaltyFlags& pf, bool family_required) {
  auto* fam = cmd->add_option("--family", pf.family,
                              "none|l1|l2|bridge|scad|mcp|laplace|arctan|"
                              "geman_mcclure|log_penalty|capped_l1");
  if (family_required) fam->required();
  cmd->add_option("--lambda", pf.lambda, "penalty weight (>= 0)");
  pf.o_epsilon = cmd->add_option("--epsilon", pf.epsilon, "laplace base, in (0,1)");
  pf.o_gamma = cmd->add_option("--gamma", pf.gamma, "arctan slope (> 0)");
  pf.o_a = cmd->add_option("--a", pf.a, "scad shape (> 2)");
  pf.o_b = cmd->add_option("--b", pf.b, "mcp shape (> 0)");
  pf.o_kappa = cmd->add_option("--kappa", pf.kappa, "bridge exponent (> 0)");
  pf.o_sigma = cmd->add_option("--sigma", pf.sigma,
                               "geman_mcclure / log_penalty scale (> 0)");
  pf.o_c = cmd->add_option("--c", pf.c, "capped_l1 cap (> 0)");
}

void require_flag(const CLI::Option* opt, const char* flag,
                  const std::string& family) {
  if (opt->count() == 0)
    throw std::invalid_argument(std::string("missing ") + flag +
                                " (required for family " + family + ")");
}

ncreg::PenaltySpec build_spec(const PenaltyFlags& pf) {
  if (pf.family.empty())
    throw std::invalid_argument("--family is required here");
  ncreg::PenaltySpec spec;
  spec.family = ncreg::family_from_name(pf.family);
  spec.lambda = pf.lambda;
  spec.epsilon = pf.epsilon;
  spec.gamma = pf.gamma;
  spec.a = pf.a;
  spec.b = pf.b;
  spec.kappa = pf.kappa;
  spec.sigma = pf.sigma;
  spec.c = pf.c;
  switch (spec.family) {
    case ncreg::Family::laplace:
      require_flag(pf.o_epsilon, "--epsilon", pf.family);
      break;
    case ncreg::Family::arctan:
      require_flag(pf.o_gamma, "--gamma", pf.family);
      break;
    case ncreg::Family::scad:
      require_flag(pf.o_a, "--a", pf.family);
      break;
    case ncreg::Family::mcp:
      require_flag(pf.o_b, "--b", pf.family);
      break;
    case ncreg::Family::bridge:
      require_flag(pf.o_kappa, "--kappa", pf.family);
      break;
    case ncreg::Family::geman_mcclure:
    case ncreg::Family::log_penalty:
      require_flag(pf.o_sigma, "--sigma", pf.family);
      break;
    case ncreg::Family::capped_l1:
      require_flag(pf.o_c, "--c", pf.family);
      break;
    default:
      break;
  }
  spec.validate();
  return spec;
}

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= csv.size()) {
    std::size_t comma = csv.find(',', pos);
    std::string tok = csv.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": bad number '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

// ---------------------------------------------------------------- penalty

struct PenaltyCmd {
  PenaltyFlags pf;
  std::string grid = "-5:5:101";
};

int run_penalty(const GlobalOpts& g, const PenaltyCmd& cmd) {
  Timer timer;
  ncreg::PenaltySpec spec = build_spec(cmd.pf);
  double lo = 0.0, hi = 0.0;
  int n = 0;
  if (std::sscanf(cmd.grid.c_str(), "%lf:%lf:%d", &lo, &hi, &n) != 3 || n < 1 ||
      !(lo <= hi))
    throw std::invalid_argument("--grid expects lo:hi:n with lo <= hi and n >= 1");
  std::string body = "t,value\n";
  for (int i = 0; i < n; ++i) {
    double t = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    body += num(t) + "," + num(ncreg::penalty_value(spec, t)) + "\n";
  }
  json config{{"penalty", ncreg::to_json(spec)}, {"grid", cmd.grid}};
  return emit(g, "penalty", config, {}, body, timer.seconds());
}

// ------------------------------------------------------------------- prox

struct ProxCmd {
  PenaltyFlags pf;
  double w_hat = 0.0;
  double pen_scale = 1.0;
  bool animate = false;
};

int run_prox(const GlobalOpts& g, const ProxCmd& cmd) {
  Timer timer;
  ncreg::PenaltySpec spec = build_spec(cmd.pf);
  if (cmd.animate) {
    std::vector<double> lambdas{0.1};
    for (int l = 1; l <= 15; ++l) lambdas.push_back(l);
    std::vector<double> ws;
    ws.reserve(1201);
    for (int i = 0; i <= 1200; ++i) ws.push_back(-1.0 + 0.005 * i);
    ncreg::ObjectiveCurve curve =
        ncreg::objective_curve(spec, cmd.w_hat, lambdas, ws);
    std::string body = "w,lambda,objective\n";
    std::size_t k = 0;
    for (double lam : curve.lambda)
      for (double w : curve.w)
        body += num(w) + "," + num(lam) + "," + num(curve.objective[k++]) + "\n";
    json config{{"penalty", ncreg::to_json(spec)},
                {"w_hat", cmd.w_hat},
                {"animate_data", true}};
    return emit(g, "prox", config, {}, body, timer.seconds());
  }
  ncreg::ProxResult r = ncreg::prox_scalar(spec, cmd.w_hat, cmd.pen_scale);
  json out{{"penalty", ncreg::to_json(spec)},
           {"w_hat", cmd.w_hat},
           {"pen_scale", cmd.pen_scale},
           {"result", ncreg::to_json(r)}};
  json config{{"penalty", ncreg::to_json(spec)},
              {"w_hat", cmd.w_hat},
              {"pen_scale", cmd.pen_scale}};
  return emit(g, "prox", config, {}, out.dump(2) + "\n", timer.seconds());
}

// -------------------------------------------------------------- threshold

struct ThresholdCmd {
  PenaltyFlags pf;
  double w_hat = 0.0;
};

int run_threshold(const GlobalOpts& g, const ThresholdCmd& cmd) {
  Timer timer;
  ncreg::PenaltySpec spec = build_spec(cmd.pf);
  double lambda_star = ncreg::global_min_threshold(spec, cmd.w_hat);
  std::printf("lambda_star = %.10g\n", lambda_star);
  if (g.out.empty()) return 0;
  json out{{"penalty", ncreg::to_json(spec)},
           {"w_hat", cmd.w_hat},
           {"lambda_star", lambda_star}};
  json config{{"penalty", ncreg::to_json(spec)}, {"w_hat", cmd.w_hat}};
  return emit(g, "threshold", config, {}, out.dump(2) + "\n", timer.seconds());
}

// ------------------------------------------------------------- properties

struct PropertiesCmd {
  PenaltyFlags pf;
};

int run_properties(const GlobalOpts& g, const PropertiesCmd& cmd) {
  Timer timer;
  ncreg::PenaltySpec spec = build_spec(cmd.pf);
  ncreg::PropertyReport report = ncreg::check_properties(spec);
  std::printf("%-6s %-14s %-22s %s\n", "name", "verdict", "witness_t", "residual");
  for (const auto& [name, check] : report.checks)
    std::printf("%-6s %-14s %-22.12g %.12g\n", name.c_str(),
                ncreg::verdict_name(check.verdict).c_str(), check.witness_t,
                check.residual);
  if (report.sparsity_continuity_lambda)
    std::printf("sparsity/continuity lambda region: (%.12g, %.12g)\n",
                report.sparsity_continuity_lambda->first,
                report.sparsity_continuity_lambda->second);
  if (g.out.empty()) return 0;
  json config{{"penalty", ncreg::to_json(spec)}};
  return emit(g, "properties", config, {}, ncreg::to_json(report).dump(2) + "\n",
              timer.seconds());
}

// -------------------------------------------------------------------- fit

struct FitCmd {
  PenaltyFlags pf;
  std::string data;
  std::string loss = "ls";
  std::string algorithm = "cgd";
  int max_iters = 500;
  double tol = 1e-10;
};

int run_fit(const GlobalOpts& g, const FitCmd& cmd) {
  Timer timer;
  ncreg::PenaltySpec spec = build_spec(cmd.pf);
  ncreg::Dataset data = ncreg::load_csv(cmd.data);
  ncreg::SolverConfig config;
  if (cmd.algorithm == "cgd")
    config.algorithm = ncreg::Algorithm::cgd;
  else if (cmd.algorithm == "dca")
    config.algorithm = ncreg::Algorithm::dca;
  else
    throw std::invalid_argument("--algorithm must be cgd or dca");
  config.max_iters = cmd.max_iters;
  config.tol = cmd.tol;
  ncreg::FitResult fit;
  if (cmd.loss == "ls")
    fit = ncreg::fit_penalized_ls(data, spec, config);
  else if (cmd.loss == "logistic")
    fit = ncreg::fit_penalized_logistic(data, spec, config);
  else
    throw std::invalid_argument("--loss must be ls or logistic");
  json out = ncreg::to_json(fit);
  out["penalty"] = ncreg::to_json(spec);
  json cfg{{"penalty", ncreg::to_json(spec)},
           {"data", cmd.data},
           {"loss", cmd.loss},
           {"algorithm", cmd.algorithm},
           {"max_iters", cmd.max_iters},
           {"tol", cmd.tol}};
  return emit(g, "fit", cfg, {}, out.dump(2) + "\n", timer.seconds());
}

// ------------------------------------------------------------------- asym

struct AsymCmd {
  PenaltyFlags pf;
  std::string mode;  // consistency | bias | approx | factor
  std::string true_w = "3,1.5,0,0,2,0,0,0";
  double noise_sd = 1.0;
  std::string n_grid = "100,400,1600,6400";
  std::string rule = "o_of_n";
  double coefficient = 1.0;
  int trials = 500;
  std::size_t n = 10000;
  double lambda0 = 1.0;
  std::string kind = "laplace";
  double eps = 0.1;
  double a0 = 10.0;
  double w = 1.0;
};

int run_asym(const GlobalOpts& g, const AsymCmd& cmd) {
  Timer timer;
  if (cmd.mode == "consistency") {
    ncreg::PenaltySpec spec = build_spec(cmd.pf);
    ncreg::SimScenario scenario;
    scenario.true_w = parse_double_list(cmd.true_w, "--true-w");
    scenario.noise_sd = cmd.noise_sd;
    for (double nv : parse_double_list(cmd.n_grid, "--n-grid"))
      scenario.n_grid.push_back(static_cast<std::size_t>(nv));
    scenario.lambda_rule = ncreg::lambda_rule_from_name(cmd.rule);
    scenario.lambda_coefficient = cmd.coefficient;
    scenario.trials = cmd.trials;
    scenario.seed = g.seed;
    auto table = ncreg::simulate_consistency(scenario, spec);
    std::string body = "n,mean_error,sd_error,trials,lambda_rule\n";
    for (const auto& row : table)
      body += std::to_string(row.n) + "," + num(row.mean_error) + "," +
              num(row.sd_error) + "," + std::to_string(row.trials) + "," +
              row.lambda_rule + "\n";
    json config{{"mode", "consistency"},
                {"penalty", ncreg::to_json(spec)},
                {"true_w", scenario.true_w},
                {"noise_sd", cmd.noise_sd},
                {"n_grid", scenario.n_grid},
                {"rule", cmd.rule},
                {"coefficient", cmd.coefficient},
                {"trials", cmd.trials},
                {"seed", g.seed}};
    return emit(g, "asym", config, {g.seed}, body, timer.seconds());
  }
  if (cmd.mode == "bias") {
    ncreg::PenaltySpec spec = build_spec(cmd.pf);
    auto rows = ncreg::simulate_sqrtn_bias(
        parse_double_list(cmd.true_w, "--true-w"), cmd.noise_sd, cmd.n,
        cmd.lambda0, cmd.trials, g.seed, spec);
    std::string body =
        "family,w,theoretical_factor,empirical_bias,empirical_ratio,"
        "zero_frequency\n";
    for (const auto& row : rows) {
      double theoretical_bias =
          row.w == 0.0 ? 0.0
                       : -(cmd.lambda0 / 2.0) * (row.w > 0 ? 1.0 : -1.0) *
                             row.theoretical_factor;
      double ratio = theoretical_bias == 0.0
                         ? std::numeric_limits<double>::quiet_NaN()
                         : row.empirical_bias / theoretical_bias;
      body += row.family + "," + num(row.w) + "," + num(row.theoretical_factor) +
              "," + num(row.empirical_bias) + "," + num(ratio) + "," +
              num(row.zero_frequency) + "\n";
    }
    json config{{"mode", "bias"},
                {"penalty", ncreg::to_json(spec)},
                {"true_w", parse_double_list(cmd.true_w, "--true-w")},
                {"noise_sd", cmd.noise_sd},
                {"n", cmd.n},
                {"lambda0", cmd.lambda0},
                {"trials", cmd.trials},
                {"seed", g.seed}};
    return emit(g, "asym", config, {g.seed}, body, timer.seconds());
  }
  if (cmd.mode == "approx") {
    ncreg::ApproxKind kind;
    if (cmd.kind == "bridge")
      kind = ncreg::ApproxKind::bridge;
    else if (cmd.kind == "laplace")
      kind = ncreg::ApproxKind::laplace;
    else if (cmd.kind == "arctan")
      kind = ncreg::ApproxKind::arctan;
    else
      throw std::invalid_argument("--kind must be bridge, laplace, or arctan");
    ncreg::ApproxError err = ncreg::approximation_error(kind, cmd.eps, cmd.a0);
    std::string body = "kind,eps,a,numeric_error,closed_form_approx\n" +
                       cmd.kind + "," + num(cmd.eps) + "," + num(cmd.a0) + "," +
                       num(err.numeric_error) + "," + num(err.paper_approx) +
                       "\n";
    json config{{"mode", "approx"}, {"kind", cmd.kind}, {"eps", cmd.eps},
                {"a0", cmd.a0}};
    return emit(g, "asym", config, {}, body, timer.seconds());
  }
  if (cmd.mode == "factor") {
    ncreg::PenaltySpec spec = build_spec(cmd.pf);
    double factor = ncreg::bias_factor(spec, cmd.w);
    std::string body = "family,w,factor\n" + ncreg::family_name(spec.family) +
                       "," + num(cmd.w) + "," + num(factor) + "\n";
    json config{{"mode", "factor"}, {"penalty", ncreg::to_json(spec)},
                {"w", cmd.w}};
    return emit(g, "asym", config, {}, body, timer.seconds());
  }
  throw std::invalid_argument(
      "--mode must be consistency, bias, approx, or factor");
}

// ------------------------------------------------------------------ train

struct TrainCmd {
  PenaltyFlags pf;
  std::string data;
  std::string images, labels;
  std::string split = "2000:500:1000";
  std::string layers;
  int batch_size = 64;
  int max_epochs = 250;
  int patience = 20;
  double lr_min = 0.01;
  double lr_max = 0.25;
  std::string schedule = "triangular";
};

ncreg::Dataset load_train_data(const TrainCmd& cmd) {
  if (!cmd.data.empty()) return ncreg::load_csv(cmd.data);
  if (cmd.images.empty() || cmd.labels.empty())
    throw std::invalid_argument("train needs --data or both --images and --labels");
  int n_train = 0, n_val = 0, n_test = 0;
  if (std::sscanf(cmd.split.c_str(), "%d:%d:%d", &n_train, &n_val, &n_test) != 3 ||
      n_train < 1 || n_val < 1 || n_test < 1)
    throw std::invalid_argument("--split expects train:validation:test counts");
  std::size_t total =
      static_cast<std::size_t>(n_train) + static_cast<std::size_t>(n_val) +
      static_cast<std::size_t>(n_test);
  ncreg::Dataset d = ncreg::load_idx(cmd.images, cmd.labels, total);
  if (d.n() < static_cast<Eigen::Index>(total))
    throw std::runtime_error("idx files hold only " + std::to_string(d.n()) +
                             " records, --split wants " + std::to_string(total));
  for (Eigen::Index i = 0; i < d.n(); ++i)
    d.roles[static_cast<std::size_t>(i)] =
        i < n_train ? ncreg::Role::train
                    : (i < n_train + n_val ? ncreg::Role::validation
                                           : ncreg::Role::test);
  return d;
}

int run_train(const GlobalOpts& g, const TrainCmd& cmd) {
  Timer timer;
  ncreg::PenaltySpec spec =
      cmd.pf.family.empty() ? ncreg::PenaltySpec::none() : build_spec(cmd.pf);
  ncreg::Dataset data = load_train_data(cmd);

  ncreg::MLPConfig mlp;
  for (double v : parse_double_list(cmd.layers, "--layers"))
    mlp.layer_sizes.push_back(static_cast<int>(v));
  mlp.seed = g.seed;

  ncreg::TrainConfig train;
  train.batch_size = cmd.batch_size;
  train.max_epochs = cmd.max_epochs;
  train.patience = cmd.patience;
  train.lr_min = cmd.lr_min;
  train.lr_max = cmd.lr_max;
  train.lr_schedule = ncreg::lr_schedule_from_name(cmd.schedule);
  train.seed = g.seed;

  ncreg::TrainResult r = ncreg::train_mlp(data, mlp, train, spec);
  json out{{"test_error_rate", r.test_error_rate},
           {"best_validation_loss", r.best_validation_loss},
           {"epochs_run", r.epochs_run},
           {"best_epoch", r.best_epoch},
           {"sparsity_fraction", r.sparsity_fraction},
           {"mean_abs_weight", r.mean_abs_weight},
           {"n_parameters", r.weight_snapshot.size()}};
  json config{{"penalty", ncreg::to_json(spec)},
              {"data", cmd.data},
              {"images", cmd.images},
              {"labels", cmd.labels},
              {"split", cmd.split},
              {"layers", mlp.layer_sizes},
              {"batch_size", cmd.batch_size},
              {"max_epochs", cmd.max_epochs},
              {"patience", cmd.patience},
              {"lr_min", cmd.lr_min},
              {"lr_max", cmd.lr_max},
              {"schedule", cmd.schedule},
              {"seed", g.seed}};
  return emit(g, "train", config, {g.seed}, out.dump(2) + "\n", timer.seconds());
}

// ------------------------------------------------------------------ sweep

struct SweepCmd {
  std::string config_path;
};

int run_sweep(const GlobalOpts& g, const SweepCmd& cmd) {
  Timer timer;
  std::ifstream in(cmd.config_path);
  if (!in) throw std::runtime_error(cmd.config_path + ": cannot open");
  json config = json::parse(in);

  ncreg::Dataset data;
  if (config.contains("data_csv")) {
    data = ncreg::load_csv(config.at("data_csv").get<std::string>());
  } else {
    TrainCmd loader;
    loader.images = config.at("images").get<std::string>();
    loader.labels = config.at("labels").get<std::string>();
    if (config.contains("split"))
      loader.split = config.at("split").get<std::string>();
    data = load_train_data(loader);
  }

  ncreg::MLPConfig mlp;
  mlp.layer_sizes = config.at("layers").get<std::vector<int>>();

  ncreg::TrainConfig train;
  if (config.contains("train")) {
    const json& t = config.at("train");
    if (t.contains("batch_size")) train.batch_size = t.at("batch_size").get<int>();
    if (t.contains("max_epochs")) train.max_epochs = t.at("max_epochs").get<int>();
    if (t.contains("patience")) train.patience = t.at("patience").get<int>();
    if (t.contains("lr_min")) train.lr_min = t.at("lr_min").get<double>();
    if (t.contains("lr_max")) train.lr_max = t.at("lr_max").get<double>();
    if (t.contains("schedule"))
      train.lr_schedule =
          ncreg::lr_schedule_from_name(t.at("schedule").get<std::string>());
  }

  ncreg::PenaltySpec spec = ncreg::penalty_spec_from_json(config.at("penalty"));

  std::vector<double> grid;
  const json& gj = config.at("grid");
  if (gj.is_array()) {
    grid = gj.get<std::vector<double>>();
  } else {
    double lo = gj.at("lo").get<double>();
    double hi = gj.at("hi").get<double>();
    double step = gj.at("step").get<double>();
    if (step == 0.0 || (hi - lo) * step < 0.0)
      throw std::invalid_argument("sweep grid: step does not move lo toward hi");
    for (double v = lo; step > 0.0 ? v <= hi + 1e-9 : v >= hi - 1e-9; v += step)
      grid.push_back(v);
  }

  std::vector<std::uint64_t> seeds{1, 2, 3};
  if (config.contains("seeds"))
    seeds = config.at("seeds").get<std::vector<std::uint64_t>>();
  std::string dataset_id;
  if (config.contains("dataset_id"))
    dataset_id = config.at("dataset_id").get<std::string>();

  ncreg::SweepReport report =
      ncreg::lambda_sweep(data, mlp, train, spec, grid, seeds, dataset_id);
  return emit(g, "sweep", config, seeds, ncreg::sweep_csv(report),
              timer.seconds());
}

void emit_error(const GlobalOpts& g, const std::string& subcommand,
                const std::string& message, int code) {
  if (g.json_errors) {
    json err{{"error", message}, {"subcommand", subcommand}, {"exit_code", code}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
  } else {
    std::fprintf(stderr, "error: %s\n", message.c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  // best effort before parsing so parse failures honour the flag too
  for (int i = 1; i < argc; ++i)
    if (std::string(argv[i]) == "--json-errors") g.json_errors = true;

  CLI::App app{"nonconvex-penalty regression toolkit"};
  app.require_subcommand(1);
  app.add_option("--seed", g.seed, "base seed for stochastic subcommands");
  app.add_option("--out", g.out,
                 "write the report here (with a .manifest.json sidecar) "
                 "instead of stdout");
  app.add_flag("--json-errors", g.json_errors,
               "machine-readable error JSON on stderr");

  PenaltyCmd penalty_cmd;
  auto* penalty = app.add_subcommand("penalty", "evaluate a penalty over a grid");
  penalty->fallthrough();
  add_penalty_flags(penalty, penalty_cmd.pf, true);
  penalty->add_option("--grid", penalty_cmd.grid, "lo:hi:n (default -5:5:101)");

  ProxCmd prox_cmd;
  auto* prox = app.add_subcommand("prox", "scalar penalized quadratic minimizer");
  prox->fallthrough();
  add_penalty_flags(prox, prox_cmd.pf, true);
  prox->add_option("--w-hat", prox_cmd.w_hat, "unpenalized coordinate solution")
      ->required();
  prox->add_option("--pen-scale", prox_cmd.pen_scale, "multiplier on the penalty");
  prox->add_flag("--animate-data", prox_cmd.animate,
                 "emit the objective surface CSV over lambda in {0.1,1..15}, "
                 "w in [-1,5] step 0.005");

  ThresholdCmd threshold_cmd;
  auto* threshold = app.add_subcommand(
      "threshold", "lambda where the global prox minimizer hits 0");
  threshold->fallthrough();
  add_penalty_flags(threshold, threshold_cmd.pf, true);
  threshold->add_option("--w-hat", threshold_cmd.w_hat, "unpenalized solution")
      ->required();

  PropertiesCmd properties_cmd;
  auto* properties =
      app.add_subcommand("properties", "run the penalty property checks");
  properties->fallthrough();
  add_penalty_flags(properties, properties_cmd.pf, true);

  FitCmd fit_cmd;
  auto* fit = app.add_subcommand("fit", "penalized regression / classification");
  fit->fallthrough();
  add_penalty_flags(fit, fit_cmd.pf, true);
  fit->add_option("--data", fit_cmd.data, "CSV dataset (last column = response)")
      ->required();
  fit->add_option("--loss", fit_cmd.loss, "ls|logistic");
  fit->add_option("--algorithm", fit_cmd.algorithm, "cgd|dca");
  fit->add_option("--max-iters", fit_cmd.max_iters, "outer iteration cap");
  fit->add_option("--tol", fit_cmd.tol, "relative objective change stop");

  AsymCmd asym_cmd;
  auto* asym = app.add_subcommand("asym", "asymptotics simulations and checks");
  asym->fallthrough();
  add_penalty_flags(asym, asym_cmd.pf, false);
  asym->add_option("--mode", asym_cmd.mode, "consistency|bias|approx|factor")
      ->required();
  asym->add_option("--true-w", asym_cmd.true_w, "comma list");
  asym->add_option("--noise-sd", asym_cmd.noise_sd, "noise standard deviation");
  asym->add_option("--n-grid", asym_cmd.n_grid, "comma list of sample sizes");
  asym->add_option("--rule", asym_cmd.rule,
                   "none|o_of_n|sqrt_n_lambda0|hhm_scaled|linear");
  asym->add_option("--coefficient", asym_cmd.coefficient, "lambda rule constant");
  asym->add_option("--trials", asym_cmd.trials, "Monte-Carlo trials");
  asym->add_option("--n", asym_cmd.n, "sample size for --mode bias");
  asym->add_option("--lambda0", asym_cmd.lambda0, "lambda_n = lambda0*sqrt(n)");
  asym->add_option("--kind", asym_cmd.kind, "bridge|laplace|arctan (approx mode)");
  asym->add_option("--eps", asym_cmd.eps, "approximation parameter (approx mode)");
  asym->add_option("--a0", asym_cmd.a0, "left end of the unit interval [a, a+1]");
  asym->add_option("--w", asym_cmd.w, "coordinate value for --mode factor");

  TrainCmd train_cmd;
  auto* train = app.add_subcommand("train", "single MLP training run");
  train->fallthrough();
  add_penalty_flags(train, train_cmd.pf, false);
  train->add_option("--data", train_cmd.data, "CSV with a role column");
  train->add_option("--images", train_cmd.images, "IDX image file");
  train->add_option("--labels", train_cmd.labels, "IDX label file");
  train->add_option("--split", train_cmd.split,
                    "train:validation:test counts for IDX input");
  train->add_option("--layers", train_cmd.layers, "comma list, input..output")
      ->required();
  train->add_option("--batch-size", train_cmd.batch_size, "samples per batch");
  train->add_option("--max-epochs", train_cmd.max_epochs, "epoch cap");
  train->add_option("--patience", train_cmd.patience, "early-stopping patience");
  train->add_option("--lr-min", train_cmd.lr_min, "schedule minimum");
  train->add_option("--lr-max", train_cmd.lr_max, "schedule maximum");
  train->add_option("--schedule", train_cmd.schedule, "triangular|constant");

  SweepCmd sweep_cmd;
  auto* sweep = app.add_subcommand("sweep", "lambda grid sweep of MLP training");
  sweep->fallthrough();
  sweep->add_option("--config", sweep_cmd.config_path, "sweep JSON config")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    emit_error(g, "", e.what(), 2);
    return 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    if (penalty->parsed()) return run_penalty(g, penalty_cmd);
    if (prox->parsed()) return run_prox(g, prox_cmd);
    if (threshold->parsed()) return run_threshold(g, threshold_cmd);
    if (properties->parsed()) return run_properties(g, properties_cmd);
    if (fit->parsed()) return run_fit(g, fit_cmd);
    if (asym->parsed()) return run_asym(g, asym_cmd);
    if (train->parsed()) return run_train(g, train_cmd);
    if (sweep->parsed()) return run_sweep(g, sweep_cmd);
  } catch (const std::invalid_argument& e) {
    emit_error(g, sub, e.what(), 2);
    return 2;
  } catch (const std::exception& e) {
    emit_error(g, sub, e.what(), 1);
    return 1;
  }
  return 2;
}
