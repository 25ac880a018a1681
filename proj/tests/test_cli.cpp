#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <doctest.h>
#include <json.hpp>
#include <Eigen/Dense>

#include "ncreg/rng.hpp"

#ifndef NCREG_CLI_PATH
#error "NCREG_CLI_PATH must point at the CLI binary"
#endif

using nlohmann::json;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CmdResult run_cli(const std::string& args) {
  std::string cmd = std::string(NCREG_CLI_PATH) + " " + args +
                    " > tmp_cli_stdout.txt 2> tmp_cli_stderr.txt";
  int rc = std::system(cmd.c_str());
  CmdResult r;
  r.code = rc < 0 ? -1 : WEXITSTATUS(rc);
  r.out = slurp("tmp_cli_stdout.txt");
  r.err = slurp("tmp_cli_stderr.txt");
  return r;
}

std::size_t line_count(const std::string& s) {
  std::size_t n = 0;
  for (char ch : s)
    if (ch == '\n') ++n;
  return n;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

std::string nth_line(const std::string& s, std::size_t k) {
  std::stringstream ss(s);
  std::string line;
  for (std::size_t i = 0; i <= k; ++i)
    if (!std::getline(ss, line)) return "";
  return line;
}

// a small three-blob classification CSV with a role column
void write_blob_csv(const std::string& path, std::uint64_t seed) {
  auto g = ncreg::rng::stream(seed, 0x636c69);
  const double kPi = 3.14159265358979323846;
  std::ofstream out(path);
  out << "x1,x2,role,y\n";
  char buf[96];
  for (int i = 0; i < 150; ++i) {
    int k = i % 3;
    double ang = 2.0 * kPi * k / 3.0;
    double x1 = 3.0 * std::cos(ang) + 0.6 * ncreg::rng::normal(g);
    double x2 = 3.0 * std::sin(ang) + 0.6 * ncreg::rng::normal(g);
    const char* role = i < 90 ? "train" : (i < 120 ? "validation" : "test");
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s,%d\n", x1, x2, role, k);
    out << buf;
  }
}

}  // namespace

TEST_CASE("penalty subcommand emits a value grid") {
  CmdResult r = run_cli("penalty --family laplace --lambda 2 --epsilon 0.01");
  REQUIRE(r.code == 0);
  CHECK(nth_line(r.out, 0) == "t,value");
  CHECK(line_count(r.out) == 102);  // header + 101 grid points
  CHECK(nth_line(r.out, 51) == "0,0");  // middle of the default -5:5 grid
  auto last = split_csv(nth_line(r.out, 101));
  REQUIRE(last.size() == 2);
  CHECK(std::stod(last[0]) == doctest::Approx(5.0));
  CHECK(std::stod(last[1]) == doctest::Approx(2.0 * (1.0 - 1e-10)).epsilon(1e-12));

  CmdResult r2 = run_cli("penalty --family l1 --lambda 3 --grid 0:1:2");
  REQUIRE(r2.code == 0);
  CHECK(nth_line(r2.out, 1) == "0,0");
  CHECK(nth_line(r2.out, 2) == "1,3");
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("penalty --family arctan --lambda 1").code == 2);
  CHECK(run_cli("penalty --family arctan --lambda 1").err.find("missing --gamma") !=
        std::string::npos);
  CHECK(run_cli("penalty --family l1 --lambda -1").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("penalty --family laplace --lambda 1 --epsilon 0.01 --grid 5:1:10")
            .code == 2);
  CHECK(run_cli("fit --family l1 --lambda 1 --data no_such_file.csv").code == 1);

  CmdResult j = run_cli("--json-errors penalty --family arctan --lambda 1");
  CHECK(j.code == 2);
  json err = json::parse(j.err);
  CHECK(err.at("subcommand") == "penalty");
  CHECK(err.at("exit_code") == 2);
  CHECK(err.at("error").get<std::string>().find("--gamma") != std::string::npos);
}

TEST_CASE("threshold subcommand prints lambda_star") {
  CmdResult r = run_cli("threshold --family laplace --epsilon 0.01 --w-hat 3");
  REQUIRE(r.code == 0);
  REQUIRE(r.out.rfind("lambda_star = ", 0) == 0);
  double lam = std::stod(r.out.substr(14));
  CHECK(lam == doctest::Approx(9.0).epsilon(1e-3));
}

TEST_CASE("prox subcommand reports the scalar minimizer") {
  CmdResult r = run_cli("prox --family l1 --lambda 2 --w-hat 3");
  REQUIRE(r.code == 0);
  json out = json::parse(r.out);
  CHECK(out.at("w_hat") == 3.0);
  CHECK(out.at("pen_scale") == 1.0);
  CHECK(out.at("result").at("global_min").get<double>() ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(out.at("result").at("method") == "closed_form");
}

TEST_CASE("prox animate-data writes the objective surface") {
  CmdResult r = run_cli(
      "prox --family laplace --lambda 1 --epsilon 0.01 --w-hat 3 "
      "--animate-data --out tmp_cli_anim.csv");
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::string body = slurp("tmp_cli_anim.csv");
  CHECK(nth_line(body, 0) == "w,lambda,objective");
  CHECK(line_count(body) == 1 + 16 * 1201);
  auto first = split_csv(nth_line(body, 1));
  REQUIRE(first.size() == 3);
  CHECK(std::stod(first[0]) == doctest::Approx(-1.0));
  CHECK(std::stod(first[1]) == doctest::Approx(0.1));

  json manifest = json::parse(slurp("tmp_cli_anim.csv.manifest.json"));
  CHECK(manifest.at("subcommand") == "prox");
  CHECK(manifest.at("outputs") == json::array({"tmp_cli_anim.csv"}));
  std::string digest =
      manifest.at("output_digests").at("tmp_cli_anim.csv").get<std::string>();
  CHECK(digest.size() == 16);
  CHECK(digest.find_first_not_of("0123456789abcdef") == std::string::npos);
  std::remove("tmp_cli_anim.csv");
  std::remove("tmp_cli_anim.csv.manifest.json");
}

TEST_CASE("properties subcommand prints the check table") {
  CmdResult r = run_cli(
      "properties --family laplace --lambda 0.03 --epsilon 0.01 "
      "--out tmp_cli_props.json");
  REQUIRE(r.code == 0);
  CHECK(r.out.find("P1") != std::string::npos);
  CHECK(r.out.find("holds") != std::string::npos);
  CHECK(r.out.find("sparsity/continuity lambda region:") != std::string::npos);
  json rep = json::parse(slurp("tmp_cli_props.json"));
  CHECK(rep.at("checks").at("P1").at("verdict") == "holds");
  std::remove("tmp_cli_props.json");
  std::remove("tmp_cli_props.json.manifest.json");
}

TEST_CASE("fit with lambda zero recovers least squares") {
  auto g = ncreg::rng::stream(31);
  const int n = 30, p = 3;
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd w0(p), y(n);
  w0 << 2.0, -1.0, 0.5;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) X(i, j) = ncreg::rng::normal(g);
  for (int i = 0; i < n; ++i)
    y(i) = X.row(i).dot(w0) + 0.1 * ncreg::rng::normal(g);
  {
    std::ofstream out("tmp_cli_ols.csv");
    out << "x1,x2,x3,y\n";
    char buf[160];
    for (int i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", X(i, 0), X(i, 1),
                    X(i, 2), y(i));
      out << buf;
    }
  }
  Eigen::VectorXd ols = X.colPivHouseholderQr().solve(y);

  CmdResult r = run_cli(
      "fit --family l1 --lambda 0 --data tmp_cli_ols.csv "
      "--max-iters 5000 --tol 1e-15");
  REQUIRE(r.code == 0);
  json out = json::parse(r.out);
  auto w = out.at("weights").get<std::vector<double>>();
  REQUIRE(w.size() == 3);
  for (int j = 0; j < p; ++j) CHECK(w[j] == doctest::Approx(ols(j)).epsilon(1e-6));
  CHECK(out.at("n_nonzero") == 3);
  CHECK(out.at("converged") == true);
  std::remove("tmp_cli_ols.csv");
}

TEST_CASE("asym factor and approx modes") {
  CmdResult f = run_cli("asym --mode factor --family arctan --gamma 1 --w 0.5");
  REQUIRE(f.code == 0);
  auto cells = split_csv(nth_line(f.out, 1));
  REQUIRE(cells.size() == 3);
  CHECK(cells[0] == "arctan");
  CHECK(std::stod(cells[2]) == doctest::Approx(0.509296).epsilon(1e-5));

  CmdResult a = run_cli("asym --mode approx --kind bridge --eps 0.1 --a0 10");
  REQUIRE(a.code == 0);
  CHECK(nth_line(a.out, 0) == "kind,eps,a,numeric_error,closed_form_approx");
  auto arow = split_csv(nth_line(a.out, 1));
  REQUIRE(arow.size() == 5);
  CHECK(std::stod(arow[3]) == doctest::Approx(0.2650399).epsilon(1e-4));
  CHECK(std::stod(arow[4]) == doctest::Approx(0.2589254).epsilon(1e-4));

  CHECK(run_cli("asym --mode nonsense").code == 2);
}

TEST_CASE("train subcommand is reproducible byte for byte") {
  write_blob_csv("tmp_cli_blob.csv", 41);
  std::string args =
      "--seed 7 train --data tmp_cli_blob.csv --layers 2,8,3 --batch-size 32 "
      "--max-epochs 10 --patience 10 --family laplace --lambda 0.001 "
      "--epsilon 0.01 --out ";
  REQUIRE(run_cli(args + "tmp_cli_t1.json").code == 0);
  REQUIRE(run_cli(args + "tmp_cli_t2.json").code == 0);
  std::string b1 = slurp("tmp_cli_t1.json");
  std::string b2 = slurp("tmp_cli_t2.json");
  CHECK(!b1.empty());
  CHECK(b1 == b2);

  json out = json::parse(b1);
  CHECK(out.at("n_parameters") == 51);  // 16 + 24 weights, 11 biases
  double te = out.at("test_error_rate").get<double>();
  CHECK(te >= 0.0);
  CHECK(te <= 1.0);

  json m1 = json::parse(slurp("tmp_cli_t1.json.manifest.json"));
  json m2 = json::parse(slurp("tmp_cli_t2.json.manifest.json"));
  CHECK(m1.at("config_digest") == m2.at("config_digest"));
  CHECK(m1.at("output_digests").at("tmp_cli_t1.json") ==
        m2.at("output_digests").at("tmp_cli_t2.json"));
  CHECK(m1.at("seeds") == json::array({7}));
  CHECK(m1.at("version").get<std::string>().find('.') != std::string::npos);
  std::remove("tmp_cli_t1.json");
  std::remove("tmp_cli_t1.json.manifest.json");
  std::remove("tmp_cli_t2.json");
  std::remove("tmp_cli_t2.json.manifest.json");
}

TEST_CASE("sweep subcommand walks the lambda grid from a config file") {
  write_blob_csv("tmp_cli_blob.csv", 41);
  {
    json cfg{{"data_csv", "tmp_cli_blob.csv"},
             {"layers", {2, 8, 3}},
             {"train", {{"batch_size", 32}, {"max_epochs", 6}, {"patience", 6}}},
             {"penalty", {{"family", "laplace"}, {"lambda", 1.0}, {"epsilon", 0.01}}},
             {"grid", {{"lo", -4.0}, {"step", -0.2}, {"hi", -7.0}}},
             {"seeds", {1, 2}},
             {"dataset_id", "blob"}};
    std::ofstream out("tmp_cli_sweep_cfg.json");
    out << cfg.dump(2) << "\n";
  }
  REQUIRE(run_cli("sweep --config tmp_cli_sweep_cfg.json --out tmp_cli_sweep.csv")
              .code == 0);
  std::string body = slurp("tmp_cli_sweep.csv");
  CHECK(nth_line(body, 0) == "log10_lambda,seed1,seed2,median");
  CHECK(line_count(body) == 17);  // header + 16 grid points
  CHECK(nth_line(body, 1).rfind("-4,", 0) == 0);
  CHECK(nth_line(body, 16).rfind("-7,", 0) == 0);
  json m1 = json::parse(slurp("tmp_cli_sweep.csv.manifest.json"));

  // a rerun reproduces the body (and so its digest) exactly
  REQUIRE(run_cli("sweep --config tmp_cli_sweep_cfg.json --out tmp_cli_sweep.csv")
              .code == 0);
  CHECK(slurp("tmp_cli_sweep.csv") == body);
  json m2 = json::parse(slurp("tmp_cli_sweep.csv.manifest.json"));
  CHECK(m1.at("config_digest") == m2.at("config_digest"));
  CHECK(m1.at("output_digests") == m2.at("output_digests"));
  CHECK(m1.at("subcommand") == "sweep");
  std::remove("tmp_cli_sweep_cfg.json");
  std::remove("tmp_cli_sweep.csv");
  std::remove("tmp_cli_sweep.csv.manifest.json");
  std::remove("tmp_cli_blob.csv");
  std::remove("tmp_cli_stdout.txt");
  std::remove("tmp_cli_stderr.txt");
}
