#include "ncreg/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace ncreg {

double median_of(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int sweep_thread_cap() {
  if (const char* env = std::getenv("NONCONVEX_REG_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

SweepReport lambda_sweep(const Dataset& data, const MLPConfig& mlp,
                         const TrainConfig& train, const PenaltySpec& spec_shape,
                         const std::vector<double>& log10_lambda_grid,
                         const std::vector<std::uint64_t>& seeds,
                         const std::string& dataset_id) {
  if (log10_lambda_grid.empty())
    throw std::invalid_argument("lambda_sweep: empty lambda grid");
  if (seeds.empty()) throw std::invalid_argument("lambda_sweep: empty seed list");
  mlp.validate();
  train.validate();
  spec_shape.validate();

  SweepReport report;
  report.spec_shape = spec_shape;
  report.dataset_id = dataset_id;
  report.seeds = seeds;
  report.rows.resize(log10_lambda_grid.size());

  auto run_row = [&](std::size_t gi) {
    SweepRow& row = report.rows[gi];
    row.log10_lambda = log10_lambda_grid[gi];
    row.cells.resize(seeds.size());
    std::vector<double> errors;
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      SweepCell& cell = row.cells[si];
      PenaltySpec spec = spec_shape;
      if (spec.family != Family::none)
        spec.lambda = std::pow(10.0, row.log10_lambda);
      MLPConfig m = mlp;
      m.seed = seeds[si];
      TrainConfig t = train;
      t.seed = seeds[si];
      try {
        TrainResult r = train_mlp(data, m, t, spec);
        cell.test_error = r.test_error_rate;
        cell.sparsity = r.sparsity_fraction;
        cell.mean_abs_weight = r.mean_abs_weight;
        errors.push_back(r.test_error_rate);
      } catch (const std::exception& e) {
        cell.error = e.what();
        cell.test_error = std::numeric_limits<double>::quiet_NaN();
        cell.sparsity = std::numeric_limits<double>::quiet_NaN();
        cell.mean_abs_weight = std::numeric_limits<double>::quiet_NaN();
      }
    }
    row.median_test_error = median_of(errors);
  };

  const std::size_t n_rows = report.rows.size();
  const int pool = std::min<int>(sweep_thread_cap(), static_cast<int>(n_rows));
  if (pool <= 1) {
    for (std::size_t gi = 0; gi < n_rows; ++gi) run_row(gi);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(pool));
    for (int t = 0; t < pool; ++t)
      workers.emplace_back([&] {
        for (std::size_t gi = next.fetch_add(1); gi < n_rows;
             gi = next.fetch_add(1))
          run_row(gi);
      });
    for (auto& w : workers) w.join();
  }
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::string out = "log10_lambda";
  for (std::size_t si = 0; si < report.seeds.size(); ++si)
    out += ",seed" + std::to_string(si + 1);
  out += ",median\n";
  char buf[64];
  for (const SweepRow& row : report.rows) {
    std::snprintf(buf, sizeof buf, "%.6g", row.log10_lambda);
    out += buf;
    for (const SweepCell& cell : row.cells) {
      std::snprintf(buf, sizeof buf, ",%.6g", cell.test_error);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6g\n", row.median_test_error);
    out += buf;
  }
  return out;
}

}  // namespace ncreg
