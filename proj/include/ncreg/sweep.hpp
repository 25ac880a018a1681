#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncreg/dataset.hpp"
#include "ncreg/mlp.hpp"
#include "ncreg/penalty.hpp"

namespace ncreg {

struct SweepCell {
  double test_error = 0.0;
  double sparsity = 0.0;
  double mean_abs_weight = 0.0;
  std::string error;  // nonempty when this run failed; metrics then NaN
};

struct SweepRow {
  double log10_lambda = 0.0;
  std::vector<SweepCell> cells;  // one per seed, in seed order
  double median_test_error = 0.0;  // over the cells that completed
};

struct SweepReport {
  PenaltySpec spec_shape;  // lambda ignored; set per-row from the grid
  std::string dataset_id;
  std::vector<std::uint64_t> seeds;
  std::vector<SweepRow> rows;  // grid order
};

// One train_mlp per (grid point, seed); the seed drives both the weight init
// and the batch shuffle. Grid points run in parallel on a small worker pool
// capped by sweep_thread_cap(); results are identical to a serial run since
// every cell's randomness is keyed only by its own (lambda, seed). Individual
// run failures land in SweepCell::error rather than aborting the sweep.
SweepReport lambda_sweep(const Dataset& data, const MLPConfig& mlp,
                         const TrainConfig& train, const PenaltySpec& spec_shape,
                         const std::vector<double>& log10_lambda_grid,
                         const std::vector<std::uint64_t>& seeds = {1, 2, 3},
                         const std::string& dataset_id = "");

// "log10_lambda,seed1,...,seedK,median" with one row per grid point
std::string sweep_csv(const SweepReport& report);

// NONCONVEX_REG_THREADS when set to a positive integer, else the logical
// core count (at least 1)
int sweep_thread_cap();

double median_of(std::vector<double> values);  // NaN on empty input

}  // namespace ncreg
