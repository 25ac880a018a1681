#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ncreg/dataset.hpp"
#include "ncreg/penalty.hpp"

namespace ncreg {

enum class Activation { relu };

struct MLPConfig {
  std::vector<int> layer_sizes;  // input, hidden..., output (output = classes)
  Activation activation = Activation::relu;
  std::uint64_t seed = 1;

  void validate() const;  // needs >= 1 hidden layer, all sizes positive
};

enum class LRSchedule { triangular, constant };

LRSchedule lr_schedule_from_name(const std::string& name);
std::string lr_schedule_name(LRSchedule s);

struct TrainConfig {
  int batch_size = 64;
  int max_epochs = 250;
  int patience = 20;  // epochs without validation improvement before stopping
  double lr_min = 0.01;
  double lr_max = 0.25;
  LRSchedule lr_schedule = LRSchedule::triangular;  // constant runs at lr_min
  std::uint64_t seed = 1;

  void validate() const;
};

struct MLPParams {
  std::vector<Eigen::MatrixXd> W;  // W[l] maps layer l -> l+1, shape out x in
  std::vector<Eigen::VectorXd> b;
};

struct TrainResult {
  double test_error_rate = 0.0;
  double best_validation_loss = 0.0;  // total cross entropy on validation rows
  int epochs_run = 0;
  int best_epoch = 0;  // 0-based epoch whose snapshot is reported
  // connection weights (each W[l] in storage order) then biases, layer order
  std::vector<double> weight_snapshot;
  double sparsity_fraction = 0.0;  // exact zeros among connection weights
  double mean_abs_weight = 0.0;    // over connection weights, biases excluded
};

// Each layer's weights drawn normal(0, 4/(n_in + n_out)); biases zero.
// Deterministic in config.seed.
MLPParams init_weights(const MLPConfig& config);

// Single triangular cycle spanning `total` epochs: lr_min at epoch 0, peak
// lr_max at mid-cycle, back down to lr_min. Throws unless 0 <= epoch < total.
double triangular_lr(int epoch, int total, double lr_min, double lr_max);

// Batch gradient descent on mean-batch cross entropy plus the penalty over
// connection weights (biases unpenalized). Each weight takes the loss step
// first, then the penalty pull toward zero, clipped so it can shrink a weight
// to exactly 0 but never push it across; a zero weight stays zero until the
// loss gradient alone exceeds the penalty's slope at the origin. Batches are
// a seeded shuffle of the train rows each epoch; early stopping watches the
// total validation cross entropy with the configured patience and the
// reported metrics come from the best-validation snapshot, never the final
// epoch. A non-finite loss raises DivergenceError naming the epoch.
TrainResult train_mlp(const Dataset& data, const MLPConfig& mlp,
                      const TrainConfig& train, const PenaltySpec& spec);

// Max relative error (scaled by max(1, |entry|)) between the backprop
// gradient of mean cross entropy + penalty and central finite differences,
// over every weight and bias. Weights are pushed 0.05 away from zero first so
// the penalty is differentiable along each probe. All rows of `data` are
// used regardless of role.
double gradient_check(const MLPConfig& mlp, const Dataset& data,
                      const PenaltySpec& spec);

}  // namespace ncreg
