#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "noisebound/bounded_loss.hpp"
#include "noisebound/dataset.hpp"
#include "noisebound/model.hpp"

namespace noisebound {

struct TrainConfig {
  BoundedLossConfig loss;
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.05;
  double lr_decay_factor = 0.6;
  int lr_decay_epoch = 120;  // <= 0 disables the decay
  std::uint64_t seed = 0;
  double divergence_factor = 10.0;

  void validate() const;
};

struct EpochMetrics {
  int epoch = 0;  // 1-based
  double bounded_loss = 0.0;
  double raw_loss = 0.0;  // mean inner loss over the train set
  double test_acc = 0.0;
  double noisy_train_acc = 0.0;
  double min_batch_raw = 0.0;  // lowest batch-mean inner loss this epoch
};

struct RunMetrics {
  std::vector<EpochMetrics> epochs;
  double initial_raw_loss = 0.0;
  double final_bounded_loss = 0.0;
  double final_raw_loss = 0.0;
  double final_test_acc = 0.0;
  double final_noisy_train_acc = 0.0;
  double min_batch_raw_loss = 0.0;  // over the whole run
  bool diverged = false;
};

// Raised when the raw mean loss blows past divergence_factor x its initial
// value. Carries the metrics collected so far.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, RunMetrics metrics)
      : std::runtime_error(what), metrics(std::move(metrics)) {}
  RunMetrics metrics;
};

// Mini-batch SGD on the bounded objective: per batch the gradient of the mean
// inner loss is scaled by sign(mean - B), so batches below the bound untrain.
// The model is (re)initialized from cfg.seed; everything is deterministic in
// (seed, config, data). `test` may be null.
RunMetrics train(Model& model, const Dataset& train_data, const Dataset* test,
                 const TrainConfig& cfg);

// Exact gradient of the bounded batch objective |mean inner - B| at the
// current parameters. Empty idx means all rows.
std::vector<double> gradients(const Model& model, const BoundedLossConfig& loss,
                              const Dataset& batch,
                              std::span<const std::size_t> idx = {});

// The objective the gradient above differentiates; used by the
// finite-difference checks.
double batch_objective(const Model& model, const BoundedLossConfig& loss,
                       const Dataset& batch, std::span<const std::size_t> idx = {});

// Mean inner loss (no bound) over the given rows.
double mean_inner_loss(const Model& model, const BoundedLossConfig& loss,
                       const Dataset& batch, std::span<const std::size_t> idx = {});

double accuracy(const Model& model, const Dataset& ds, bool against_clean);

struct SweepPoint {
  double eta_hat = 0.0;
  double bound = 0.0;
  std::vector<double> per_seed_acc;
  double mean_acc = 0.0;
  double min_acc = 0.0;
  double max_acc = 0.0;
};

// One noise-bounded run per (eta_hat, seed), B = noise_bound(inner, eta_hat, c);
// eta_hat = 0 reduces to the unbounded loss. Runs are independent and fan out
// across `jobs` threads; results are merged by index so the output does not
// depend on scheduling.
std::vector<SweepPoint> sweep_bound(const Model& prototype, const Dataset& train_data,
                                    const Dataset& test, const TrainConfig& base,
                                    std::span<const double> eta_grid,
                                    std::span<const std::uint64_t> seeds, int jobs = 0);

// "epoch,bounded_loss,raw_loss,test_acc,noisy_train_acc" rows plus a trailing
// "final" record.
std::string metrics_to_csv(const RunMetrics& metrics);
std::string sweep_to_csv(const std::vector<SweepPoint>& points);

}  // namespace noisebound
