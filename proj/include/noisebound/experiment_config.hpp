#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "noisebound/dataset.hpp"
#include "noisebound/model.hpp"
#include "noisebound/trainer.hpp"

namespace noisebound {

struct MaterializedExperiment {
  Dataset train;
  Dataset test;  // may be empty
  Model model;
  TrainConfig train_cfg;  // seed = seeds[0]
};

// Sectioned key=value text, '#' comments. Unknown keys are rejected so typos
// fail loudly instead of silently using defaults.
//
//   [dataset]
//   kind = blobs            # or csv
//   classes = 10
//   per_class = 200
//   test_per_class = 200
//   dims = 20
//   separation = 6.0
//   data_seed = 7
//   path = train.csv        # csv kind
//   test_path = test.csv    # optional
//
//   [noise]
//   injector = sym:0.4      # optional; "none" or absent = leave labels alone
//
//   [model]
//   kind = mlp              # or linear
//   hidden = 512
//
//   [loss]
//   spec = bounded:ce:eta=0.4,c=10
//
//   [train]
//   epochs = 200
//   batch_size = 64
//   learning_rate = 0.01
//   lr_decay_factor = 0.6
//   lr_decay_epoch = 120
//   divergence_factor = 10  # abort when raw loss exceeds this x initial
//   seeds = 1,2,3           # first seed drives single runs; all drive sweeps
//
//   [output]
//   dir = out
struct ExperimentConfig {
  // dataset
  std::string dataset_kind = "blobs";
  std::size_t classes = 2;
  std::size_t per_class = 200;
  std::size_t test_per_class = 200;
  std::size_t dims = 2;
  double separation = 6.0;
  std::uint64_t data_seed = 7;
  std::string data_path;
  std::string test_path;

  // noise
  std::string injector = "none";
  std::uint64_t noise_seed = 99;

  // model
  std::string model_kind = "mlp";
  std::size_t hidden = 32;

  // loss + trainer
  std::string loss_spec = "ce";
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 0.05;
  double lr_decay_factor = 0.6;
  int lr_decay_epoch = 120;
  double divergence_factor = 10.0;
  std::vector<std::uint64_t> seeds = {1};

  std::string output_dir = "out";

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);

  // Materializes the pieces. Noise is injected into the train split only.
  Dataset build_train_data() const;
  Dataset build_test_data() const;  // empty dataset if none configured
  MaterializedExperiment materialize() const;
};

}  // namespace noisebound
