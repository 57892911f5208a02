#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisebound/simplex.hpp"

namespace noisebound {

// Feature matrix plus labels. Labels are 0-based in memory and 1-based in CSV
// files. When the clean labels are kept, the empirical noise rate is the
// fraction of mismatches.
struct Dataset {
  std::vector<double> features;  // n x dim, row-major
  std::vector<int> labels;
  std::vector<int> clean_labels;  // empty when unknown
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::string split = "train";

  std::size_t size() const { return dim == 0 ? 0 : features.size() / dim; }
  bool has_clean() const { return !clean_labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(features).subspan(i * dim, dim);
  }
  double empirical_noise_rate() const;
  void validate() const;
};

// Isotropic unit-variance Gaussian clusters, one per class, centers spaced so
// adjacent centers are `separation` standard deviations apart (on a circle for
// dim >= 2, a line for dim == 1). separation >= 6 makes the Bayes error
// negligible, i.e. the dataset is separable to working precision.
Dataset make_blobs(std::size_t c, std::size_t per_class, std::size_t dim,
                   double separation, std::uint64_t seed);

// A stochastic label-corruption process. `predictor` must be set for the
// kPredictor kind; it maps a feature row to a 0-based class.
struct NoiseInjector {
  enum class Kind { kSymmetric, kPairwise, kMatrix, kGroup, kPredictor };

  Kind kind = Kind::kSymmetric;
  double eta = 0.0;
  std::optional<TransitionMatrix> matrix;
  std::vector<std::vector<int>> groups;  // disjoint cover of [0, c)
  std::function<int(std::span<const double>)> predictor;
  std::uint64_t seed = 0;
};

// Resamples labels per the injector's conditional; clean labels are preserved
// in the result. Pure in (dataset, injector, seed).
Dataset inject(const Dataset& ds, const NoiseInjector& injector);

// CSV format: header "f0,...,f{d-1}[,clean],label"; labels 1-based.
Dataset load_csv(const std::string& path);
void save_csv(const Dataset& ds, const std::string& path);
std::string dataset_to_csv(const Dataset& ds);
Dataset dataset_from_csv(std::istream& in, const std::string& origin);

// Textual injector spec, materialized later (the predictor kind needs a model
// loaded from disk). Grammar: "sym:0.4", "pair:0.4", "matrix:<path>",
// "group:0.4:<g1|g2|...>" with 1-based classes "1,2|3,4", "pred:0.6:<path>".
struct InjectorSpec {
  NoiseInjector::Kind kind = NoiseInjector::Kind::kSymmetric;
  double eta = 0.0;
  std::string path;                      // matrix / model file
  std::vector<std::vector<int>> groups;  // 0-based after parsing

  static InjectorSpec parse(std::string_view text);
};

// Builds the runnable injector. `load_predictor` resolves a model path to a
// classifier; pass nullptr if the spec is not predictor-based.
NoiseInjector materialize_injector(
    const InjectorSpec& spec, std::size_t c, std::uint64_t seed,
    const std::function<std::function<int(std::span<const double>)>(const std::string&)>&
        load_predictor = {});

}  // namespace noisebound
