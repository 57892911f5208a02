#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "noisebound/bounds.hpp"
#include "noisebound/losses.hpp"
#include "noisebound/noise_model.hpp"

namespace noisebound {

// Sorted-cross-entropy prior: pulls outputs toward the shape
// (1-eta, eta/(c-1), ...) without caring which class is on top.
struct CepPrior {
  double eta = 0.0;
  double weight = 1.0;
};

enum class BoundSource { kExplicit, kNoiseBound };

// The batch objective | mean inner loss - B |, optionally with a CEP prior
// added to the per-sample inner loss before the bound is applied.
struct BoundedLossConfig {
  BoundLoss inner = LossSpec{};
  double bound = 0.0;
  BoundSource bound_source = BoundSource::kExplicit;
  double eta = 0.0;    // when bound_source == kNoiseBound
  std::size_t c = 0;   // when bound_source == kNoiseBound
  std::optional<CepPrior> prior;

  void validate() const;

  // Grammar, where <inner> is a loss spec ("ce", "gce:a=0.4", ...,
  // "fce:sym:eta=0.4", "fce:matrix:<csv>"):
  //   "<inner>"                         plain loss, B = 0
  //   "bounded:<inner>:B=<value>"       explicit bound
  //   "bounded:<inner>:eta=<e>,c=<c>"   B = noise_bound(inner, e, c)
  // either bounded form takes a "+cep:eta=<e>" suffix. `c_hint` supplies the
  // class count for "sym:eta=" models and for "c=" defaults.
  static BoundedLossConfig parse(std::string_view text, std::size_t c_hint);
  std::string to_string() const;
};

// -sum_i p_i ln q_sigma(i) with p = u_sym(eta, c) sorted descending and sigma
// sorting q descending (stable, ties by original index).
double cep_prior(const ProbVector& q, double eta, std::size_t c,
                 double clamp_eps = 1e-12);

// Per-sample evaluator for the composite inner loss (base or corrected loss
// plus optional prior), operating on raw probability spans so the batch
// kernels can use it without constructing ProbVectors.
class SampleLoss {
 public:
  SampleLoss(const BoundedLossConfig& cfg, std::size_t c);

  std::size_t num_classes() const { return c_; }

  // Inner loss value at softmax output q for label k, prior included.
  double value(std::span<const double> q, std::size_t k) const;

  // d(value)/dq, written to `grad` (length c). Clamp-aware: coordinates that
  // sit below the log clamp get a zero derivative, matching the evaluated
  // function exactly.
  void grad_q(std::span<const double> q, std::size_t k,
              std::span<double> grad) const;

 private:
  std::size_t c_;
  LossSpec base_;
  bool corrected_ = false;
  const TransitionMatrix* matrix_ = nullptr;  // owned by the config's NoiseModel
  NoiseModel model_;                          // keeps the matrix alive
  std::optional<CepPrior> prior_;
  std::vector<double> prior_target_;  // u_sym(eta, c) sorted descending
};

// | mean inner loss - B | over a batch. Throws on an empty batch.
double batch_loss(const BoundedLossConfig& cfg,
                  std::span<const ProbVector> predictions,
                  std::span<const std::size_t> labels);

double batch_loss_from_mean(const BoundedLossConfig& cfg, double mean_inner);

// Sign of the bounded objective's gradient relative to the unbounded one:
// +1 at or above the bound, -1 below it ("untraining").
int batch_gradient_scale(const BoundedLossConfig& cfg, double mean_inner);

}  // namespace noisebound
