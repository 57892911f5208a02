#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "noisebound/simplex.hpp"

namespace noisebound {

enum class LossKind {
  kCrossEntropy,      // -ln q_k
  kMeanSquaredError,  // sum_i (q_i - [i==k])^2  (Brier)
  kMeanAbsoluteError, // 1 - q_k
  kGeneralizedCE,     // (1 - q_k^a) / a, 0 < a < 1
  kSymmetricCE,       // -ln q_k + A (1 - q_k), A > 0
};

// A pointwise loss L(q, k) with its parameters. Natural log throughout.
struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  double gce_a = 0.4;
  double sce_A = 8.0;
  // Probability clamp for log terms (CE/SCE). Zero means propagate infinity,
  // which is the honest value for analysis; training wants finite gradients.
  double clamp_eps = 1e-12;

  // CE and MSE are strictly proper; MAE, GCE, SCE are not.
  bool strictly_proper() const;

  void validate() const;  // throws std::domain_error on bad parameters

  // Grammar: "ce", "mse", "mae", "gce:a=0.4", "sce:A=8".
  static LossSpec parse(std::string_view text);
  std::string to_string() const;
};

// L(q, k). k is a 0-based class index.
double loss(const LossSpec& spec, const ProbVector& q, std::size_t k);
double loss_raw(const LossSpec& spec, std::span<const double> q, std::size_t k);

// (L(q,0), ..., L(q,c-1)).
std::vector<double> loss_vector(const LossSpec& spec, const ProbVector& q);

// H_L(p, q) = p . L(q).
double expected_loss(const LossSpec& spec, const ProbVector& p, const ProbVector& q);

// Entropy function: H_L(p, p). Shannon entropy in nats for CE.
double entropy(const LossSpec& spec, const ProbVector& p);

struct PropernessReport {
  int trials = 0;
  int gap_violations = 0;        // H_L(p, q) < entropy(p) - 1e-9
  int concavity_violations = 0;  // midpoint concavity of the entropy fails
  bool passed() const { return gap_violations == 0 && concavity_violations == 0; }
};

// Diagnostic: samples random (p, q) pairs and counts violations of the two
// properness consequences. A proper loss should report zero.
PropernessReport check_properness(const LossSpec& spec, int trials,
                                  std::uint64_t seed = 12345);

// Uniformly random point on the c-simplex (exponential spacings).
ProbVector random_simplex_point(std::size_t c, class Rng& rng);

}  // namespace noisebound
