#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace noisebound {

// Softmax classifier over c logits: either linear or a one-hidden-layer ReLU
// MLP. Parameters live in one flat vector, layer-major then row-major:
//   linear: W (c x d), b (c)
//   mlp:    W1 (h x d), b1 (h), W2 (c x h), b2 (c)
struct Model {
  enum class Kind { kLinear, kMlp };

  Kind kind = Kind::kLinear;
  std::size_t in_dim = 0;
  std::size_t hidden = 0;  // 0 for linear
  std::size_t num_classes = 0;
  std::vector<double> params;

  static Model linear(std::size_t in_dim, std::size_t num_classes);
  static Model mlp(std::size_t in_dim, std::size_t hidden, std::size_t num_classes);

  std::size_t param_count() const;
  std::size_t hidden_size() const { return kind == Kind::kMlp ? hidden : 0; }

  // Scaled-normal init (1/sqrt(fan-in)), biases zero. Deterministic in seed.
  void init(std::uint64_t seed);

  // Softmax probabilities for one sample. `hidden_scratch` must have
  // hidden_size() doubles (ignored for linear) and receives the post-ReLU
  // activations, which the backward pass reuses.
  void forward(std::span<const double> x, std::span<double> probs,
               std::span<double> hidden_scratch) const;

  int predict(std::span<const double> x) const;

  // Text format: one header line "kind in_dim hidden num_classes", then one
  // parameter per line, in flat-vector order.
  void save(const std::string& path) const;
  static Model load(const std::string& path);
};

// Numerically safe softmax (max subtraction) of logits into probs.
void softmax(std::span<const double> logits, std::span<double> probs);

}  // namespace noisebound
