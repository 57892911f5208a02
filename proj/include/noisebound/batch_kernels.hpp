#pragma once

#include <cstddef>
#include <span>

#include "noisebound/bounded_loss.hpp"
#include "noisebound/dataset.hpp"
#include "noisebound/model.hpp"

namespace noisebound::kernels {

// Batch-level building blocks of the trainer. The functions in this namespace
// are the OpenMP production path; noisebound::kernels::serial holds the
// straight-line reference implementations kept for testing and benchmarks.
//
// Reductions are blocked: samples are split into fixed-size blocks, each block
// is summed in index order, and block partials are combined in block order.
// Results are therefore bit-identical for any thread count (they differ from
// the serial reference only by the reassociation of the final combine).
inline constexpr std::size_t kReductionBlock = 64;

// Softmax outputs for idx.size() samples into probs (row-major, c per row).
// For MLP models, `hidden_acts` (row-major, hidden per row) receives the
// post-ReLU activations for reuse by gradient_sum; pass {} for linear models.
void forward_batch(const Model& model, const Dataset& ds,
                   std::span<const std::size_t> idx, std::span<double> probs,
                   std::span<double> hidden_acts);

// Sum over the batch of the per-sample inner loss.
double loss_sum(const SampleLoss& loss, std::span<const int> labels,
                std::span<const std::size_t> idx, std::span<const double> probs);

// Sum over the batch of d(inner loss)/d(params), accumulated into grad
// (cleared first). Chain: dL/dq from the loss, softmax Jacobian, then the
// model layers. Callers apply the 1/N and the bound sign.
void gradient_sum(const Model& model, const SampleLoss& loss, const Dataset& ds,
                  std::span<const int> labels, std::span<const std::size_t> idx,
                  std::span<const double> probs, std::span<const double> hidden_acts,
                  std::span<double> grad);

// Number of samples whose argmax matches the label.
std::size_t correct_count(std::span<const int> labels,
                          std::span<const std::size_t> idx,
                          std::span<const double> probs, std::size_t c);

namespace serial {

void forward_batch(const Model& model, const Dataset& ds,
                   std::span<const std::size_t> idx, std::span<double> probs,
                   std::span<double> hidden_acts);
double loss_sum(const SampleLoss& loss, std::span<const int> labels,
                std::span<const std::size_t> idx, std::span<const double> probs);
void gradient_sum(const Model& model, const SampleLoss& loss, const Dataset& ds,
                  std::span<const int> labels, std::span<const std::size_t> idx,
                  std::span<const double> probs, std::span<const double> hidden_acts,
                  std::span<double> grad);
std::size_t correct_count(std::span<const int> labels,
                          std::span<const std::size_t> idx,
                          std::span<const double> probs, std::size_t c);

}  // namespace serial

// Per-sample backward pass shared by both implementations: given the softmax
// output and (for MLP) hidden activations of sample `row`, adds dL/dparams to
// `grad`. `dq` and `dz` are scratch of size c; `dhidden` of hidden size.
void accumulate_sample_gradient(const Model& model, const SampleLoss& loss,
                                std::span<const double> x, int label,
                                std::span<const double> q,
                                std::span<const double> hidden_act,
                                std::span<double> grad, std::span<double> dq,
                                std::span<double> dz, std::span<double> dhidden);

}  // namespace noisebound::kernels
