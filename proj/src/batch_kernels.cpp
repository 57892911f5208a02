#include "noisebound/batch_kernels.hpp"

#include <algorithm>
#include <vector>

namespace noisebound::kernels {

void accumulate_sample_gradient(const Model& model, const SampleLoss& loss,
                                std::span<const double> x, int label,
                                std::span<const double> q,
                                std::span<const double> hidden_act,
                                std::span<double> grad, std::span<double> dq,
                                std::span<double> dz, std::span<double> dhidden) {
  const std::size_t c = model.num_classes;
  const std::size_t d = model.in_dim;

  loss.grad_q(q, static_cast<std::size_t>(label), dq);

  // Through the softmax: dL/dz_j = q_j (g_j - sum_i q_i g_i).
  double inner = 0.0;
  for (std::size_t i = 0; i < c; ++i) inner += q[i] * dq[i];
  for (std::size_t j = 0; j < c; ++j) dz[j] = q[j] * (dq[j] - inner);

  if (model.kind == Model::Kind::kLinear) {
    for (std::size_t k = 0; k < c; ++k) {
      const double g = dz[k];
      double* wrow = grad.data() + k * d;
      for (std::size_t j = 0; j < d; ++j) wrow[j] += g * x[j];
      grad[c * d + k] += g;
    }
    return;
  }

  const std::size_t h = model.hidden;
  const double* w2 = model.params.data() + h * d + h;
  double* g_w1 = grad.data();
  double* g_b1 = grad.data() + h * d;
  double* g_w2 = g_b1 + h;
  double* g_b2 = g_w2 + c * h;

  for (std::size_t k = 0; k < c; ++k) {
    const double g = dz[k];
    double* wrow = g_w2 + k * h;
    for (std::size_t u = 0; u < h; ++u) wrow[u] += g * hidden_act[u];
    g_b2[k] += g;
  }
  for (std::size_t u = 0; u < h; ++u) {
    double g = 0.0;
    for (std::size_t k = 0; k < c; ++k) g += dz[k] * w2[k * h + u];
    dhidden[u] = hidden_act[u] > 0.0 ? g : 0.0;  // ReLU mask
  }
  for (std::size_t u = 0; u < h; ++u) {
    const double g = dhidden[u];
    if (g == 0.0) continue;
    double* wrow = g_w1 + u * d;
    for (std::size_t j = 0; j < d; ++j) wrow[j] += g * x[j];
    g_b1[u] += g;
  }
}

void forward_batch(const Model& model, const Dataset& ds,
                   std::span<const std::size_t> idx, std::span<double> probs,
                   std::span<double> hidden_acts) {
  const std::size_t n = idx.size();
  const std::size_t c = model.num_classes;
  const std::size_t h = model.hidden_size();
  const auto ni = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < ni; ++i) {
    const auto u = static_cast<std::size_t>(i);
    std::span<double> hrow =
        h == 0 ? std::span<double>{} : hidden_acts.subspan(u * h, h);
    model.forward(ds.row(idx[u]), probs.subspan(u * c, c), hrow);
  }
}

double loss_sum(const SampleLoss& loss, std::span<const int> labels,
                std::span<const std::size_t> idx, std::span<const double> probs) {
  const std::size_t n = idx.size();
  const std::size_t c = loss.num_classes();
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(lo + kReductionBlock, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      s += loss.value(probs.subspan(i * c, c),
                      static_cast<std::size_t>(labels[idx[i]]));
    }
    partial[static_cast<std::size_t>(b)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

void gradient_sum(const Model& model, const SampleLoss& loss, const Dataset& ds,
                  std::span<const int> labels, std::span<const std::size_t> idx,
                  std::span<const double> probs, std::span<const double> hidden_acts,
                  std::span<double> grad) {
  const std::size_t n = idx.size();
  const std::size_t c = model.num_classes;
  const std::size_t h = model.hidden_size();
  const std::size_t np = model.param_count();
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;

  std::vector<double> partial(blocks * np, 0.0);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(lo + kReductionBlock, n);
    std::span<double> block_grad(partial.data() + static_cast<std::size_t>(b) * np, np);
    std::vector<double> dq(c), dz(c), dhidden(h);
    for (std::size_t i = lo; i < hi; ++i) {
      std::span<const double> hrow =
          h == 0 ? std::span<const double>{} : hidden_acts.subspan(i * h, h);
      accumulate_sample_gradient(model, loss, ds.row(idx[i]), labels[idx[i]],
                                 probs.subspan(i * c, c), hrow, block_grad, dq, dz,
                                 dhidden);
    }
  }
  std::fill(grad.begin(), grad.end(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const double* src = partial.data() + b * np;
    for (std::size_t p = 0; p < np; ++p) grad[p] += src[p];
  }
}

std::size_t correct_count(std::span<const int> labels,
                          std::span<const std::size_t> idx,
                          std::span<const double> probs, std::size_t c) {
  const auto n = static_cast<std::ptrdiff_t>(idx.size());
  std::size_t correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const double* row = probs.data() + u * c;
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (row[k] > row[best]) best = k;
    }
    if (static_cast<int>(best) == labels[idx[u]]) ++correct;
  }
  return correct;
}

namespace serial {

void forward_batch(const Model& model, const Dataset& ds,
                   std::span<const std::size_t> idx, std::span<double> probs,
                   std::span<double> hidden_acts) {
  const std::size_t c = model.num_classes;
  const std::size_t h = model.hidden_size();
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::span<double> hrow =
        h == 0 ? std::span<double>{} : hidden_acts.subspan(i * h, h);
    model.forward(ds.row(idx[i]), probs.subspan(i * c, c), hrow);
  }
}

double loss_sum(const SampleLoss& loss, std::span<const int> labels,
                std::span<const std::size_t> idx, std::span<const double> probs) {
  const std::size_t c = loss.num_classes();
  double s = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    s += loss.value(probs.subspan(i * c, c),
                    static_cast<std::size_t>(labels[idx[i]]));
  }
  return s;
}

void gradient_sum(const Model& model, const SampleLoss& loss, const Dataset& ds,
                  std::span<const int> labels, std::span<const std::size_t> idx,
                  std::span<const double> probs, std::span<const double> hidden_acts,
                  std::span<double> grad) {
  const std::size_t c = model.num_classes;
  const std::size_t h = model.hidden_size();
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> dq(c), dz(c), dhidden(h);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    std::span<const double> hrow =
        h == 0 ? std::span<const double>{} : hidden_acts.subspan(i * h, h);
    accumulate_sample_gradient(model, loss, ds.row(idx[i]), labels[idx[i]],
                               probs.subspan(i * c, c), hrow, grad, dq, dz, dhidden);
  }
}

std::size_t correct_count(std::span<const int> labels,
                          std::span<const std::size_t> idx,
                          std::span<const double> probs, std::size_t c) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* row = probs.data() + i * c;
    std::size_t best = 0;
    for (std::size_t k = 1; k < c; ++k) {
      if (row[k] > row[best]) best = k;
    }
    if (static_cast<int>(best) == labels[idx[i]]) ++correct;
  }
  return correct;
}

}  // namespace serial
}  // namespace noisebound::kernels
