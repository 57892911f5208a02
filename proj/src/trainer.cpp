#include "noisebound/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "noisebound/batch_kernels.hpp"
#include "noisebound/rng.hpp"

namespace noisebound {

namespace {

// Seed-stream tags so model init, shuffles and sweep runs never collide.
constexpr std::uint64_t kTagInit = 1;
constexpr std::uint64_t kTagEpoch = 1000;

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

struct EvalBuffers {
  std::vector<double> probs;
  std::vector<double> hidden;
  void resize(std::size_t n, std::size_t c, std::size_t h) {
    probs.resize(n * c);
    hidden.resize(n * h);
  }
};

}  // namespace

void TrainConfig::validate() const {
  loss.validate();
  if (epochs < 1) throw std::domain_error("train: epochs must be >= 1");
  if (batch_size < 1) throw std::domain_error("train: batch_size must be >= 1");
  if (learning_rate <= 0.0) throw std::domain_error("train: learning_rate must be > 0");
  if (lr_decay_factor <= 0.0) {
    throw std::domain_error("train: lr_decay_factor must be > 0");
  }
  if (divergence_factor <= 1.0) {
    throw std::domain_error("train: divergence_factor must be > 1");
  }
}

double mean_inner_loss(const Model& model, const BoundedLossConfig& loss,
                       const Dataset& batch, std::span<const std::size_t> idx) {
  std::vector<std::size_t> fallback;
  if (idx.empty()) {
    fallback = all_indices(batch.size());
    idx = fallback;
  }
  const SampleLoss eval(loss, model.num_classes);
  EvalBuffers buf;
  buf.resize(idx.size(), model.num_classes, model.hidden_size());
  kernels::forward_batch(model, batch, idx, buf.probs, buf.hidden);
  return kernels::loss_sum(eval, batch.labels, idx, buf.probs) /
         static_cast<double>(idx.size());
}

double batch_objective(const Model& model, const BoundedLossConfig& loss,
                       const Dataset& batch, std::span<const std::size_t> idx) {
  return batch_loss_from_mean(loss, mean_inner_loss(model, loss, batch, idx));
}

std::vector<double> gradients(const Model& model, const BoundedLossConfig& loss,
                              const Dataset& batch, std::span<const std::size_t> idx) {
  std::vector<std::size_t> fallback;
  if (idx.empty()) {
    fallback = all_indices(batch.size());
    idx = fallback;
  }
  const SampleLoss eval(loss, model.num_classes);
  EvalBuffers buf;
  buf.resize(idx.size(), model.num_classes, model.hidden_size());
  kernels::forward_batch(model, batch, idx, buf.probs, buf.hidden);
  const double mean =
      kernels::loss_sum(eval, batch.labels, idx, buf.probs) /
      static_cast<double>(idx.size());
  const int sign = batch_gradient_scale(loss, mean);

  std::vector<double> grad(model.param_count());
  kernels::gradient_sum(model, eval, batch, batch.labels, idx, buf.probs,
                        buf.hidden, grad);
  const double scale = static_cast<double>(sign) / static_cast<double>(idx.size());
  for (double& g : grad) g *= scale;
  return grad;
}

double accuracy(const Model& model, const Dataset& ds, bool against_clean) {
  const auto idx = all_indices(ds.size());
  EvalBuffers buf;
  buf.resize(idx.size(), model.num_classes, model.hidden_size());
  kernels::forward_batch(model, ds, idx, buf.probs, buf.hidden);
  const auto& labels = against_clean && ds.has_clean() ? ds.clean_labels : ds.labels;
  return static_cast<double>(
             kernels::correct_count(labels, idx, buf.probs, model.num_classes)) /
         static_cast<double>(idx.size());
}

RunMetrics train(Model& model, const Dataset& train_data, const Dataset* test,
                 const TrainConfig& cfg) {
  cfg.validate();
  train_data.validate();
  if (train_data.num_classes != model.num_classes ||
      train_data.dim != model.in_dim) {
    throw std::domain_error("train: dataset incompatible with model dimensions");
  }
  if (test != nullptr) {
    if (test->num_classes != model.num_classes || test->dim != model.in_dim) {
      throw std::domain_error("train: test set incompatible with model");
    }
  }

  const std::size_t n = train_data.size();
  const std::size_t c = model.num_classes;
  const std::size_t h = model.hidden_size();
  const std::size_t bs = static_cast<std::size_t>(cfg.batch_size);
  const SampleLoss eval(cfg.loss, c);

  model.init(derive_seed(cfg.seed, kTagInit));

  RunMetrics metrics;
  metrics.initial_raw_loss = mean_inner_loss(model, cfg.loss, train_data);
  const double divergence_ceiling =
      cfg.divergence_factor * std::max(metrics.initial_raw_loss, 1e-3);
  metrics.min_batch_raw_loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> order = all_indices(n);
  std::vector<double> grad(model.param_count());
  EvalBuffers batch_buf;
  batch_buf.resize(std::min(bs, n), c, h);

  double lr = cfg.learning_rate;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.lr_decay_epoch > 0 && epoch == cfg.lr_decay_epoch) {
      lr *= cfg.lr_decay_factor;
    }
    Rng shuffle_rng(derive_seed(cfg.seed, kTagEpoch + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    double epoch_min_batch = std::numeric_limits<double>::infinity();
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t len = std::min(bs, n - start);
      std::span<const std::size_t> idx(order.data() + start, len);
      kernels::forward_batch(model, train_data, idx,
                             std::span<double>(batch_buf.probs.data(), len * c),
                             std::span<double>(batch_buf.hidden.data(), len * h));
      const double mean =
          kernels::loss_sum(eval, train_data.labels, idx,
                            std::span<const double>(batch_buf.probs.data(), len * c)) /
          static_cast<double>(len);
      epoch_min_batch = std::min(epoch_min_batch, mean);
      const int sign = batch_gradient_scale(cfg.loss, mean);
      kernels::gradient_sum(model, eval, train_data, train_data.labels, idx,
                            std::span<const double>(batch_buf.probs.data(), len * c),
                            std::span<const double>(batch_buf.hidden.data(), len * h),
                            grad);
      const double step =
          lr * static_cast<double>(sign) / static_cast<double>(len);
      for (std::size_t p = 0; p < grad.size(); ++p) model.params[p] -= step * grad[p];
    }

    EpochMetrics em;
    em.epoch = epoch;
    em.raw_loss = mean_inner_loss(model, cfg.loss, train_data);
    em.bounded_loss = batch_loss_from_mean(cfg.loss, em.raw_loss);
    em.noisy_train_acc = accuracy(model, train_data, /*against_clean=*/false);
    em.test_acc = test != nullptr
                      ? accuracy(model, *test, /*against_clean=*/true)
                      : std::numeric_limits<double>::quiet_NaN();
    em.min_batch_raw = epoch_min_batch;
    metrics.min_batch_raw_loss = std::min(metrics.min_batch_raw_loss, epoch_min_batch);
    metrics.epochs.push_back(em);

    if (!std::isfinite(em.raw_loss) || em.raw_loss > divergence_ceiling) {
      metrics.diverged = true;
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "training diverged at epoch %d: raw loss %.6g exceeds %.6g "
                    "(%.1fx initial)",
                    epoch, em.raw_loss, divergence_ceiling, cfg.divergence_factor);
      throw DivergenceError(msg, metrics);
    }
  }

  const EpochMetrics& last = metrics.epochs.back();
  metrics.final_bounded_loss = last.bounded_loss;
  metrics.final_raw_loss = last.raw_loss;
  metrics.final_test_acc = last.test_acc;
  metrics.final_noisy_train_acc = last.noisy_train_acc;
  return metrics;
}

std::vector<SweepPoint> sweep_bound(const Model& prototype, const Dataset& train_data,
                                    const Dataset& test, const TrainConfig& base,
                                    std::span<const double> eta_grid,
                                    std::span<const std::uint64_t> seeds, int jobs) {
  if (eta_grid.empty() || seeds.empty()) {
    throw std::domain_error("sweep_bound: empty grid or seed list");
  }
  const std::size_t c = prototype.num_classes;
  std::vector<SweepPoint> points(eta_grid.size());
  for (std::size_t g = 0; g < eta_grid.size(); ++g) {
    points[g].eta_hat = eta_grid[g];
    points[g].bound = noise_bound(base.loss.inner, eta_grid[g], c);
    points[g].per_seed_acc.assign(seeds.size(), 0.0);
  }

  const std::size_t total = eta_grid.size() * seeds.size();
  const auto nt = static_cast<std::ptrdiff_t>(total);
#ifdef _OPENMP
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#else
  (void)jobs;
  const int threads = 1;
#endif
  std::string first_error;  // exceptions must not escape the parallel region
#pragma omp parallel for schedule(dynamic) num_threads(threads)
  for (std::ptrdiff_t r = 0; r < nt; ++r) {
    const std::size_t g = static_cast<std::size_t>(r) / seeds.size();
    const std::size_t s = static_cast<std::size_t>(r) % seeds.size();
    try {
      TrainConfig cfg = base;
      cfg.seed = seeds[s];
      cfg.loss.bound_source = BoundSource::kNoiseBound;
      cfg.loss.eta = eta_grid[g];
      cfg.loss.c = c;
      cfg.loss.bound = points[g].bound;
      Model model = prototype;
      const RunMetrics run = train(model, train_data, &test, cfg);
      points[g].per_seed_acc[s] = run.final_test_acc;
    } catch (const DivergenceError&) {
      points[g].per_seed_acc[s] = std::numeric_limits<double>::quiet_NaN();
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) first_error = e.what();
    }
  }
  if (!first_error.empty()) throw std::runtime_error("sweep_bound: " + first_error);

  for (auto& pt : points) {
    double sum = 0.0;
    pt.min_acc = pt.per_seed_acc.front();
    pt.max_acc = pt.per_seed_acc.front();
    for (double a : pt.per_seed_acc) {
      sum += a;
      pt.min_acc = std::min(pt.min_acc, a);
      pt.max_acc = std::max(pt.max_acc, a);
    }
    pt.mean_acc = sum / static_cast<double>(pt.per_seed_acc.size());
  }
  return points;
}

std::string metrics_to_csv(const RunMetrics& metrics) {
  std::string out = "epoch,bounded_loss,raw_loss,test_acc,noisy_train_acc\n";
  char buf[192];
  for (const auto& em : metrics.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.10g,%.10g,%.10g,%.10g\n", em.epoch,
                  em.bounded_loss, em.raw_loss, em.test_acc, em.noisy_train_acc);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "final,%.10g,%.10g,%.10g,%.10g\n",
                metrics.final_bounded_loss, metrics.final_raw_loss,
                metrics.final_test_acc, metrics.final_noisy_train_acc);
  out += buf;
  return out;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& points) {
  std::string out = "eta_hat,bound,mean_acc,min_acc,max_acc,seeds\n";
  char buf[192];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g,%.10g,%.10g,%zu\n",
                  pt.eta_hat, pt.bound, pt.mean_acc, pt.min_acc, pt.max_acc,
                  pt.per_seed_acc.size());
    out += buf;
  }
  return out;
}

}  // namespace noisebound
