// Times the OpenMP batch kernels against the serial reference on a synthetic
// workload. Build and run:
//   cmake --build build --target bench_kernels && ./build/bench/bench_kernels
// Optional args: [n] [dim] [hidden] [classes] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "noisebound/batch_kernels.hpp"

using namespace noisebound;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    body();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
  const std::size_t dim = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 32;
  const std::size_t hidden = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 256;
  const std::size_t classes = argc > 4 ? std::strtoull(argv[4], nullptr, 10) : 10;
  const int reps = argc > 5 ? std::atoi(argv[5]) : 5;

  const Dataset data = make_blobs(classes, n / classes, dim, 6.0, 1);
  Model model = Model::mlp(dim, hidden, classes);
  model.init(2);

  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> probs(idx.size() * classes);
  std::vector<double> hidden_acts(idx.size() * hidden);
  std::vector<double> grad(model.param_count());

  BoundedLossConfig cfg;
  cfg.inner = CorrectedLoss::fce(TransitionMatrix::symmetric(0.3, classes));
  const SampleLoss loss(cfg, classes);

#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#else
  std::printf("threads: 1 (no OpenMP)\n");
#endif
  std::printf("n=%zu dim=%zu hidden=%zu classes=%zu, best of %d\n\n", idx.size(),
               dim, hidden, classes, reps);

  const double fwd_s = time_best_of(reps, [&] {
    kernels::serial::forward_batch(model, data, idx, probs, hidden_acts);
  });
  const double fwd_p = time_best_of(reps, [&] {
    kernels::forward_batch(model, data, idx, probs, hidden_acts);
  });
  std::printf("forward_batch   serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              1e3 * fwd_s, 1e3 * fwd_p, fwd_s / fwd_p);

  const double ls_s = time_best_of(reps, [&] {
    (void)kernels::serial::loss_sum(loss, data.labels, idx, probs);
  });
  const double ls_p = time_best_of(reps, [&] {
    (void)kernels::loss_sum(loss, data.labels, idx, probs);
  });
  std::printf("loss_sum        serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              1e3 * ls_s, 1e3 * ls_p, ls_s / ls_p);

  const double gr_s = time_best_of(reps, [&] {
    kernels::serial::gradient_sum(model, loss, data, data.labels, idx, probs,
                                  hidden_acts, grad);
  });
  const double gr_p = time_best_of(reps, [&] {
    kernels::gradient_sum(model, loss, data, data.labels, idx, probs,
                          hidden_acts, grad);
  });
  std::printf("gradient_sum    serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              1e3 * gr_s, 1e3 * gr_p, gr_s / gr_p);

  const double cc_s = time_best_of(reps, [&] {
    (void)kernels::serial::correct_count(data.labels, idx, probs, classes);
  });
  const double cc_p = time_best_of(reps, [&] {
    (void)kernels::correct_count(data.labels, idx, probs, classes);
  });
  std::printf("correct_count   serial %8.2f ms   omp %8.2f ms   speedup %.2fx\n",
              1e3 * cc_s, 1e3 * cc_p, cc_s / cc_p);
  return 0;
}
