// End-to-end acceptance suite. Each check prints one PASS/FAIL line; the
// process exits with the number of failures.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "noisebound/bounds.hpp"
#include "noisebound/dataset.hpp"
#include "noisebound/rng.hpp"
#include "noisebound/trainer.hpp"
#include "oracle_helpers.hpp"

using namespace noisebound;

namespace {

int g_failures = 0;

void report(int id, bool pass, const std::string& detail) {
  std::printf("criterion %2d: %s — %s\n", id, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void report_skip(int id, const std::string& detail) {
  std::printf("criterion %2d: SKIP — %s\n", id, detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

LossSpec make_loss(LossKind kind, double a = 0.4, double A = 8.0) {
  LossSpec spec;
  spec.kind = kind;
  spec.gce_a = a;
  spec.sce_A = A;
  return spec;
}

// ---------------------------------------------------------------------------
// 1. Table 1, analytic: B_CE(0.4, 2), the FCE floor at a vertex, CE's floor.

void criterion_1() {
  const double bound = noise_bound(make_loss(LossKind::kCrossEntropy), 0.4, 2);
  const CorrectedLoss fce = CorrectedLoss::fce(TransitionMatrix::symmetric(0.4, 2));
  const double fce_floor = corrected_loss(fce, ProbVector({1.0, 0.0}), 0);
  const double ce_floor = loss(make_loss(LossKind::kCrossEntropy),
                               ProbVector({1.0, 0.0}), 0);
  const bool pass = std::abs(bound - 0.673) <= 1e-3 &&
                    std::abs(fce_floor - 0.511) <= 1e-3 && ce_floor == 0.0;
  report(1, pass,
         fmt("B_CE(0.4,2)=%.6f (0.673±1e-3), FCE floor=%.6f (0.511±1e-3), "
             "CE floor=%g (exactly 0)",
             bound, fce_floor, ce_floor));
}

// ---------------------------------------------------------------------------
// 2. Table 1, empirical: a memorizing MLP drives FCE batch losses to the 0.511
// floor while FCE+B pins the raw mean at 0.673.

void criterion_2() {
  Dataset train_data = make_blobs(2, 1000, 50, 6.0, 7);
  NoiseInjector inj;
  inj.kind = NoiseInjector::Kind::kSymmetric;
  inj.eta = 0.4;
  inj.seed = 99;
  train_data = inject(train_data, inj);
  const Dataset test_data = make_blobs(2, 500, 50, 6.0, 8);

  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 32;
  cfg.learning_rate = 0.2;
  cfg.lr_decay_factor = 0.6;
  cfg.lr_decay_epoch = 120;
  cfg.seed = 1;

  cfg.loss = BoundedLossConfig::parse("fce:sym:eta=0.4", 2);
  Model fce_model = Model::mlp(50, 1024, 2);
  const RunMetrics fce_run = train(fce_model, train_data, &test_data, cfg);

  cfg.loss = BoundedLossConfig::parse("bounded:fce:sym:eta=0.4:eta=0.4,c=2", 2);
  const double bound = cfg.loss.bound;
  Model fceb_model = Model::mlp(50, 1024, 2);
  const RunMetrics fceb_run = train(fceb_model, train_data, &test_data, cfg);

  const bool overfits = fce_run.min_batch_raw_loss <= 0.52;
  bool stabilizes = true;
  for (std::size_t e = fceb_run.epochs.size() - 10; e < fceb_run.epochs.size(); ++e) {
    stabilizes = stabilizes && std::abs(fceb_run.epochs[e].raw_loss - bound) <= 0.05;
  }
  report(2, overfits && stabilizes,
         fmt("FCE min batch loss=%.4f (<=0.52, floor 0.511); FCE+B raw mean "
             "over last 10 epochs within %.4f±0.05 (final %.4f)",
             fce_run.min_batch_raw_loss, bound, fceb_run.final_raw_loss));
}

// ---------------------------------------------------------------------------
// 3. The estimated-noise-rate sweep shows the bump: peak near the true rate,
// at least 5 points above the unbounded run.

void criterion_3() {
  Dataset train_data = make_blobs(10, 50, 12, 8.0, 7);
  NoiseInjector inj;
  inj.kind = NoiseInjector::Kind::kSymmetric;
  inj.eta = 0.4;
  inj.seed = 99;
  train_data = inject(train_data, inj);
  const Dataset test_data = make_blobs(10, 100, 12, 8.0, 8);

  TrainConfig base;
  base.loss = BoundedLossConfig::parse("fce:sym:eta=0.4", 10);
  base.epochs = 3000;
  base.batch_size = 500;  // full batch: the bound reads the exact mean
  base.learning_rate = 0.06;
  base.lr_decay_epoch = 0;

  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(0.05 * i);
  const std::vector<std::uint64_t> seeds = {1, 2, 3};
  const Model proto = Model::mlp(12, 192, 10);
  const auto points =
      sweep_bound(proto, train_data, test_data, base, grid, seeds, 0);

  std::size_t argmax = 0;
  for (std::size_t g = 1; g < points.size(); ++g) {
    if (points[g].mean_acc > points[argmax].mean_acc) argmax = g;
  }
  const double peak = points[argmax].mean_acc;
  const double at_zero = points[0].mean_acc;
  const double peak_eta = points[argmax].eta_hat;
  const bool pass = peak >= at_zero + 0.05 && std::abs(peak_eta - 0.4) <= 0.1 + 1e-12;
  report(3, pass,
         fmt("sweep peak acc=%.3f at eta_hat=%.2f (true 0.4±0.1), unbounded "
             "acc=%.3f, lift=%.1f points (>=5)",
             peak, peak_eta, at_zero, 100.0 * (peak - at_zero)));
}

// ---------------------------------------------------------------------------
// 4. Closed-form noise-model inverses match the brute-force argmin.

void criterion_4() {
  Rng rng(424242);
  double worst = 0.0;
  std::string worst_case = "none";
  bool pass = true;

  auto check = [&](const std::string& name, const NoiseModel& model,
                   const PointwiseLoss& loss_fn, std::size_t c) {
    const double step = c == 2 ? 1e-3 : 1e-2;
    for (int t = 0; t < 50; ++t) {
      const ProbVector p = model.forward(random_simplex_point(c, rng));
      const ProbVector brute =
          noisebound::testing::argmin_refined(loss_fn, p, step, step / 50.0);
      const ProbVector closed = model.inverse(p);
      double dist = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        dist = std::max(dist, std::abs(brute[i] - closed[i]));
      }
      if (dist > worst) {
        worst = dist;
        worst_case = name + fmt(" c=%zu", c);
      }
      if (dist > step) pass = false;
    }
  };

  for (std::size_t c : {std::size_t{2}, std::size_t{3}}) {
    for (double a : {0.3, 0.5, 0.7}) {
      const LossSpec gce = make_loss(LossKind::kGeneralizedCE, a);
      check(fmt("gce:a=%g", a), NoiseModel::gce_power(a),
            [gce](const ProbVector& q, std::size_t k) { return loss(gce, q, k); },
            c);
    }
    for (double A : {2.0, 8.0}) {
      const LossSpec sce = make_loss(LossKind::kSymmetricCE, 0.4, A);
      check(fmt("sce:A=%g", A), NoiseModel::sce_rational(A),
            [sce](const ProbVector& q, std::size_t k) { return loss(sce, q, k); },
            c);
    }
  }
  report(4, pass,
         fmt("f-inverse vs grid argmin over 50 random p per case; worst linf "
             "deviation %.2e (%s), within grid resolution",
             worst, worst_case.c_str()));
}

// ---------------------------------------------------------------------------
// 5. Explicit appendix bounds agree with the generic substitution route.

void criterion_5() {
  double worst = 0.0;
  bool pass = true;
  for (double eta : {0.1, 0.2, 0.4}) {
    for (std::size_t c : {2, 10, 100}) {
      for (double a : {0.3, 0.5, 0.7}) {
        const LossSpec spec = make_loss(LossKind::kGeneralizedCE, a);
        const ProbVector u = u_sym(eta, c);
        const double generic = expected_loss(spec, u, f_inverse_gce(a, u));
        const double gap = std::abs(noise_bound_gce_explicit(a, eta, c) - generic);
        worst = std::max(worst, gap);
        if (gap > 1e-8) pass = false;
      }
      for (double A : {2.0, 8.0}) {
        const LossSpec spec = make_loss(LossKind::kSymmetricCE, 0.4, A);
        const ProbVector u = u_sym(eta, c);
        const double generic = expected_loss(spec, u, f_inverse_sce(A, u));
        const double gap = std::abs(noise_bound_sce_explicit(A, eta, c) - generic);
        worst = std::max(worst, gap);
        if (gap > 1e-8) pass = false;
      }
    }
  }
  report(5, pass,
         fmt("explicit B_GCE/B_SCE vs u.L_f(f^-1(u)) over eta x c x params; "
             "worst gap %.2e (<=1e-8)",
             worst));
}

// ---------------------------------------------------------------------------
// 6. Entropy interval containment and the Jensen worst case, 10^4 draws each.

void criterion_6() {
  Rng rng(606060);
  const std::size_t c = 6;
  const double eta = 0.37;
  const std::vector<BoundLoss> losses = {
      make_loss(LossKind::kCrossEntropy), make_loss(LossKind::kGeneralizedCE, 0.4),
      make_loss(LossKind::kSymmetricCE, 0.4, 8.0)};

  int interval_violations = 0;
  std::vector<std::pair<double, double>> intervals;
  for (const auto& loss : losses) intervals.push_back(entropy_interval(loss, eta, c));
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> post(c);
    post[0] = 1.0 - eta;
    double sum = 0.0;
    std::vector<double> tail(c - 1);
    for (double& x : tail) {
      double u;
      do {
        u = rng.uniform();
      } while (u <= 0.0);
      x = -std::log(u);
      sum += x;
    }
    for (std::size_t i = 1; i < c; ++i) post[i] = eta * tail[i - 1] / sum;
    const ProbVector p(post);
    for (std::size_t l = 0; l < losses.size(); ++l) {
      const double h = base_entropy(losses[l], p);
      if (h < intervals[l].first - 1e-9 || h > intervals[l].second + 1e-9) {
        ++interval_violations;
      }
    }
  }

  int jensen_violations = 0;
  std::vector<double> field(16);
  for (int t = 0; t < 10000; ++t) {
    for (double& x : field) x = rng.uniform(0.0, 0.5);
    const auto& loss = losses[static_cast<std::size_t>(t) % losses.size()];
    if (worst_case_check(loss, field, 10).margin < -1e-12) ++jensen_violations;
  }

  report(6, interval_violations == 0 && jensen_violations == 0,
         fmt("interval containment violations=%d, Jensen violations=%d over "
             "10^4 draws each (CE, GCE(0.4), SCE(8))",
             interval_violations, jensen_violations));
}

// ---------------------------------------------------------------------------
// 7. Analytic gradients vs central finite differences for every loss
// configuration and both model kinds.

void criterion_7() {
  const Dataset batch = make_blobs(3, 6, 4, 5.0, 303);
  const std::vector<std::string> inners = {"ce",         "mse",
                                           "mae",        "gce:a=0.4",
                                           "sce:A=8",    "fce:sym:eta=0.3"};
  std::vector<BoundedLossConfig> configs;
  for (const auto& inner : inners) {
    configs.push_back(BoundedLossConfig::parse(inner, 3));
    configs.push_back(BoundedLossConfig::parse("bounded:" + inner + ":B=0.05", 3));
  }
  configs.push_back(BoundedLossConfig::parse("ce+cep:eta=0.3", 3));
  configs.push_back(BoundedLossConfig::parse("bounded:ce:B=0.05+cep:eta=0.3", 3));

  double worst = 0.0;
  bool pass = true;
  int checked = 0;
  for (auto kind : {Model::Kind::kLinear, Model::Kind::kMlp}) {
    Model model =
        kind == Model::Kind::kLinear ? Model::linear(4, 3) : Model::mlp(4, 6, 3);
    for (const auto& cfg : configs) {
      for (std::uint64_t point = 0; point < 20; ++point) {
        model.init(derive_seed(700 + point, point));
        const double mean = mean_inner_loss(model, cfg, batch);
        if (std::abs(mean - cfg.bound) < 1e-4) continue;  // kink neighborhood

        const std::vector<double> analytic = gradients(model, cfg, batch);
        Model probe = model;
        const double h = 1e-6;
        double num = 0.0, da = 0.0, df = 0.0;
        for (std::size_t p = 0; p < analytic.size(); ++p) {
          const double saved = probe.params[p];
          probe.params[p] = saved + h;
          const double hi = batch_objective(probe, cfg, batch);
          probe.params[p] = saved - h;
          const double lo = batch_objective(probe, cfg, batch);
          probe.params[p] = saved;
          const double fd = (hi - lo) / (2.0 * h);
          num += (analytic[p] - fd) * (analytic[p] - fd);
          da += analytic[p] * analytic[p];
          df += fd * fd;
        }
        const double rel =
            std::sqrt(num) / std::max({std::sqrt(da), std::sqrt(df), 1e-12});
        worst = std::max(worst, rel);
        if (rel >= 1e-5) pass = false;
        ++checked;
      }
    }
  }
  report(7, pass,
         fmt("analytic vs central-difference gradients, %d points over 14 loss "
             "configs x 2 model kinds; worst relative error %.2e (<1e-5)",
             checked, worst));
}

// ---------------------------------------------------------------------------
// 8. Concentration: the optimal predictor's FCE batch loss has mean 0.673 and
// a standard deviation falling as 1/sqrt(N).

void criterion_8() {
  const CorrectedLoss fce = CorrectedLoss::fce(TransitionMatrix::symmetric(0.4, 2));
  BoundedLossConfig cfg;
  cfg.inner = fce;
  const SampleLoss eval(cfg, 2);

  Rng rng(808080);
  const int batches = 400;
  std::vector<std::size_t> sizes = {100, 1000, 10000};
  std::vector<double> sds, means;
  for (std::size_t n : sizes) {
    std::vector<double> batch_means(batches);
    for (int b = 0; b < batches; ++b) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        // Separable point with clean label 0; the optimal no-peek predictor
        // forecasts it deterministically.
        const double q[2] = {1.0, 0.0};
        const std::size_t noisy = rng.uniform() < 0.4 ? 1 : 0;
        sum += eval.value(q, noisy);
      }
      batch_means[b] = sum / static_cast<double>(n);
    }
    double m = 0.0;
    for (double x : batch_means) m += x;
    m /= batches;
    double var = 0.0;
    for (double x : batch_means) var += (x - m) * (x - m);
    var /= batches - 1;
    means.push_back(m);
    sds.push_back(std::sqrt(var));
  }

  const double expected_ratio = std::sqrt(10.0);
  const double r1 = sds[0] / sds[1];
  const double r2 = sds[1] / sds[2];
  const bool ratios_ok = r1 >= expected_ratio / 1.5 && r1 <= expected_ratio * 1.5 &&
                         r2 >= expected_ratio / 1.5 && r2 <= expected_ratio * 1.5;
  // Batch-mean average should sit near the bound at every N.
  bool means_ok = true;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double se = sds[i] / std::sqrt(static_cast<double>(batches));
    means_ok = means_ok && std::abs(means[i] - 0.6730116670) <= 4.0 * se;
  }
  report(8, ratios_ok && means_ok,
         fmt("FCE batch-loss sd: %.4f/%.4f/%.4f for N=100/1000/10000; ratios "
             "%.2f, %.2f vs sqrt(10)=3.16 (within 1.5x); means %.4f/%.4f/%.4f",
             sds[0], sds[1], sds[2], r1, r2, means[0], means[1], means[2]));
}

// ---------------------------------------------------------------------------
// 9. Sensitivity ordering of Appendix-figure curves at eta = 0.4.

void criterion_9() {
  const BoundLoss ce = make_loss(LossKind::kCrossEntropy);
  const BoundLoss gce = make_loss(LossKind::kGeneralizedCE, 0.4);
  const BoundLoss sce = make_loss(LossKind::kSymmetricCE, 0.4, 8.0);
  auto ratio = [](const BoundLoss& loss, std::size_t c) {
    const auto [lo, hi] = entropy_interval(loss, 0.4, c);
    return hi / lo;
  };
  const double ce200 = ratio(ce, 200);
  const double ce10 = ratio(ce, 10);
  const double gce200 = ratio(gce, 200);
  const double sce200 = ratio(sce, 200);
  const bool pass = ce200 > gce200 && ce200 > sce200 && ce200 > ce10;
  report(9, pass,
         fmt("interval ratios at eta=0.4: CE(c=200)=%.3f > GCE(0.4)=%.3f, "
             "SCE(8)=%.3f, CE(c=10)=%.3f",
             ce200, gce200, sce200, ce10));
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  report_skip(10,
              "ResNet-scale table reproductions are out of scope at desk "
              "scale; criterion 3 is the sanctioned substitute");
  if (g_failures == 0) {
    std::printf("acceptance: all criteria passed\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", g_failures);
  }
  return g_failures;
}
