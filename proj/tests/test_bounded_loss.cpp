#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "noisebound/bounded_loss.hpp"
#include "noisebound/rng.hpp"

using namespace noisebound;

namespace {

BoundedLossConfig ce_bounded(double bound) {
  BoundedLossConfig cfg;
  cfg.inner = LossSpec{};  // ce
  cfg.bound = bound;
  return cfg;
}

}  // namespace

TEST_CASE("batch loss is the absolute deviation from the bound") {
  const auto cfg = ce_bounded(0.7);
  CHECK(batch_loss_from_mean(cfg, 1.0) == doctest::Approx(0.3));
  CHECK(batch_loss_from_mean(cfg, 0.5) == doctest::Approx(0.2));
  CHECK(batch_loss_from_mean(ce_bounded(0.0), 0.42) == doctest::Approx(0.42));
}

TEST_CASE("gradient scale flips below the bound") {
  const auto cfg = ce_bounded(0.7);
  CHECK(batch_gradient_scale(cfg, 1.0) == 1);
  CHECK(batch_gradient_scale(cfg, 0.5) == -1);
  CHECK(batch_gradient_scale(cfg, 0.7) == 1);  // documented tie convention
}

TEST_CASE("reflection symmetry around the bound") {
  Rng rng(8);
  const auto cfg = ce_bounded(0.673);
  for (int t = 0; t < 200; ++t) {
    const double d = rng.uniform(0.0, 2.0);
    CHECK(batch_loss_from_mean(cfg, cfg.bound + d) ==
          doctest::Approx(batch_loss_from_mean(cfg, cfg.bound - d)).epsilon(1e-12));
  }
}

TEST_CASE("batch loss over predictions") {
  const auto cfg = ce_bounded(0.0);
  const std::vector<ProbVector> preds = {ProbVector({0.6, 0.4}),
                                         ProbVector({0.3, 0.7})};
  const std::vector<std::size_t> labels = {0, 1};
  const double expected = 0.5 * (-std::log(0.6) - std::log(0.7));
  CHECK(batch_loss(cfg, preds, labels) == doctest::Approx(expected).epsilon(1e-12));
  CHECK_THROWS_AS(batch_loss(cfg, {}, {}), std::domain_error);
}

TEST_CASE("cep prior on pinned cases") {
  // Any permutation of u_sym scores exactly the CE noise bound.
  const double b = -0.6 * std::log(0.6) - 0.4 * std::log(0.4);
  CHECK(cep_prior(ProbVector({0.4, 0.6}), 0.4, 2) == doctest::Approx(b).epsilon(1e-12));
  CHECK(cep_prior(ProbVector({0.6, 0.4}), 0.4, 2) == doctest::Approx(b).epsilon(1e-12));

  CHECK(cep_prior(ProbVector({0.0, 1.0, 0.0}), 0.0, 3) == doctest::Approx(0.0));

  // Scalar oracle: -0.6 ln 0.9 - 0.4 ln 0.1.
  CHECK(cep_prior(ProbVector({0.9, 0.1}), 0.4, 2) ==
        doctest::Approx(-0.6 * std::log(0.9) - 0.4 * std::log(0.1)).epsilon(1e-12));
}

TEST_CASE("cep prior is permutation invariant") {
  Rng rng(55);
  for (int t = 0; t < 200; ++t) {
    const std::size_t c = 2 + rng.below(5);
    const ProbVector q = random_simplex_point(c, rng);
    std::vector<double> shuffled = q.entries();
    rng.shuffle(std::span<double>(shuffled));
    CHECK(cep_prior(ProbVector(shuffled), 0.3, c) ==
          doctest::Approx(cep_prior(q, 0.3, c)).epsilon(1e-12));
  }
}

TEST_CASE("cep prior is minimized by the target shape") {
  Rng rng(56);
  const double eta = 0.4;
  const std::size_t c = 5;
  const double at_target = cep_prior(u_sym(eta, c), eta, c);
  for (int t = 0; t < 500; ++t) {
    CHECK(cep_prior(random_simplex_point(c, rng), eta, c) >= at_target - 1e-12);
  }
}

TEST_CASE("sample loss matches the plain loss functions") {
  Rng rng(77);
  std::vector<BoundedLossConfig> configs;
  for (const char* text : {"ce", "mse", "mae", "gce:a=0.4", "sce:A=8"}) {
    BoundedLossConfig cfg;
    cfg.inner = LossSpec::parse(text);
    configs.push_back(cfg);
  }
  for (const auto& cfg : configs) {
    const SampleLoss eval(cfg, 4);
    const auto& spec = std::get<LossSpec>(cfg.inner);
    for (int t = 0; t < 100; ++t) {
      const ProbVector q = random_simplex_point(4, rng);
      const std::size_t k = rng.below(4);
      CHECK(eval.value(q.span(), k) == doctest::Approx(loss(spec, q, k)).epsilon(1e-12));
    }
  }
}

TEST_CASE("sample loss matches corrected_loss for FCE") {
  Rng rng(78);
  const CorrectedLoss fce = CorrectedLoss::fce(TransitionMatrix::symmetric(0.3, 3));
  BoundedLossConfig cfg;
  cfg.inner = fce;
  const SampleLoss eval(cfg, 3);
  for (int t = 0; t < 100; ++t) {
    const ProbVector q = random_simplex_point(3, rng);
    const std::size_t k = rng.below(3);
    CHECK(eval.value(q.span(), k) ==
          doctest::Approx(corrected_loss(fce, q, k)).epsilon(1e-12));
  }
}

TEST_CASE("sample loss gradient matches finite differences in q") {
  Rng rng(79);
  std::vector<BoundedLossConfig> configs;
  for (const char* text :
       {"ce", "mse", "mae", "gce:a=0.4", "sce:A=8", "ce+cep:eta=0.3"}) {
    configs.push_back(BoundedLossConfig::parse(text, 4));
  }
  {
    BoundedLossConfig fce;
    fce.inner = CorrectedLoss::fce(TransitionMatrix::symmetric(0.3, 4));
    configs.push_back(fce);
  }

  const double h = 1e-6;
  for (const auto& cfg : configs) {
    const SampleLoss eval(cfg, 4);
    for (int t = 0; t < 25; ++t) {
      // Well-separated entries keep the CEP sort stable under perturbation.
      std::vector<double> q = {0.4 + 0.2 * rng.uniform(), 0.3, 0.2, 0.1};
      const double norm = q[0] + 0.6;
      for (double& x : q) x /= norm;
      const std::size_t k = rng.below(4);
      std::vector<double> grad(4);
      eval.grad_q(q, k, grad);
      for (std::size_t j = 0; j < 4; ++j) {
        std::vector<double> hi = q, lo = q;
        hi[j] += h;
        lo[j] -= h;
        const double fd = (eval.value(hi, k) - eval.value(lo, k)) / (2.0 * h);
        CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("config grammar") {
  const auto plain = BoundedLossConfig::parse("ce", 10);
  CHECK(plain.bound == 0.0);
  CHECK_FALSE(plain.prior.has_value());

  const auto explicit_bound = BoundedLossConfig::parse("bounded:ce:B=0.5", 10);
  CHECK(explicit_bound.bound == doctest::Approx(0.5));
  CHECK(explicit_bound.bound_source == BoundSource::kExplicit);

  const auto nb = BoundedLossConfig::parse("bounded:gce:a=0.3:eta=0.4,c=10", 2);
  CHECK(nb.bound_source == BoundSource::kNoiseBound);
  CHECK(nb.c == 10);
  CHECK(nb.bound == doctest::Approx(noise_bound(nb.inner, 0.4, 10)).epsilon(1e-15));

  const auto fce = BoundedLossConfig::parse("bounded:fce:sym:eta=0.4:B=0.673", 2);
  CHECK(std::holds_alternative<CorrectedLoss>(fce.inner));
  CHECK(fce.bound == doctest::Approx(0.673));

  const auto cep = BoundedLossConfig::parse("bounded:ce:eta=0.4,c=2+cep:eta=0.4", 2);
  CHECK(cep.prior.has_value());
  CHECK(cep.prior->eta == doctest::Approx(0.4));
  CHECK(cep.bound == doctest::Approx(0.6730116670).epsilon(1e-9));

  // The class count defaults to the hint when ",c=" is omitted.
  const auto hinted = BoundedLossConfig::parse("bounded:ce:eta=0.4", 10);
  CHECK(hinted.c == 10);

  CHECK_THROWS_AS(BoundedLossConfig::parse("bounded:ce", 10), std::domain_error);
  CHECK_THROWS_AS(BoundedLossConfig::parse("bounded:ce:Q=1", 10), std::domain_error);
  CHECK_THROWS_AS(BoundedLossConfig::parse("bounded:ce:B=-1", 10), std::domain_error);

  CHECK(BoundedLossConfig::parse("bounded:ce:B=0.5", 10).to_string() ==
        "bounded:ce:B=0.5");
  CHECK(BoundedLossConfig::parse("ce+cep:eta=0.2", 10).to_string() ==
        "ce+cep:eta=0.2");
}
