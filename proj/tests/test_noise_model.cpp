#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "noisebound/noise_model.hpp"
#include "noisebound/rng.hpp"
#include "oracle_helpers.hpp"

using namespace noisebound;

namespace {

PointwiseLoss as_pointwise(const LossSpec& spec) {
  return [spec](const ProbVector& q, std::size_t k) { return loss(spec, q, k); };
}

PointwiseLoss as_pointwise(const CorrectedLoss& cl) {
  return [cl](const ProbVector& q, std::size_t k) { return corrected_loss(cl, q, k); };
}

double linf(const ProbVector& a, const ProbVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("GCE inverse closed form") {
  // (0.64, 0.04)/0.68 for a = 0.5.
  const ProbVector q = f_inverse_gce(0.5, ProbVector({0.8, 0.2}));
  CHECK(q[0] == doctest::Approx(0.64 / 0.68).epsilon(1e-12));
  CHECK(q[1] == doctest::Approx(0.04 / 0.68).epsilon(1e-12));

  // Uniform and vertices are fixed points.
  for (double a : {0.3, 0.5, 0.7}) {
    const ProbVector u = f_inverse_gce(a, ProbVector({0.25, 0.25, 0.25, 0.25}));
    for (std::size_t i = 0; i < 4; ++i) CHECK(u[i] == doctest::Approx(0.25));
    const ProbVector e = f_inverse_gce(a, ProbVector({0.0, 1.0}));
    CHECK(e[1] == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(f_inverse_gce(1.0, ProbVector({0.5, 0.5})), std::domain_error);
}

TEST_CASE("GCE inverse agrees with the grid-argmin oracle") {
  LossSpec gce;
  gce.kind = LossKind::kGeneralizedCE;
  gce.gce_a = 0.5;
  const ProbVector p({0.8, 0.2});
  const ProbVector oracle = argmin_expected_oracle(as_pointwise(gce), p, 1e-3);
  const ProbVector closed = f_inverse_gce(0.5, p);
  CHECK(linf(oracle, closed) <= 1e-3);
}

TEST_CASE("SCE inverse: symmetric point pins lambda to 5") {
  // q = p by symmetry and 0.5/(lambda - 4) = 0.5 forces lambda = 5.
  const ProbVector p({0.5, 0.5});
  CHECK(sce_lambda(8.0, p.span()) == doctest::Approx(5.0).epsilon(1e-10));
  const ProbVector q = f_inverse_sce(8.0, p);
  CHECK(q[0] == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(q[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("SCE inverse at (0.7, 0.3) matches the quadratic-solve oracle") {
  // The normalization for two entries reduces to
  // lambda^2 - 9 lambda + 16.8 = 0, lambda = (9 + sqrt(13.8)) / 2.
  const double lambda_oracle = (9.0 + std::sqrt(13.8)) / 2.0;
  const ProbVector p({0.7, 0.3});
  CHECK(sce_lambda(8.0, p.span()) == doctest::Approx(lambda_oracle).epsilon(1e-10));

  const ProbVector q = f_inverse_sce(8.0, p);
  CHECK(q[0] == doctest::Approx(0.7 / (lambda_oracle - 5.6)).epsilon(1e-9));
  CHECK(q[1] == doctest::Approx(0.3 / (lambda_oracle - 2.4)).epsilon(1e-9));

  // Brute-force argmin of the expected SCE loss confirms it.
  LossSpec sce;
  sce.kind = LossKind::kSymmetricCE;
  sce.sce_A = 8.0;
  const ProbVector oracle = argmin_expected_oracle(as_pointwise(sce), p, 1e-5);
  CHECK(linf(oracle, q) <= 1e-5);
}

TEST_CASE("SCE inverse preserves certainty") {
  const ProbVector q = f_inverse_sce(8.0, ProbVector({1.0, 0.0}));
  CHECK(q[0] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("forward maps") {
  const NoiseModel id = NoiseModel::identity();
  const ProbVector p({0.3, 0.7});
  CHECK(linf(id.forward(p), p) == 0.0);

  const NoiseModel lin = NoiseModel::linear(TransitionMatrix::symmetric(0.4, 2));
  const ProbVector noisy = lin.forward(ProbVector({1.0, 0.0}));
  CHECK(noisy[0] == doctest::Approx(0.6));
  CHECK(noisy[1] == doctest::Approx(0.4));
}

TEST_CASE("round trips: f_inverse . f_forward = id and vice versa") {
  Rng rng(123);
  std::vector<NoiseModel> models;
  models.push_back(NoiseModel::identity());
  models.push_back(NoiseModel::gce_power(0.3));
  models.push_back(NoiseModel::gce_power(0.7));
  models.push_back(NoiseModel::sce_rational(2.0));
  models.push_back(NoiseModel::sce_rational(8.0));
  models.push_back(NoiseModel::linear(TransitionMatrix::symmetric(0.3, 4)));

  for (const auto& model : models) {
    const std::size_t c =
        model.kind() == NoiseModelKind::kLinearMatrix ? model.matrix().dim() : 4;
    for (int t = 0; t < 1000; ++t) {
      const ProbVector q = random_simplex_point(c, rng);
      CHECK(linf(model.inverse(model.forward(q)), q) <= 1e-8);
      const ProbVector p = model.forward(random_simplex_point(c, rng));
      CHECK(linf(model.forward(model.inverse(p)), p) <= 1e-8);
    }
  }
}

TEST_CASE("inverse maps preserve the ranking of entries") {
  Rng rng(321);
  std::vector<NoiseModel> models;
  models.push_back(NoiseModel::gce_power(0.4));
  models.push_back(NoiseModel::sce_rational(8.0));
  models.push_back(NoiseModel::linear(TransitionMatrix::symmetric(0.35, 5)));
  for (const auto& model : models) {
    const std::size_t c =
        model.kind() == NoiseModelKind::kLinearMatrix ? model.matrix().dim() : 5;
    for (int t = 0; t < 200; ++t) {
      const ProbVector p = model.forward(random_simplex_point(c, rng));
      const ProbVector q = model.inverse(p);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < c; ++j) {
          if (p[i] > p[j] + 1e-12) CHECK(q[i] >= q[j] - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("corrected loss values") {
  const CorrectedLoss fce = CorrectedLoss::fce(TransitionMatrix::symmetric(0.4, 2));
  const ProbVector e1({1.0, 0.0});
  CHECK(corrected_loss(fce, e1, 0) == doctest::Approx(0.511).epsilon(1e-3));
  CHECK(corrected_loss(fce, e1, 0) == doctest::Approx(-std::log(0.6)).epsilon(1e-12));
  // L_F(q, other) = -log(0.6 - 0.2 q) at q = 1 gives -log(0.4).
  CHECK(corrected_loss(fce, e1, 1) == doctest::Approx(-std::log(0.4)).epsilon(1e-12));

  LossSpec ce;
  const CorrectedLoss plain{ce, NoiseModel::identity()};
  const ProbVector q({0.3, 0.7});
  CHECK(corrected_loss(plain, q, 0) == doctest::Approx(loss(ce, q, 0)));
}

TEST_CASE("argmin oracle uncovers the noise model") {
  LossSpec gce;
  gce.kind = LossKind::kGeneralizedCE;
  gce.gce_a = 0.5;
  const ProbVector p({0.8, 0.2});
  CHECK(linf(argmin_expected_oracle(as_pointwise(gce), p, 1e-3),
             f_inverse_gce(0.5, p)) <= 1e-3);

  // A proper loss has the identity noise model.
  LossSpec ce;
  CHECK(linf(argmin_expected_oracle(as_pointwise(ce), p, 1e-3), p) <= 1e-3);

  // FCE recovers T^-1 p: for p = (0.6, 0.4) that is the vertex (1, 0).
  const CorrectedLoss fce = CorrectedLoss::fce(TransitionMatrix::symmetric(0.4, 2));
  CHECK(linf(argmin_expected_oracle(as_pointwise(fce), ProbVector({0.6, 0.4}), 1e-3),
             ProbVector({1.0, 0.0})) <= 1e-3);
}

TEST_CASE("ternary oracle agrees with closed forms") {
  Rng rng(5150);
  LossSpec gce;
  gce.kind = LossKind::kGeneralizedCE;
  gce.gce_a = 0.5;
  LossSpec sce;
  sce.kind = LossKind::kSymmetricCE;
  sce.sce_A = 8.0;
  for (int t = 0; t < 5; ++t) {
    const ProbVector p = random_simplex_point(3, rng);
    CHECK(linf(testing::argmin_refined(as_pointwise(gce), p, 1e-2, 1e-4),
               f_inverse_gce(0.5, p)) <= 1e-2);
    CHECK(linf(testing::argmin_refined(as_pointwise(sce), p, 1e-2, 1e-4),
               f_inverse_sce(8.0, p)) <= 1e-2);
  }
}

TEST_CASE("noise model grammar") {
  CHECK(NoiseModel::parse("identity", 3).kind() == NoiseModelKind::kIdentity);
  const NoiseModel g = NoiseModel::parse("gce:a=0.3", 3);
  CHECK(g.kind() == NoiseModelKind::kGcePower);
  CHECK(g.gce_a() == doctest::Approx(0.3));
  const NoiseModel s = NoiseModel::parse("sce:A=4", 3);
  CHECK(s.kind() == NoiseModelKind::kSceRational);
  CHECK(s.sce_A() == doctest::Approx(4.0));
  const NoiseModel m = NoiseModel::parse("sym:eta=0.4", 2);
  CHECK(m.kind() == NoiseModelKind::kLinearMatrix);
  CHECK(m.matrix().at(0, 0) == doctest::Approx(0.6));
  CHECK_THROWS_AS(NoiseModel::parse("warp:x=1", 3), std::domain_error);
  // Non-invertible symmetric matrices are rejected as noise models.
  CHECK_THROWS_AS(NoiseModel::parse("sym:eta=0.5", 2), std::domain_error);
}

TEST_CASE("forward maps stay on the simplex") {
  Rng rng(777);
  const NoiseModel g = NoiseModel::gce_power(0.6);
  const NoiseModel s = NoiseModel::sce_rational(8.0);
  for (int t = 0; t < 500; ++t) {
    const ProbVector q = random_simplex_point(3, rng);
    // ProbVector construction enforces the simplex invariants.
    CHECK_NOTHROW(ProbVector(g.forward(q).entries()));
    CHECK_NOTHROW(ProbVector(s.forward(q).entries()));
    CHECK_NOTHROW(ProbVector(g.inverse(q).entries()));
    CHECK_NOTHROW(ProbVector(s.inverse(q).entries()));
  }
}
