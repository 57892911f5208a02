#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "noisebound/losses.hpp"
#include "noisebound/simplex.hpp"

namespace noisebound {

enum class NoiseModelKind { kIdentity, kLinearMatrix, kGcePower, kSceRational };

struct SceSolverConfig {
  double sum_tol = 1e-12;
  int max_iters = 200;
};

// f^-1 of the GCE noise model: tempered softening with exponent 1/(1-a),
// (f^-1(p))_i = p_i^{1/(1-a)} / sum_j p_j^{1/(1-a)}.
ProbVector f_inverse_gce(double a, const ProbVector& p);

// f^-1 of the SCE noise model: (f^-1(p))_i = p_i / (lambda - A p_i) with
// lambda > A max(p) solving the normalization by bisection (the sum is
// strictly decreasing in lambda, so bracketing always succeeds).
ProbVector f_inverse_sce(double A, const ProbVector& p,
                         const SceSolverConfig& cfg = {});

// The lambda of the SCE inverse, exposed for the explicit bound formulas.
double sce_lambda(double A, std::span<const double> p,
                  const SceSolverConfig& cfg = {});

// An injective simplex map f with its inverse: the noise model of a
// generalized forward-correction. Linear kind is f(q) = T q; GCE and SCE are
// the non-linear maps implied by those losses.
class NoiseModel {
 public:
  NoiseModel() = default;  // identity

  static NoiseModel identity();
  static NoiseModel linear(TransitionMatrix t);
  static NoiseModel gce_power(double a);
  static NoiseModel sce_rational(double A, SceSolverConfig cfg = {});

  NoiseModelKind kind() const { return kind_; }
  const TransitionMatrix& matrix() const;
  double gce_a() const { return a_; }
  double sce_A() const { return A_; }

  // f(q): what the noisy labeller observes when the clean posterior is q.
  ProbVector forward(const ProbVector& q) const;

  // f^-1(p). For the linear kind this throws std::domain_error when T^-1 p
  // leaves the simplex; use TransitionMatrix::invert for the raw solve.
  ProbVector inverse(const ProbVector& p) const;

  // Grammar: "identity", "matrix:<csv-path>", "gce:a=0.4", "sce:A=8",
  // "sym:eta=0.4" (needs the class count).
  static NoiseModel parse(std::string_view text, std::size_t c);
  std::string to_string() const;

 private:
  NoiseModelKind kind_ = NoiseModelKind::kIdentity;
  std::shared_ptr<const TransitionMatrix> matrix_;
  double a_ = 0.4;
  double A_ = 8.0;
  SceSolverConfig sce_cfg_;
  std::string label_ = "identity";
};

// L_f(q, k) = L(f(q), k). The base loss must be strictly proper for the bound
// theory to apply; FCE is (CE, linear T).
struct CorrectedLoss {
  LossSpec base;
  NoiseModel model;

  static CorrectedLoss fce(TransitionMatrix t, double clamp_eps = 1e-12);
  std::string to_string() const;
};

double corrected_loss(const CorrectedLoss& cl, const ProbVector& q, std::size_t k);
std::vector<double> corrected_loss_vector(const CorrectedLoss& cl, const ProbVector& q);
double corrected_expected_loss(const CorrectedLoss& cl, const ProbVector& p,
                               const ProbVector& q);

// Brute-force minimizer of H_{L}(p, .) over a simplex grid, c in {2, 3}. The
// independent oracle validating the closed-form inverses: the minimizer of a
// corrected expected loss is f^-1(p).
using PointwiseLoss = std::function<double(const ProbVector&, std::size_t)>;
ProbVector argmin_expected_oracle(const PointwiseLoss& loss_fn, const ProbVector& p,
                                  double grid_step);

}  // namespace noisebound
