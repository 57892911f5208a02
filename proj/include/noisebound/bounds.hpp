#pragma once

#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "noisebound/losses.hpp"
#include "noisebound/noise_model.hpp"

namespace noisebound {

// A loss whose base-loss entropy drives the bound: either a plain LossSpec
// (GCE/SCE route through their implicit noise models) or an explicit
// correction.
using BoundLoss = std::variant<LossSpec, CorrectedLoss>;

std::string bound_loss_name(const BoundLoss& loss);

// The entropy function of the (proper) base loss at p. For CE/MSE that is the
// plug-in entropy p . L(p); for GCE/SCE it is p . L_f(f^-1(p)), substituting
// the closed-form inverses; for a corrected loss it is the base entropy. MAE
// has no proper base, so its plug-in entropy is used as a fallback.
double base_entropy(const BoundLoss& loss, const ProbVector& p);

// B(eta, c) = base entropy of u_sym(eta, c): the worst-case noisy entropy at
// average rate eta, and the floor no non-overfit predictor's loss crosses.
// Requires 0 <= eta <= (c-1)/c.
double noise_bound(const BoundLoss& loss, double eta, std::size_t c);

// Closed forms for B_GCE and B_SCE. For SCE lambda solves
// (1-eta)/(lambda - A(1-eta)) + eta(c-1)/(lambda(c-1) - A eta) = 1.
double noise_bound_gce_explicit(double a, double eta, std::size_t c);
double noise_bound_sce_explicit(double A, double eta, std::size_t c);

// [entropy(u_pair), entropy(u_sym)]: the range of possible noisy entropies at
// pointwise rate eta. Pairwise noise is the low end, symmetric the high end.
std::pair<double, double> entropy_interval(const BoundLoss& loss, double eta,
                                           std::size_t c);

struct BoundReport {
  std::string loss;
  double eta = 0.0;
  std::size_t c = 0;
  double bound = 0.0;
  double interval_low = 0.0;
  double interval_high = 0.0;
  double ratio = 1.0;  // high / low; 1 when both vanish
};

BoundReport make_bound_report(const BoundLoss& loss, double eta, std::size_t c);

struct WorstCaseReport {
  std::size_t n = 0;
  double mean_entropy = 0.0;    // mean over the field of entropy(u_sym(eta(x)))
  double bound_at_mean = 0.0;   // entropy(u_sym(mean eta))
  double margin = 0.0;          // bound_at_mean - mean_entropy, >= 0 by Jensen
};

// Checks that a constant noise rate maximizes the expected symmetric-noise
// entropy over any field with the same mean.
WorstCaseReport worst_case_check(const BoundLoss& loss,
                                 std::span<const double> eta_field, std::size_t c);

struct SensitivityRow {
  std::string loss;
  double eta = 0.0;
  std::size_t c = 0;
  double interval_low = 0.0;
  double interval_high = 0.0;
  double ratio = 1.0;
  double bound = 0.0;
};

// One row per (loss, eta): the upper/lower entropy limits and their ratio.
// The ratio measures how sensitive the bound is to the noise structure.
std::vector<SensitivityRow> sensitivity_curves(const std::vector<BoundLoss>& losses,
                                               std::size_t c,
                                               std::span<const double> eta_grid);

// CSV with header "loss,eta,c,interval_low,interval_high,ratio,bound".
std::string sensitivity_csv(const std::vector<SensitivityRow>& rows);

}  // namespace noisebound
