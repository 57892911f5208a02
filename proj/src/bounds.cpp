#include "noisebound/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace noisebound {

namespace {

void check_eta_range(double eta, std::size_t c) {
  if (c < 2) throw std::domain_error("noise bound: c must be >= 2");
  const double cap = static_cast<double>(c - 1) / static_cast<double>(c);
  if (eta < 0.0 || eta > cap + 1e-15) {
    throw std::domain_error("noise bound: eta must be in [0, (c-1)/c]");
  }
}

}  // namespace

std::string bound_loss_name(const BoundLoss& loss) {
  if (const auto* spec = std::get_if<LossSpec>(&loss)) return spec->to_string();
  return std::get<CorrectedLoss>(loss).to_string();
}

double base_entropy(const BoundLoss& loss, const ProbVector& p) {
  if (const auto* spec = std::get_if<LossSpec>(&loss)) {
    switch (spec->kind) {
      case LossKind::kGeneralizedCE: {
        // p . L_f(f^-1(p)): the substitution route through the implicit model.
        const ProbVector q = f_inverse_gce(spec->gce_a, p);
        return expected_loss(*spec, p, q);
      }
      case LossKind::kSymmetricCE: {
        const ProbVector q = f_inverse_sce(spec->sce_A, p);
        return expected_loss(*spec, p, q);
      }
      default:
        return entropy(*spec, p);
    }
  }
  // Corrected loss: L_f(f^-1(p)) = L(p), so the base entropy is the plug-in
  // entropy of the base loss.
  return entropy(std::get<CorrectedLoss>(loss).base, p);
}

double noise_bound(const BoundLoss& loss, double eta, std::size_t c) {
  check_eta_range(eta, c);
  if (eta == 0.0) return 0.0;
  return base_entropy(loss, u_sym(eta, c));
}

double noise_bound_gce_explicit(double a, double eta, std::size_t c) {
  if (a <= 0.0 || a >= 1.0) throw std::domain_error("B_GCE: a must satisfy 0 < a < 1");
  check_eta_range(eta, c);
  if (eta == 0.0) return 0.0;
  const double exponent = 1.0 / (1.0 - a);
  const double head = std::pow(1.0 - eta, exponent);
  const double tail = std::pow(eta / static_cast<double>(c - 1), exponent);
  const double z = head + static_cast<double>(c - 1) * tail;
  const double q_head = head / z;
  const double q_tail = tail / z;
  return (1.0 - eta) / a * (1.0 - std::pow(q_head, a)) +
         eta / a * (1.0 - std::pow(q_tail, a));
}

double noise_bound_sce_explicit(double A, double eta, std::size_t c) {
  if (A <= 0.0) throw std::domain_error("B_SCE: A must be > 0");
  check_eta_range(eta, c);
  if (eta == 0.0) return 0.0;
  const double p_head = 1.0 - eta;
  const double p_tail = eta / static_cast<double>(c - 1);
  // u_sym has two distinct entries, so the normalization
  //   p_head/(lambda - A p_head) + (c-1) p_tail/(lambda - A p_tail) = 1
  // is a quadratic in lambda; the + root is the one above A max(p).
  const double b = 1.0 + A * (p_head + p_tail);
  const double q0 = A * p_head * p_tail * (static_cast<double>(c) + A);
  const double disc = std::max(b * b - 4.0 * q0, 0.0);
  const double lambda = 0.5 * (b + std::sqrt(disc));
  const double q_head = p_head / (lambda - A * p_head);
  const double q_tail = p_tail / (lambda - A * p_tail);
  return p_head * (-std::log(q_head) + A * (1.0 - q_head)) +
         eta * (-std::log(q_tail) + A * (1.0 - q_tail));
}

std::pair<double, double> entropy_interval(const BoundLoss& loss, double eta,
                                           std::size_t c) {
  check_eta_range(eta, c);
  if (eta == 0.0) return {0.0, 0.0};
  return {base_entropy(loss, u_pair(eta, c)), base_entropy(loss, u_sym(eta, c))};
}

BoundReport make_bound_report(const BoundLoss& loss, double eta, std::size_t c) {
  BoundReport report;
  report.loss = bound_loss_name(loss);
  report.eta = eta;
  report.c = c;
  const auto [low, high] = entropy_interval(loss, eta, c);
  report.interval_low = low;
  report.interval_high = high;
  report.bound = high;
  report.ratio = low > 0.0 ? high / low : 1.0;
  return report;
}

WorstCaseReport worst_case_check(const BoundLoss& loss,
                                 std::span<const double> eta_field, std::size_t c) {
  if (eta_field.empty()) throw std::domain_error("worst_case_check: empty field");
  WorstCaseReport report;
  report.n = eta_field.size();
  double mean_eta = 0.0;
  double mean_entropy = 0.0;
  for (double eta : eta_field) {
    check_eta_range(eta, c);
    mean_eta += eta;
    mean_entropy += eta == 0.0 ? 0.0 : base_entropy(loss, u_sym(eta, c));
  }
  mean_eta /= static_cast<double>(report.n);
  mean_entropy /= static_cast<double>(report.n);
  report.mean_entropy = mean_entropy;
  report.bound_at_mean =
      mean_eta == 0.0 ? 0.0 : base_entropy(loss, u_sym(mean_eta, c));
  report.margin = report.bound_at_mean - report.mean_entropy;
  return report;
}

std::vector<SensitivityRow> sensitivity_curves(const std::vector<BoundLoss>& losses,
                                               std::size_t c,
                                               std::span<const double> eta_grid) {
  std::vector<SensitivityRow> rows;
  rows.reserve(losses.size() * eta_grid.size());
  for (const BoundLoss& loss : losses) {
    for (double eta : eta_grid) {
      SensitivityRow row;
      row.loss = bound_loss_name(loss);
      row.eta = eta;
      row.c = c;
      const auto [low, high] = entropy_interval(loss, eta, c);
      row.interval_low = low;
      row.interval_high = high;
      row.ratio = low > 0.0 ? high / low : 1.0;
      row.bound = high;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  std::string out = "loss,eta,c,interval_low,interval_high,ratio,bound\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%.10g,%zu,%.10g,%.10g,%.10g,%.10g\n",
                  r.loss.c_str(), r.eta, r.c, r.interval_low, r.interval_high,
                  r.ratio, r.bound);
    out += buf;
  }
  return out;
}

}  // namespace noisebound
