#include "noisebound/losses.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "noisebound/rng.hpp"

namespace noisebound {

namespace {

double log_clamped(double q, double eps) {
  if (q < eps) q = eps;
  if (q <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(q);
}

}  // namespace

bool LossSpec::strictly_proper() const {
  return kind == LossKind::kCrossEntropy || kind == LossKind::kMeanSquaredError;
}

void LossSpec::validate() const {
  if (kind == LossKind::kGeneralizedCE && (gce_a <= 0.0 || gce_a >= 1.0)) {
    throw std::domain_error("gce: a must satisfy 0 < a < 1 (the a->0 limit is \"ce\")");
  }
  if (kind == LossKind::kSymmetricCE && sce_A <= 0.0) {
    throw std::domain_error("sce: A must be > 0");
  }
  if (clamp_eps < 0.0) throw std::domain_error("loss: clamp_eps must be >= 0");
}

double loss_raw(const LossSpec& spec, std::span<const double> q, std::size_t k) {
  if (k >= q.size()) throw std::domain_error("loss: class index out of range");
  switch (spec.kind) {
    case LossKind::kCrossEntropy:
      return -log_clamped(q[k], spec.clamp_eps);
    case LossKind::kMeanSquaredError: {
      double s = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        const double d = q[i] - (i == k ? 1.0 : 0.0);
        s += d * d;
      }
      return s;
    }
    case LossKind::kMeanAbsoluteError:
      return 1.0 - q[k];
    case LossKind::kGeneralizedCE:
      return (1.0 - std::pow(q[k], spec.gce_a)) / spec.gce_a;
    case LossKind::kSymmetricCE:
      return -log_clamped(q[k], spec.clamp_eps) + spec.sce_A * (1.0 - q[k]);
  }
  return 0.0;
}

double loss(const LossSpec& spec, const ProbVector& q, std::size_t k) {
  return loss_raw(spec, q.span(), k);
}

std::vector<double> loss_vector(const LossSpec& spec, const ProbVector& q) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = loss_raw(spec, q.span(), i);
  return out;
}

double expected_loss(const LossSpec& spec, const ProbVector& p, const ProbVector& q) {
  if (p.size() != q.size()) {
    throw std::domain_error("expected_loss: dimension mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;  // 0 * (possibly infinite) loss contributes 0
    s += p[i] * loss_raw(spec, q.span(), i);
  }
  return s;
}

double entropy(const LossSpec& spec, const ProbVector& p) {
  return expected_loss(spec, p, p);
}

ProbVector random_simplex_point(std::size_t c, Rng& rng) {
  std::vector<double> v(c);
  double sum = 0.0;
  for (double& x : v) {
    double u;
    do {
      u = rng.uniform();
    } while (u <= 0.0);
    x = -std::log(u);
    sum += x;
  }
  for (double& x : v) x /= sum;
  return ProbVector(std::move(v));
}

PropernessReport check_properness(const LossSpec& spec, int trials, std::uint64_t seed) {
  if (trials < 1) throw std::domain_error("check_properness: trials must be >= 1");
  Rng rng(seed);
  PropernessReport report;
  report.trials = trials;
  for (int t = 0; t < trials; ++t) {
    const std::size_t c = 2 + rng.below(6);
    const ProbVector p = random_simplex_point(c, rng);
    const ProbVector q = random_simplex_point(c, rng);
    if (expected_loss(spec, p, q) - entropy(spec, p) < -1e-9) {
      ++report.gap_violations;
    }
    std::vector<double> mid(c);
    for (std::size_t i = 0; i < c; ++i) mid[i] = 0.5 * (p[i] + q[i]);
    const double h_mid = entropy(spec, ProbVector(std::move(mid)));
    if (h_mid - 0.5 * (entropy(spec, p) + entropy(spec, q)) < -1e-9) {
      ++report.concavity_violations;
    }
  }
  return report;
}

LossSpec LossSpec::parse(std::string_view text) {
  LossSpec spec;
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  auto parse_param = [&](std::string_view key) -> double {
    if (rest.substr(0, key.size()) != key || rest.size() <= key.size() ||
        rest[key.size()] != '=') {
      throw std::domain_error("loss spec: expected \"" + std::string(head) + ":" +
                              std::string(key) + "=<value>\"");
    }
    return std::stod(std::string(rest.substr(key.size() + 1)));
  };

  if (head == "ce") {
    spec.kind = LossKind::kCrossEntropy;
  } else if (head == "mse") {
    spec.kind = LossKind::kMeanSquaredError;
  } else if (head == "mae") {
    spec.kind = LossKind::kMeanAbsoluteError;
  } else if (head == "gce") {
    spec.kind = LossKind::kGeneralizedCE;
    if (!rest.empty()) spec.gce_a = parse_param("a");
  } else if (head == "sce") {
    spec.kind = LossKind::kSymmetricCE;
    if (!rest.empty()) spec.sce_A = parse_param("A");
  } else {
    throw std::domain_error("unknown loss \"" + std::string(text) + "\"");
  }
  spec.validate();
  return spec;
}

std::string LossSpec::to_string() const {
  switch (kind) {
    case LossKind::kCrossEntropy:
      return "ce";
    case LossKind::kMeanSquaredError:
      return "mse";
    case LossKind::kMeanAbsoluteError:
      return "mae";
    case LossKind::kGeneralizedCE: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "gce:a=%g", gce_a);
      return buf;
    }
    case LossKind::kSymmetricCE: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "sce:A=%g", sce_A);
      return buf;
    }
  }
  return "?";
}

}  // namespace noisebound
