#include "noisebound/bounded_loss.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace noisebound {

void BoundedLossConfig::validate() const {
  if (bound < 0.0) throw std::domain_error("bounded loss: bound must be >= 0");
  if (bound_source == BoundSource::kNoiseBound) {
    const double expected = noise_bound(inner, eta, c);
    if (std::abs(bound - expected) > 1e-12) {
      throw std::logic_error("bounded loss: cached bound drifted from noise_bound");
    }
  }
  if (prior && (prior->eta < 0.0 || prior->eta > 1.0)) {
    throw std::domain_error("cep prior: eta must be in [0,1]");
  }
}

double cep_prior(const ProbVector& q, double eta, std::size_t c, double clamp_eps) {
  if (q.size() != c) throw std::domain_error("cep_prior: dimension mismatch");
  std::vector<double> target = u_sym(eta, c).entries();
  std::sort(target.begin(), target.end(), std::greater<>());
  std::vector<std::size_t> order(c);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
  double s = 0.0;
  for (std::size_t i = 0; i < c; ++i) {
    if (target[i] == 0.0) continue;
    s += target[i] * -std::log(std::max(q[order[i]], clamp_eps));
  }
  return s;
}

SampleLoss::SampleLoss(const BoundedLossConfig& cfg, std::size_t c)
    : c_(c), prior_(cfg.prior) {
  if (const auto* spec = std::get_if<LossSpec>(&cfg.inner)) {
    base_ = *spec;
  } else {
    const auto& cl = std::get<CorrectedLoss>(cfg.inner);
    base_ = cl.base;
    model_ = cl.model;
    switch (model_.kind()) {
      case NoiseModelKind::kIdentity:
        break;
      case NoiseModelKind::kLinearMatrix:
        corrected_ = true;
        matrix_ = &model_.matrix();
        if (matrix_->dim() != c) {
          throw std::domain_error("SampleLoss: matrix dimension mismatch");
        }
        break;
      default:
        // GCE/SCE are trained in their native forms; the correction view only
        // changes the bound, not the gradient.
        throw std::domain_error(
            "SampleLoss: non-linear corrected losses train natively; use the "
            "gce/sce loss spec instead");
    }
  }
  base_.validate();
  if (prior_) {
    prior_target_ = u_sym(prior_->eta, c).entries();
    std::sort(prior_target_.begin(), prior_target_.end(), std::greater<>());
  }
}

double SampleLoss::value(std::span<const double> q, std::size_t k) const {
  double v;
  if (corrected_) {
    std::vector<double> tq(c_, 0.0);
    for (std::size_t j = 0; j < c_; ++j) {
      const double qj = q[j];
      for (std::size_t i = 0; i < c_; ++i) tq[i] += matrix_->at(i, j) * qj;
    }
    v = loss_raw(base_, tq, k);
  } else {
    v = loss_raw(base_, q, k);
  }
  if (prior_) {
    std::vector<std::size_t> order(c_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
    double s = 0.0;
    for (std::size_t i = 0; i < c_; ++i) {
      if (prior_target_[i] == 0.0) continue;
      s += prior_target_[i] * -std::log(std::max(q[order[i]], base_.clamp_eps));
    }
    v += prior_->weight * s;
  }
  return v;
}

void SampleLoss::grad_q(std::span<const double> q, std::size_t k,
                        std::span<double> grad) const {
  const double eps = base_.clamp_eps;
  std::fill(grad.begin(), grad.end(), 0.0);

  if (corrected_) {
    // d L(Tq, k) / dq_j = (dL/dp_i) T_ij summed over i.
    const std::size_t n = c_;
    std::vector<double> tq(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double qj = q[j];
      for (std::size_t i = 0; i < n; ++i) tq[i] += matrix_->at(i, j) * qj;
    }
    std::vector<double> dp(n, 0.0);
    switch (base_.kind) {
      case LossKind::kCrossEntropy:
        if (tq[k] > eps) dp[k] = -1.0 / tq[k];
        break;
      case LossKind::kSymmetricCE:
        dp[k] = (tq[k] > eps ? -1.0 / tq[k] : 0.0) - base_.sce_A;
        break;
      case LossKind::kMeanAbsoluteError:
        dp[k] = -1.0;
        break;
      case LossKind::kGeneralizedCE:
        dp[k] = -std::pow(tq[k], base_.gce_a - 1.0);
        break;
      case LossKind::kMeanSquaredError:
        for (std::size_t i = 0; i < n; ++i) {
          dp[i] = 2.0 * (tq[i] - (i == k ? 1.0 : 0.0));
        }
        break;
    }
    for (std::size_t j = 0; j < n; ++j) {
      double g = 0.0;
      for (std::size_t i = 0; i < n; ++i) g += dp[i] * matrix_->at(i, j);
      grad[j] = g;
    }
  } else {
    switch (base_.kind) {
      case LossKind::kCrossEntropy:
        if (q[k] > eps) grad[k] = -1.0 / q[k];
        break;
      case LossKind::kSymmetricCE:
        grad[k] = (q[k] > eps ? -1.0 / q[k] : 0.0) - base_.sce_A;
        break;
      case LossKind::kMeanAbsoluteError:
        grad[k] = -1.0;
        break;
      case LossKind::kGeneralizedCE:
        grad[k] = -std::pow(q[k], base_.gce_a - 1.0);
        break;
      case LossKind::kMeanSquaredError:
        for (std::size_t i = 0; i < c_; ++i) {
          grad[i] = 2.0 * (q[i] - (i == k ? 1.0 : 0.0));
        }
        break;
    }
  }

  if (prior_) {
    std::vector<std::size_t> order(c_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return q[a] > q[b]; });
    for (std::size_t i = 0; i < c_; ++i) {
      if (prior_target_[i] == 0.0) continue;
      const std::size_t j = order[i];
      if (q[j] > eps) grad[j] += prior_->weight * -prior_target_[i] / q[j];
    }
  }
}

double batch_loss_from_mean(const BoundedLossConfig& cfg, double mean_inner) {
  return std::abs(mean_inner - cfg.bound);
}

int batch_gradient_scale(const BoundedLossConfig& cfg, double mean_inner) {
  return mean_inner >= cfg.bound ? 1 : -1;
}

double batch_loss(const BoundedLossConfig& cfg,
                  std::span<const ProbVector> predictions,
                  std::span<const std::size_t> labels) {
  if (predictions.empty()) throw std::domain_error("batch_loss: empty batch");
  if (predictions.size() != labels.size()) {
    throw std::domain_error("batch_loss: predictions/labels length mismatch");
  }
  const SampleLoss eval(cfg, predictions[0].size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    sum += eval.value(predictions[i].span(), labels[i]);
  }
  return batch_loss_from_mean(cfg, sum / static_cast<double>(predictions.size()));
}

namespace {

// Splits "a:b:c" on top-level colons.
std::vector<std::string_view> split_colons(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

BoundLoss parse_inner(std::string_view text, std::size_t c_hint) {
  if (text.substr(0, 4) == "fce:") {
    NoiseModel model = NoiseModel::parse(text.substr(4), c_hint);
    if (model.kind() != NoiseModelKind::kLinearMatrix) {
      throw std::domain_error("fce: needs a linear noise model (sym:/matrix:)");
    }
    LossSpec ce;
    ce.kind = LossKind::kCrossEntropy;
    return CorrectedLoss{ce, std::move(model)};
  }
  return LossSpec::parse(text);
}

}  // namespace

BoundedLossConfig BoundedLossConfig::parse(std::string_view text, std::size_t c_hint) {
  BoundedLossConfig cfg;

  // Peel off a "+cep:eta=<e>" suffix first.
  const auto plus = text.find("+cep:");
  if (plus != std::string_view::npos) {
    std::string_view cep = text.substr(plus + 5);
    if (cep.substr(0, 4) != "eta=") {
      throw std::domain_error("loss config: expected +cep:eta=<value>");
    }
    cfg.prior = CepPrior{std::stod(std::string(cep.substr(4))), 1.0};
    text = text.substr(0, plus);
  }

  if (text.substr(0, 8) != "bounded:") {
    cfg.inner = parse_inner(text, c_hint);
    cfg.bound = 0.0;
    cfg.bound_source = BoundSource::kExplicit;
    cfg.validate();
    return cfg;
  }

  const auto parts = split_colons(text.substr(8));
  if (parts.size() < 2) {
    throw std::domain_error("loss config: expected bounded:<inner>:<bound-spec>");
  }
  const std::string_view bound_part = parts.back();
  std::string inner_text;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (i) inner_text += ':';
    inner_text += parts[i];
  }
  cfg.inner = parse_inner(inner_text, c_hint);

  if (bound_part.substr(0, 2) == "B=") {
    cfg.bound = std::stod(std::string(bound_part.substr(2)));
    cfg.bound_source = BoundSource::kExplicit;
  } else if (bound_part.substr(0, 4) == "eta=") {
    const auto comma = bound_part.find(",c=");
    cfg.eta = std::stod(std::string(bound_part.substr(4, comma - 4)));
    cfg.c = comma == std::string_view::npos
                ? c_hint
                : static_cast<std::size_t>(std::stoul(std::string(bound_part.substr(comma + 3))));
    if (cfg.c < 2) {
      throw std::domain_error("loss config: eta= bound needs a class count");
    }
    cfg.bound_source = BoundSource::kNoiseBound;
    cfg.bound = noise_bound(cfg.inner, cfg.eta, cfg.c);
  } else {
    throw std::domain_error("loss config: bound spec must be B=<v> or eta=<e>,c=<c>");
  }
  cfg.validate();
  return cfg;
}

std::string BoundedLossConfig::to_string() const {
  std::string inner_text = bound_loss_name(inner);
  std::string out;
  char buf[64];
  if (bound_source == BoundSource::kNoiseBound) {
    std::snprintf(buf, sizeof(buf), "bounded:%s:eta=%g,c=%zu", inner_text.c_str(),
                  eta, c);
    out = buf;
  } else if (bound != 0.0) {
    std::snprintf(buf, sizeof(buf), "bounded:%s:B=%g", inner_text.c_str(), bound);
    out = buf;
  } else {
    out = inner_text;
  }
  if (prior) {
    std::snprintf(buf, sizeof(buf), "+cep:eta=%g", prior->eta);
    out += buf;
  }
  return out;
}

}  // namespace noisebound
