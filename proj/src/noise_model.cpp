#include "noisebound/noise_model.hpp"

#include <cmath>
#include <stdexcept>

namespace noisebound {

namespace {

constexpr double kTinyEntry = 1e-12;  // clamp before powering / division

}  // namespace

ProbVector f_inverse_gce(double a, const ProbVector& p) {
  if (a <= 0.0 || a >= 1.0) {
    throw std::domain_error("f_inverse_gce: a must satisfy 0 < a < 1");
  }
  const double exponent = 1.0 / (1.0 - a);
  std::vector<double> v(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    v[i] = std::pow(p[i], exponent);
    sum += v[i];
  }
  for (double& x : v) x /= sum;
  return ProbVector(std::move(v));
}

double sce_lambda(double A, std::span<const double> p, const SceSolverConfig& cfg) {
  if (A <= 0.0) throw std::domain_error("sce: A must be > 0");
  double pmax = 0.0;
  for (double x : p) pmax = std::max(pmax, x);

  auto normalization_sum = [&](double lambda) {
    double s = 0.0;
    for (double x : p) {
      const double xc = std::max(x, kTinyEntry);
      s += xc / (lambda - A * xc);
    }
    return s;
  };

  // The sum decreases strictly from +inf at lambda -> A*pmax to 0 at infinity,
  // so double upward until it drops below 1, then bisect.
  double lo = A * pmax + 1e-12;
  double hi = A * pmax + 1.0;
  int guard = 0;
  while (normalization_sum(hi) > 1.0) {
    hi *= 2.0;
    if (++guard > 200) {
      throw std::runtime_error("sce_lambda: failed to bracket the root");
    }
  }
  for (int it = 0; it < cfg.max_iters; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double s = normalization_sum(mid);
    if (std::abs(s - 1.0) < cfg.sum_tol) return mid;
    if (s > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ProbVector f_inverse_sce(double A, const ProbVector& p, const SceSolverConfig& cfg) {
  const double lambda = sce_lambda(A, p.span(), cfg);
  std::vector<double> v(p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pc = std::max(p[i], kTinyEntry);
    v[i] = pc / (lambda - A * pc);
    sum += v[i];
  }
  for (double& x : v) x /= sum;
  return ProbVector(std::move(v));
}

NoiseModel NoiseModel::identity() { return NoiseModel(); }

NoiseModel NoiseModel::linear(TransitionMatrix t) {
  if (!t.invertible()) {
    throw std::domain_error("NoiseModel::linear: matrix must be invertible");
  }
  NoiseModel m;
  m.kind_ = NoiseModelKind::kLinearMatrix;
  m.matrix_ = std::make_shared<const TransitionMatrix>(std::move(t));
  m.label_ = "matrix";
  return m;
}

NoiseModel NoiseModel::gce_power(double a) {
  if (a <= 0.0 || a >= 1.0) {
    throw std::domain_error("NoiseModel::gce_power: a must satisfy 0 < a < 1");
  }
  NoiseModel m;
  m.kind_ = NoiseModelKind::kGcePower;
  m.a_ = a;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "gce:a=%g", a);
  m.label_ = buf;
  return m;
}

NoiseModel NoiseModel::sce_rational(double A, SceSolverConfig cfg) {
  if (A <= 0.0) throw std::domain_error("NoiseModel::sce_rational: A must be > 0");
  NoiseModel m;
  m.kind_ = NoiseModelKind::kSceRational;
  m.A_ = A;
  m.sce_cfg_ = cfg;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sce:A=%g", A);
  m.label_ = buf;
  return m;
}

const TransitionMatrix& NoiseModel::matrix() const {
  if (kind_ != NoiseModelKind::kLinearMatrix) {
    throw std::logic_error("NoiseModel::matrix: not a linear model");
  }
  return *matrix_;
}

ProbVector NoiseModel::forward(const ProbVector& q) const {
  switch (kind_) {
    case NoiseModelKind::kIdentity:
      return q;
    case NoiseModelKind::kLinearMatrix:
      return matrix_->apply(q);
    case NoiseModelKind::kGcePower: {
      // The inverse of a power-normalize map is the power-normalize map with
      // the reciprocal exponent, so f(q)_i is proportional to q_i^{1-a}.
      std::vector<double> v(q.size());
      double sum = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        v[i] = std::pow(q[i], 1.0 - a_);
        sum += v[i];
      }
      for (double& x : v) x /= sum;
      return ProbVector(std::move(v));
    }
    case NoiseModelKind::kSceRational: {
      // Inverting q_i = p_i / (lambda - A p_i) gives p_i = lambda q_i / (1 + A q_i)
      // with lambda fixed by sum(p) = 1. Closed form, no solve needed.
      std::vector<double> v(q.size());
      double denom = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) {
        v[i] = q[i] / (1.0 + A_ * q[i]);
        denom += v[i];
      }
      for (double& x : v) x /= denom;
      return ProbVector(std::move(v));
    }
  }
  return q;
}

ProbVector NoiseModel::inverse(const ProbVector& p) const {
  switch (kind_) {
    case NoiseModelKind::kIdentity:
      return p;
    case NoiseModelKind::kLinearMatrix: {
      SimplexSolveResult r = matrix_->invert(p);
      if (!r.in_simplex) {
        throw std::domain_error("NoiseModel::inverse: T^-1 p left the simplex");
      }
      return ProbVector(std::move(r.value));
    }
    case NoiseModelKind::kGcePower:
      return f_inverse_gce(a_, p);
    case NoiseModelKind::kSceRational:
      return f_inverse_sce(A_, p, sce_cfg_);
  }
  return p;
}

NoiseModel NoiseModel::parse(std::string_view text, std::size_t c) {
  if (text == "identity") return identity();
  const auto colon = text.find(':');
  const std::string_view head = text.substr(0, colon);
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "matrix") {
    if (rest.empty()) throw std::domain_error("noise model: matrix needs a csv path");
    return linear(TransitionMatrix::load_csv(std::string(rest)));
  }
  if (head == "gce") {
    if (rest.substr(0, 2) != "a=") throw std::domain_error("noise model: expected gce:a=<v>");
    return gce_power(std::stod(std::string(rest.substr(2))));
  }
  if (head == "sce") {
    if (rest.substr(0, 2) != "A=") throw std::domain_error("noise model: expected sce:A=<v>");
    return sce_rational(std::stod(std::string(rest.substr(2))));
  }
  if (head == "sym") {
    if (rest.substr(0, 4) != "eta=") {
      throw std::domain_error("noise model: expected sym:eta=<v>");
    }
    const double eta = std::stod(std::string(rest.substr(4)));
    NoiseModel m = linear(TransitionMatrix::symmetric(eta, c));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "sym:eta=%g", eta);
    m.label_ = buf;
    return m;
  }
  throw std::domain_error("unknown noise model \"" + std::string(text) + "\"");
}

std::string NoiseModel::to_string() const { return label_; }

CorrectedLoss CorrectedLoss::fce(TransitionMatrix t, double clamp_eps) {
  LossSpec ce;
  ce.kind = LossKind::kCrossEntropy;
  ce.clamp_eps = clamp_eps;
  return CorrectedLoss{ce, NoiseModel::linear(std::move(t))};
}

std::string CorrectedLoss::to_string() const {
  if (base.kind == LossKind::kCrossEntropy &&
      model.kind() == NoiseModelKind::kLinearMatrix) {
    return "fce:" + model.to_string();
  }
  return base.to_string() + "@" + model.to_string();
}

double corrected_loss(const CorrectedLoss& cl, const ProbVector& q, std::size_t k) {
  return loss(cl.base, cl.model.forward(q), k);
}

std::vector<double> corrected_loss_vector(const CorrectedLoss& cl, const ProbVector& q) {
  return loss_vector(cl.base, cl.model.forward(q));
}

double corrected_expected_loss(const CorrectedLoss& cl, const ProbVector& p,
                               const ProbVector& q) {
  return expected_loss(cl.base, p, cl.model.forward(q));
}

ProbVector argmin_expected_oracle(const PointwiseLoss& loss_fn, const ProbVector& p,
                                  double grid_step) {
  const std::size_t c = p.size();
  if (c != 2 && c != 3) {
    throw std::domain_error("argmin_expected_oracle: only c in {2,3} is feasible");
  }
  if (grid_step <= 0.0 || grid_step >= 1.0) {
    throw std::domain_error("argmin_expected_oracle: bad grid step");
  }

  auto expected_at = [&](const ProbVector& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
      if (p[i] == 0.0) continue;
      s += p[i] * loss_fn(q, i);
    }
    return s;
  };

  const auto steps = static_cast<std::size_t>(std::llround(1.0 / grid_step));
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_q;
  for (std::size_t i = 0; i <= steps; ++i) {
    const double q0 = static_cast<double>(i) / static_cast<double>(steps);
    if (c == 2) {
      ProbVector q({q0, 1.0 - q0});
      const double v = expected_at(q);
      if (v < best) {
        best = v;
        best_q = q.entries();
      }
    } else {
      for (std::size_t j = 0; i + j <= steps; ++j) {
        const double q1 = static_cast<double>(j) / static_cast<double>(steps);
        ProbVector q({q0, q1, 1.0 - q0 - q1});
        const double v = expected_at(q);
        if (v < best) {
          best = v;
          best_q = q.entries();
        }
      }
    }
  }
  return ProbVector(std::move(best_q));
}

}  // namespace noisebound
