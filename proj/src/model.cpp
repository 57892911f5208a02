#include "noisebound/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "noisebound/rng.hpp"

namespace noisebound {

Model Model::linear(std::size_t in_dim, std::size_t num_classes) {
  if (in_dim < 1 || num_classes < 2) {
    throw std::domain_error("Model::linear: bad dimensions");
  }
  Model m;
  m.kind = Kind::kLinear;
  m.in_dim = in_dim;
  m.num_classes = num_classes;
  m.params.assign(m.param_count(), 0.0);
  return m;
}

Model Model::mlp(std::size_t in_dim, std::size_t hidden, std::size_t num_classes) {
  if (in_dim < 1 || hidden < 1 || num_classes < 2) {
    throw std::domain_error("Model::mlp: bad dimensions");
  }
  Model m;
  m.kind = Kind::kMlp;
  m.in_dim = in_dim;
  m.hidden = hidden;
  m.num_classes = num_classes;
  m.params.assign(m.param_count(), 0.0);
  return m;
}

std::size_t Model::param_count() const {
  if (kind == Kind::kLinear) return num_classes * in_dim + num_classes;
  return hidden * in_dim + hidden + num_classes * hidden + num_classes;
}

void Model::init(std::uint64_t seed) {
  Rng rng(seed);
  params.assign(param_count(), 0.0);
  if (kind == Kind::kLinear) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(in_dim));
    for (std::size_t i = 0; i < num_classes * in_dim; ++i) {
      params[i] = scale * rng.normal();
    }
  } else {
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_dim));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
    std::size_t off = 0;
    for (std::size_t i = 0; i < hidden * in_dim; ++i) params[off++] = s1 * rng.normal();
    off += hidden;  // b1 stays zero
    for (std::size_t i = 0; i < num_classes * hidden; ++i) {
      params[off++] = s2 * rng.normal();
    }
  }
}

void softmax(std::span<const double> logits, std::span<double> probs) {
  double zmax = logits[0];
  for (double z : logits) zmax = std::max(zmax, z);
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    probs[i] = std::exp(logits[i] - zmax);
    sum += probs[i];
  }
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] /= sum;
}

void Model::forward(std::span<const double> x, std::span<double> probs,
                    std::span<double> hidden_scratch) const {
  const std::size_t d = in_dim;
  const std::size_t c = num_classes;
  if (kind == Kind::kLinear) {
    const double* w = params.data();
    const double* b = params.data() + c * d;
    for (std::size_t k = 0; k < c; ++k) {
      double z = b[k];
      const double* wk = w + k * d;
      for (std::size_t j = 0; j < d; ++j) z += wk[j] * x[j];
      probs[k] = z;
    }
    softmax(probs.subspan(0, c), probs.subspan(0, c));
    return;
  }
  const std::size_t h = hidden;
  const double* w1 = params.data();
  const double* b1 = params.data() + h * d;
  const double* w2 = b1 + h;
  const double* b2 = w2 + c * h;
  for (std::size_t u = 0; u < h; ++u) {
    double z = b1[u];
    const double* wu = w1 + u * d;
    for (std::size_t j = 0; j < d; ++j) z += wu[j] * x[j];
    hidden_scratch[u] = z > 0.0 ? z : 0.0;
  }
  for (std::size_t k = 0; k < c; ++k) {
    double z = b2[k];
    const double* wk = w2 + k * h;
    for (std::size_t u = 0; u < h; ++u) z += wk[u] * hidden_scratch[u];
    probs[k] = z;
  }
  softmax(probs.subspan(0, c), probs.subspan(0, c));
}

int Model::predict(std::span<const double> x) const {
  std::vector<double> probs(num_classes);
  std::vector<double> scratch(hidden_size());
  forward(x, probs, scratch);
  std::size_t best = 0;
  for (std::size_t k = 1; k < num_classes; ++k) {
    if (probs[k] > probs[best]) best = k;
  }
  return static_cast<int>(best);
}

void Model::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << (kind == Kind::kLinear ? "linear" : "mlp") << " " << in_dim << " "
      << hidden << " " << num_classes << "\n";
  char buf[48];
  for (double p : params) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", p);
    out << buf;
  }
}

Model Model::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string kind_text;
  std::size_t d = 0, h = 0, c = 0;
  if (!(in >> kind_text >> d >> h >> c)) {
    throw std::runtime_error(path + ": bad model header");
  }
  Model m = kind_text == "linear" ? linear(d, c) : mlp(d, h, c);
  for (double& p : m.params) {
    if (!(in >> p)) throw std::runtime_error(path + ": truncated parameters");
  }
  return m;
}

}  // namespace noisebound
