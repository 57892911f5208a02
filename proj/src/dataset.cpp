#include "noisebound/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "noisebound/rng.hpp"

namespace noisebound {

double Dataset::empirical_noise_rate() const {
  if (!has_clean()) throw std::logic_error("dataset: no clean labels kept");
  std::size_t flips = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != clean_labels[i]) ++flips;
  }
  return static_cast<double>(flips) / static_cast<double>(labels.size());
}

void Dataset::validate() const {
  if (dim == 0 || num_classes < 2) {
    throw std::domain_error("dataset: empty or fewer than 2 classes");
  }
  if (features.size() != labels.size() * dim) {
    throw std::domain_error("dataset: feature/label size mismatch");
  }
  if (!clean_labels.empty() && clean_labels.size() != labels.size()) {
    throw std::domain_error("dataset: clean label size mismatch");
  }
  for (double x : features) {
    if (!std::isfinite(x)) throw std::domain_error("dataset: non-finite feature");
  }
  for (int y : labels) {
    if (y < 0 || y >= static_cast<int>(num_classes)) {
      throw std::domain_error("dataset: label out of range");
    }
  }
}

Dataset make_blobs(std::size_t c, std::size_t per_class, std::size_t dim,
                   double separation, std::uint64_t seed) {
  if (c < 2) throw std::domain_error("make_blobs: c must be >= 2");
  if (per_class < 1) throw std::domain_error("make_blobs: per_class must be >= 1");
  if (dim < 1) throw std::domain_error("make_blobs: dim must be >= 1");
  if (separation <= 0.0) throw std::domain_error("make_blobs: separation must be > 0");

  // Centers with nearest neighbors exactly `separation` apart: scaled axis
  // vectors when the dimension allows (all pairs equidistant, so no class
  // pair is harder than another), otherwise a circle in the first two dims.
  std::vector<double> centers(c * dim, 0.0);
  if (dim >= c) {
    const double scale = separation / std::sqrt(2.0);
    for (std::size_t k = 0; k < c; ++k) centers[k * dim + k] = scale;
  } else if (dim == 1) {
    for (std::size_t k = 0; k < c; ++k) {
      centers[k] = separation * static_cast<double>(k);
    }
  } else {
    const double pi = 3.14159265358979323846;
    const double radius =
        c == 2 ? separation / 2.0
               : separation / (2.0 * std::sin(pi / static_cast<double>(c)));
    for (std::size_t k = 0; k < c; ++k) {
      const double angle = 2.0 * pi * static_cast<double>(k) / static_cast<double>(c);
      centers[k * dim + 0] = radius * std::cos(angle);
      centers[k * dim + 1] = radius * std::sin(angle);
    }
  }

  Dataset ds;
  ds.dim = dim;
  ds.num_classes = c;
  const std::size_t n = c * per_class;
  ds.features.resize(n * dim);
  ds.labels.resize(n);
  ds.clean_labels.resize(n);
  Rng rng(seed);
  std::size_t row = 0;
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      for (std::size_t j = 0; j < dim; ++j) {
        ds.features[row * dim + j] = centers[k * dim + j] + rng.normal();
      }
      ds.labels[row] = static_cast<int>(k);
      ds.clean_labels[row] = static_cast<int>(k);
    }
  }
  ds.validate();
  return ds;
}

Dataset inject(const Dataset& ds, const NoiseInjector& injector) {
  ds.validate();
  const std::size_t c = ds.num_classes;
  const int ci = static_cast<int>(c);

  if (injector.kind == NoiseInjector::Kind::kSymmetric ||
      injector.kind == NoiseInjector::Kind::kPairwise ||
      injector.kind == NoiseInjector::Kind::kGroup ||
      injector.kind == NoiseInjector::Kind::kPredictor) {
    if (injector.eta < 0.0 || injector.eta > 1.0) {
      throw std::domain_error("inject: eta must be in [0,1]");
    }
  }

  std::vector<int> group_of;  // class -> group id, for the group kind
  if (injector.kind == NoiseInjector::Kind::kGroup) {
    group_of.assign(c, -1);
    for (std::size_t g = 0; g < injector.groups.size(); ++g) {
      for (int cls : injector.groups[g]) {
        if (cls < 0 || cls >= ci || group_of[static_cast<std::size_t>(cls)] != -1) {
          throw std::domain_error(
              "inject: group partition must cover all classes disjointly");
        }
        group_of[static_cast<std::size_t>(cls)] = static_cast<int>(g);
      }
    }
    for (int g : group_of) {
      if (g == -1) {
        throw std::domain_error(
            "inject: group partition must cover all classes disjointly");
      }
    }
  }
  if (injector.kind == NoiseInjector::Kind::kMatrix) {
    if (!injector.matrix || injector.matrix->dim() != c) {
      throw std::domain_error("inject: matrix missing or wrong dimension");
    }
  }
  if (injector.kind == NoiseInjector::Kind::kPredictor && !injector.predictor) {
    throw std::domain_error("inject: predictor kind needs a fitted classifier");
  }

  Dataset out = ds;
  out.clean_labels = ds.clean_labels.empty() ? ds.labels : ds.clean_labels;
  Rng rng(injector.seed);

  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const int y = out.labels[i];
    switch (injector.kind) {
      case NoiseInjector::Kind::kSymmetric: {
        if (rng.uniform() < injector.eta) {
          // Uniform over the c-1 other classes: diagonal stays 1 - eta.
          int pick = static_cast<int>(rng.below(c - 1));
          out.labels[i] = pick >= y ? pick + 1 : pick;
        }
        break;
      }
      case NoiseInjector::Kind::kPairwise:
        if (rng.uniform() < injector.eta) out.labels[i] = (y + 1) % ci;
        break;
      case NoiseInjector::Kind::kMatrix: {
        const ProbVector col = injector.matrix->column(static_cast<std::size_t>(y));
        out.labels[i] = static_cast<int>(rng.categorical(col.span()));
        break;
      }
      case NoiseInjector::Kind::kGroup: {
        const auto& members =
            injector.groups[static_cast<std::size_t>(group_of[static_cast<std::size_t>(y)])];
        if (members.size() > 1 && rng.uniform() < injector.eta) {
          int pick = static_cast<int>(rng.below(members.size() - 1));
          int idx = 0;
          for (int cls : members) {
            if (cls == y) continue;
            if (idx == pick) {
              out.labels[i] = cls;
              break;
            }
            ++idx;
          }
        }
        break;
      }
      case NoiseInjector::Kind::kPredictor:
        if (rng.uniform() < injector.eta) {
          out.labels[i] = injector.predictor(ds.row(i));
        }
        break;
    }
  }
  return out;
}

std::string dataset_to_csv(const Dataset& ds) {
  ds.validate();
  std::string out;
  for (std::size_t j = 0; j < ds.dim; ++j) {
    out += "f" + std::to_string(j) + ",";
  }
  if (ds.has_clean()) out += "clean,";
  out += "label\n";
  char buf[48];
  const std::size_t n = ds.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < ds.dim; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,", ds.features[i * ds.dim + j]);
      out += buf;
    }
    if (ds.has_clean()) {
      out += std::to_string(ds.clean_labels[i] + 1);
      out += ',';
    }
    out += std::to_string(ds.labels[i] + 1);
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << dataset_to_csv(ds);
}

Dataset dataset_from_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error(origin + ": empty file");
  }
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error(origin + ": last column must be \"label\"");
  }
  const bool has_clean = header.size() >= 3 && header[header.size() - 2] == "clean";
  const std::size_t dim = header.size() - (has_clean ? 2 : 1);
  if (dim == 0) throw std::runtime_error(origin + ": no feature columns");

  Dataset ds;
  ds.dim = dim;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    for (; std::getline(ss, cell, ','); ++col) {
      if (col >= header.size()) {
        col = header.size() + 1;  // too many fields
        break;
      }
      try {
        if (col < dim) {
          ds.features.push_back(std::stod(cell));
        } else if (has_clean && col == dim) {
          ds.clean_labels.push_back(std::stoi(cell) - 1);
        } else {
          ds.labels.push_back(std::stoi(cell) - 1);
        }
      } catch (const std::exception&) {
        throw std::runtime_error(origin + ": parse error at line " +
                                 std::to_string(line_no) + ", column " +
                                 std::to_string(col + 1));
      }
    }
    if (col != header.size()) {
      throw std::runtime_error(origin + ": wrong field count at line " +
                               std::to_string(line_no));
    }
    max_label = std::max(max_label, ds.labels.back());
    if (has_clean) max_label = std::max(max_label, ds.clean_labels.back());
  }
  if (ds.labels.empty()) throw std::runtime_error(origin + ": no data rows");
  ds.num_classes = static_cast<std::size_t>(max_label + 1);
  if (ds.num_classes < 2) ds.num_classes = 2;
  ds.validate();
  return ds;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return dataset_from_csv(in, path);
}

InjectorSpec InjectorSpec::parse(std::string_view text) {
  InjectorSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::domain_error("injector: expected <kind>:<args>");
  }
  const std::string_view head = text.substr(0, colon);
  std::string_view rest = text.substr(colon + 1);

  if (head == "sym" || head == "pair") {
    spec.kind = head == "sym" ? NoiseInjector::Kind::kSymmetric
                              : NoiseInjector::Kind::kPairwise;
    spec.eta = std::stod(std::string(rest));
  } else if (head == "matrix") {
    spec.kind = NoiseInjector::Kind::kMatrix;
    spec.path = std::string(rest);
  } else if (head == "group") {
    spec.kind = NoiseInjector::Kind::kGroup;
    const auto second = rest.find(':');
    if (second == std::string_view::npos) {
      throw std::domain_error("injector: expected group:<eta>:<partition>");
    }
    spec.eta = std::stod(std::string(rest.substr(0, second)));
    std::string_view partition = rest.substr(second + 1);
    std::vector<int> current;
    std::string token;
    auto flush_class = [&]() {
      if (!token.empty()) {
        current.push_back(std::stoi(token) - 1);  // classes are 1-based in specs
        token.clear();
      }
    };
    for (char ch : partition) {
      if (ch == ',') {
        flush_class();
      } else if (ch == '|') {
        flush_class();
        spec.groups.push_back(std::move(current));
        current.clear();
      } else {
        token += ch;
      }
    }
    flush_class();
    if (!current.empty()) spec.groups.push_back(std::move(current));
    if (spec.groups.empty()) throw std::domain_error("injector: empty partition");
  } else if (head == "pred") {
    spec.kind = NoiseInjector::Kind::kPredictor;
    const auto second = rest.find(':');
    if (second == std::string_view::npos) {
      throw std::domain_error("injector: expected pred:<eta>:<model-path>");
    }
    spec.eta = std::stod(std::string(rest.substr(0, second)));
    spec.path = std::string(rest.substr(second + 1));
  } else {
    throw std::domain_error("unknown injector \"" + std::string(text) + "\"");
  }
  if (spec.kind != NoiseInjector::Kind::kMatrix &&
      (spec.eta < 0.0 || spec.eta > 1.0)) {
    throw std::domain_error("injector: eta must be in [0,1]");
  }
  return spec;
}

NoiseInjector materialize_injector(
    const InjectorSpec& spec, std::size_t c, std::uint64_t seed,
    const std::function<std::function<int(std::span<const double>)>(const std::string&)>&
        load_predictor) {
  NoiseInjector inj;
  inj.kind = spec.kind;
  inj.eta = spec.eta;
  inj.seed = seed;
  inj.groups = spec.groups;
  switch (spec.kind) {
    case NoiseInjector::Kind::kMatrix: {
      TransitionMatrix t = TransitionMatrix::load_csv(spec.path);
      if (t.dim() != c) {
        throw std::domain_error("injector: matrix dimension != class count");
      }
      inj.matrix = std::move(t);
      break;
    }
    case NoiseInjector::Kind::kPredictor:
      if (!load_predictor) {
        throw std::domain_error("injector: no predictor loader supplied");
      }
      inj.predictor = load_predictor(spec.path);
      break;
    default:
      break;
  }
  return inj;
}

}  // namespace noisebound
