#include "noisebound/experiment_config.hpp"

#include <charconv>
#include <stdexcept>

#include "noisebound/io_util.hpp"
#include "noisebound/rng.hpp"

namespace noisebound {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::string token;
  for (char ch : text) {
    if (ch == ',') {
      if (!token.empty()) seeds.push_back(std::stoull(token));
      token.clear();
    } else if (ch != ' ') {
      token += ch;
    }
  }
  if (!token.empty()) seeds.push_back(std::stoull(token));
  if (seeds.empty()) throw std::domain_error("config: empty seed list");
  return seeds;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(
        start, end == std::string_view::npos ? text.size() - start : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    const auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::domain_error("config line " + std::to_string(line_no) +
                                ": unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw std::domain_error("config line " + std::to_string(line_no) +
                              ": expected key = value");
    }
    const std::string key = std::string(trim(line.substr(0, eq)));
    const std::string value = std::string(trim(line.substr(eq + 1)));
    const std::string where = section + "." + key;

    try {
      if (where == "dataset.kind") {
        cfg.dataset_kind = value;
      } else if (where == "dataset.classes") {
        cfg.classes = std::stoul(value);
      } else if (where == "dataset.per_class") {
        cfg.per_class = std::stoul(value);
      } else if (where == "dataset.test_per_class") {
        cfg.test_per_class = std::stoul(value);
      } else if (where == "dataset.dims") {
        cfg.dims = std::stoul(value);
      } else if (where == "dataset.separation") {
        cfg.separation = std::stod(value);
      } else if (where == "dataset.data_seed") {
        cfg.data_seed = std::stoull(value);
      } else if (where == "dataset.path") {
        cfg.data_path = value;
      } else if (where == "dataset.test_path") {
        cfg.test_path = value;
      } else if (where == "noise.injector") {
        cfg.injector = value;
      } else if (where == "noise.seed") {
        cfg.noise_seed = std::stoull(value);
      } else if (where == "model.kind") {
        cfg.model_kind = value;
      } else if (where == "model.hidden") {
        cfg.hidden = std::stoul(value);
      } else if (where == "loss.spec") {
        cfg.loss_spec = value;
      } else if (where == "train.epochs") {
        cfg.epochs = std::stoi(value);
      } else if (where == "train.batch_size") {
        cfg.batch_size = std::stoi(value);
      } else if (where == "train.learning_rate") {
        cfg.learning_rate = std::stod(value);
      } else if (where == "train.lr_decay_factor") {
        cfg.lr_decay_factor = std::stod(value);
      } else if (where == "train.lr_decay_epoch") {
        cfg.lr_decay_epoch = std::stoi(value);
      } else if (where == "train.divergence_factor") {
        cfg.divergence_factor = std::stod(value);
      } else if (where == "train.seeds") {
        cfg.seeds = parse_seed_list(value);
      } else if (where == "output.dir") {
        cfg.output_dir = value;
      } else {
        throw std::domain_error("unknown key");
      }
    } catch (const std::domain_error& e) {
      throw std::domain_error("config line " + std::to_string(line_no) + " (" +
                              where + "): " + e.what());
    } catch (const std::exception&) {
      throw std::domain_error("config line " + std::to_string(line_no) + " (" +
                              where + "): bad value \"" + value + "\"");
    }
  }
  if (cfg.dataset_kind != "blobs" && cfg.dataset_kind != "csv") {
    throw std::domain_error("config: dataset.kind must be blobs or csv");
  }
  if (cfg.dataset_kind == "csv" && cfg.data_path.empty()) {
    throw std::domain_error("config: dataset.kind=csv needs dataset.path");
  }
  if (cfg.model_kind != "linear" && cfg.model_kind != "mlp") {
    throw std::domain_error("config: model.kind must be linear or mlp");
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  return parse(read_file(path));
}

Dataset ExperimentConfig::build_train_data() const {
  Dataset ds;
  if (dataset_kind == "blobs") {
    ds = make_blobs(classes, per_class, dims, separation, data_seed);
  } else {
    ds = load_csv(data_path);
  }
  ds.split = "train";
  if (injector != "none" && !injector.empty()) {
    const InjectorSpec spec = InjectorSpec::parse(injector);
    auto loader = [](const std::string& path) {
      Model m = Model::load(path);
      return std::function<int(std::span<const double>)>(
          [m](std::span<const double> x) { return m.predict(x); });
    };
    ds = inject(ds, materialize_injector(spec, ds.num_classes, noise_seed, loader));
  }
  return ds;
}

Dataset ExperimentConfig::build_test_data() const {
  Dataset ds;
  if (dataset_kind == "blobs") {
    if (test_per_class == 0) return ds;
    // Different seed stream than the train split.
    ds = make_blobs(classes, test_per_class, dims, separation,
                    derive_seed(data_seed, 0x7e57));
  } else {
    if (test_path.empty()) return ds;
    ds = load_csv(test_path);
  }
  ds.split = "test";
  return ds;
}

MaterializedExperiment ExperimentConfig::materialize() const {
  MaterializedExperiment exp;
  exp.train = build_train_data();
  exp.test = build_test_data();
  const std::size_t d = exp.train.dim;
  const std::size_t c = exp.train.num_classes;
  exp.model = model_kind == "linear" ? Model::linear(d, c) : Model::mlp(d, hidden, c);
  exp.train_cfg.loss = BoundedLossConfig::parse(loss_spec, c);
  exp.train_cfg.epochs = epochs;
  exp.train_cfg.batch_size = batch_size;
  exp.train_cfg.learning_rate = learning_rate;
  exp.train_cfg.lr_decay_factor = lr_decay_factor;
  exp.train_cfg.lr_decay_epoch = lr_decay_epoch;
  exp.train_cfg.divergence_factor = divergence_factor;
  exp.train_cfg.seed = seeds.front();
  return exp;
}

}  // namespace noisebound
