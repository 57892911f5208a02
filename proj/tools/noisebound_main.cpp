// Experiment front door: compute noise bounds, inject label noise, train,
// sweep the estimated noise rate, and emit sensitivity curves.
//
// Exit codes: 0 ok, 1 usage, 2 domain error, 3 divergence guard.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisebound/bounds.hpp"
#include "noisebound/experiment_config.hpp"
#include "noisebound/io_util.hpp"
#include "noisebound/rng.hpp"
#include "noisebound/trainer.hpp"

using nlohmann::json;
using namespace noisebound;

namespace {

constexpr int kSchemaVersion = 1;

json json_header(const std::string& command) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  return j;
}

// "lo:step:hi" (inclusive) or a comma list "0,0.1,0.2".
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double lo = 0.0, step = 0.0, hi = 0.0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &step, &hi) != 3 ||
        step <= 0.0 || hi < lo) {
      throw std::domain_error("grid: expected lo:step:hi");
    }
    const int count = static_cast<int>(std::llround((hi - lo) / step));
    for (int i = 0; i <= count; ++i) grid.push_back(lo + step * i);
  } else {
    std::string token;
    for (char ch : text + ",") {
      if (ch == ',') {
        if (!token.empty()) grid.push_back(std::stod(token));
        token.clear();
      } else {
        token += ch;
      }
    }
  }
  if (grid.empty()) throw std::domain_error("grid: empty");
  return grid;
}

BoundLoss parse_bound_loss(const std::string& text, std::size_t c) {
  const BoundedLossConfig cfg = BoundedLossConfig::parse(text, c);
  return cfg.inner;
}

int cmd_bound(const std::string& loss_text, double eta, std::size_t c, bool as_json) {
  const BoundLoss loss = parse_bound_loss(loss_text, c);
  const BoundReport report = make_bound_report(loss, eta, c);
  if (as_json) {
    json j = json_header("bound");
    j["loss"] = report.loss;
    j["eta"] = report.eta;
    j["c"] = report.c;
    j["bound"] = report.bound;
    j["interval_low"] = report.interval_low;
    j["interval_high"] = report.interval_high;
    j["ratio"] = report.ratio;
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("loss=%s eta=%g c=%zu\n", report.loss.c_str(), report.eta, report.c);
    std::printf("B=%.10g\n", report.bound);
    std::printf("interval=[%.10g, %.10g] ratio=%.10g\n", report.interval_low,
                report.interval_high, report.ratio);
  }
  return 0;
}

struct InjectArgs {
  std::string data_path;
  std::size_t classes = 2, per_class = 1000, dims = 2;
  double separation = 6.0;
  std::uint64_t data_seed = 7;
  std::string injector;
  std::uint64_t seed = 0;
  std::string out;
  std::string report_path;
};

int cmd_inject(const InjectArgs& args, bool as_json) {
  Dataset ds = args.data_path.empty()
                   ? make_blobs(args.classes, args.per_class, args.dims,
                                args.separation, args.data_seed)
                   : load_csv(args.data_path);
  const InjectorSpec spec = InjectorSpec::parse(args.injector);
  auto loader = [](const std::string& path) {
    Model m = Model::load(path);
    return std::function<int(std::span<const double>)>(
        [m](std::span<const double> x) { return m.predict(x); });
  };
  const Dataset noisy =
      inject(ds, materialize_injector(spec, ds.num_classes, args.seed, loader));
  atomic_write(args.out, dataset_to_csv(noisy));

  json j = json_header("inject");
  j["n"] = noisy.size();
  j["dim"] = noisy.dim;
  j["classes"] = noisy.num_classes;
  j["injector"] = args.injector;
  j["seed"] = args.seed;
  j["nominal_eta"] = spec.eta;
  j["empirical_eta"] = noisy.empirical_noise_rate();
  j["out"] = args.out;
  if (!args.report_path.empty()) atomic_write(args.report_path, j.dump(2) + "\n");
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("wrote %zu rows to %s\n", noisy.size(), args.out.c_str());
    std::printf("nominal eta=%g empirical eta=%.6g\n", spec.eta,
                noisy.empirical_noise_rate());
  }
  return 0;
}

json run_summary(const RunMetrics& run, const TrainConfig& cfg) {
  json j;
  j["epochs"] = run.epochs.size();
  j["bound"] = cfg.loss.bound;
  j["loss"] = cfg.loss.to_string();
  j["seed"] = cfg.seed;
  j["initial_raw_loss"] = run.initial_raw_loss;
  j["final_raw_loss"] = run.final_raw_loss;
  j["final_bounded_loss"] = run.final_bounded_loss;
  j["final_test_acc"] = run.final_test_acc;
  j["final_noisy_train_acc"] = run.final_noisy_train_acc;
  j["min_batch_raw_loss"] = run.min_batch_raw_loss;
  j["diverged"] = run.diverged;
  return j;
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              bool as_json) {
  const ExperimentConfig config = ExperimentConfig::load(config_path);
  MaterializedExperiment exp = config.materialize();
  const std::string out_dir =
      out_override.empty() ? config.output_dir : out_override;

  const RunMetrics run =
      train(exp.model, exp.train, exp.test.size() ? &exp.test : nullptr,
            exp.train_cfg);

  atomic_write(out_dir + "/metrics.csv", metrics_to_csv(run));
  json summary = json_header("train");
  summary["config"] = config_path;
  summary.update(run_summary(run, exp.train_cfg));
  atomic_write(out_dir + "/summary.json", summary.dump(2) + "\n");
  {
    const std::string tmp = out_dir + "/model.txt.tmp";
    exp.model.save(tmp);
    std::filesystem::rename(tmp, out_dir + "/model.txt");
  }

  if (as_json) {
    std::cout << summary.dump(2) << "\n";
  } else {
    std::printf("final raw=%.6g bounded=%.6g test_acc=%.4g (metrics in %s)\n",
                run.final_raw_loss, run.final_bounded_loss, run.final_test_acc,
                out_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& grid_text,
              int jobs, const std::string& out_override, bool as_json) {
  const ExperimentConfig config = ExperimentConfig::load(config_path);
  MaterializedExperiment exp = config.materialize();
  if (exp.test.size() == 0) {
    throw std::domain_error("sweep: the config must define a test split");
  }
  const std::vector<double> grid = parse_grid(grid_text);
  const auto points = sweep_bound(exp.model, exp.train, exp.test, exp.train_cfg,
                                  grid, config.seeds, jobs);

  const std::string out = out_override.empty()
                              ? config.output_dir + "/sweep.csv"
                              : out_override;
  atomic_write(out, sweep_to_csv(points));

  json j = json_header("sweep");
  j["config"] = config_path;
  j["out"] = out;
  j["seeds"] = config.seeds;
  json rows = json::array();
  for (const auto& pt : points) {
    json row;
    row["eta_hat"] = pt.eta_hat;
    row["bound"] = pt.bound;
    row["mean_acc"] = pt.mean_acc;
    row["min_acc"] = pt.min_acc;
    row["max_acc"] = pt.max_acc;
    rows.push_back(row);
  }
  j["points"] = rows;
  if (as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::printf("eta_hat  bound     mean_acc\n");
    for (const auto& pt : points) {
      std::printf("%-8.3g %-9.5g %.4f\n", pt.eta_hat, pt.bound, pt.mean_acc);
    }
    std::printf("(csv in %s)\n", out.c_str());
  }
  return 0;
}

int cmd_sensitivity(const std::string& losses_text, const std::string& classes_text,
                    const std::string& grid_text, const std::string& out,
                    bool as_json) {
  std::vector<BoundLoss> losses;
  std::string token;
  for (char ch : losses_text + ",") {
    if (ch == ',') {
      if (!token.empty()) losses.push_back(parse_bound_loss(token, 2));
      token.clear();
    } else {
      token += ch;
    }
  }
  if (losses.empty()) throw std::domain_error("sensitivity: no losses given");

  const std::vector<double> grid = parse_grid(grid_text);
  std::vector<SensitivityRow> rows;
  for (double c_value : parse_grid(classes_text)) {
    const auto c = static_cast<std::size_t>(c_value);
    const auto part = sensitivity_curves(losses, c, grid);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  const std::string csv = sensitivity_csv(rows);
  if (!out.empty()) atomic_write(out, csv);

  if (as_json) {
    json j = json_header("sensitivity");
    json jrows = json::array();
    for (const auto& r : rows) {
      json row;
      row["loss"] = r.loss;
      row["eta"] = r.eta;
      row["c"] = r.c;
      row["interval_low"] = r.interval_low;
      row["interval_high"] = r.interval_high;
      row["ratio"] = r.ratio;
      row["bound"] = r.bound;
      jrows.push_back(row);
    }
    j["rows"] = jrows;
    if (!out.empty()) j["out"] = out;
    std::cout << j.dump(2) << "\n";
  } else if (out.empty()) {
    std::cout << csv;
  } else {
    std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  }
  return 0;
}

int cmd_oracle(bool as_json) {
  struct Check {
    std::string model;
    std::size_t c;
    double max_linf;
    bool value_ok;
    bool pass;
  };
  std::vector<Check> checks;
  Rng rng(13131);

  auto run_check = [&](const std::string& name, const NoiseModel& model,
                       std::size_t c, const PointwiseLoss& loss_fn) {
    const double step = c == 2 ? 1e-3 : 1e-2;
    Check check{name, c, 0.0, true, true};
    for (int t = 0; t < 10; ++t) {
      const ProbVector p = model.forward(random_simplex_point(c, rng));
      const ProbVector grid_argmin = argmin_expected_oracle(loss_fn, p, step);
      const ProbVector closed = model.inverse(p);
      double dist = 0.0;
      double h_grid = 0.0, h_closed = 0.0;
      for (std::size_t i = 0; i < c; ++i) {
        dist = std::max(dist, std::abs(grid_argmin[i] - closed[i]));
      }
      for (std::size_t i = 0; i < c; ++i) {
        if (p[i] > 0.0) {
          h_grid += p[i] * loss_fn(grid_argmin, i);
          h_closed += p[i] * loss_fn(closed, i);
        }
      }
      check.max_linf = std::max(check.max_linf, dist);
      // The closed form must be at least as good as any grid point.
      if (h_closed > h_grid + 1e-12) check.value_ok = false;
    }
    check.pass = check.value_ok && check.max_linf <= 2.0 * step;
    checks.push_back(check);
  };

  for (std::size_t c : {std::size_t{2}, std::size_t{3}}) {
    for (double a : {0.3, 0.5, 0.7}) {
      LossSpec gce;
      gce.kind = LossKind::kGeneralizedCE;
      gce.gce_a = a;
      const NoiseModel model = NoiseModel::gce_power(a);
      char name[32];
      std::snprintf(name, sizeof(name), "gce:a=%g", a);
      run_check(name, model, c,
                [gce](const ProbVector& q, std::size_t k) { return loss(gce, q, k); });
    }
    for (double A : {2.0, 8.0}) {
      LossSpec sce;
      sce.kind = LossKind::kSymmetricCE;
      sce.sce_A = A;
      const NoiseModel model = NoiseModel::sce_rational(A);
      char name[32];
      std::snprintf(name, sizeof(name), "sce:A=%g", A);
      run_check(name, model, c,
                [sce](const ProbVector& q, std::size_t k) { return loss(sce, q, k); });
    }
    for (double eta : {0.2, 0.4}) {
      const CorrectedLoss fce =
          CorrectedLoss::fce(TransitionMatrix::symmetric(eta, c));
      char name[32];
      std::snprintf(name, sizeof(name), "fce:sym:eta=%g", eta);
      run_check(name, fce.model, c, [fce](const ProbVector& q, std::size_t k) {
        return corrected_loss(fce, q, k);
      });
    }
  }

  bool all_pass = true;
  for (const auto& check : checks) all_pass = all_pass && check.pass;

  if (as_json) {
    json j = json_header("oracle");
    json rows = json::array();
    for (const auto& check : checks) {
      json row;
      row["model"] = check.model;
      row["c"] = check.c;
      row["max_linf"] = check.max_linf;
      row["value_ok"] = check.value_ok;
      row["pass"] = check.pass;
      rows.push_back(row);
    }
    j["checks"] = rows;
    j["pass"] = all_pass;
    std::cout << j.dump(2) << "\n";
  } else {
    for (const auto& check : checks) {
      std::printf("%-16s c=%zu max_linf=%.2e value_ok=%d %s\n", check.model.c_str(),
                  check.c, check.max_linf, check.value_ok ? 1 : 0,
                  check.pass ? "ok" : "FAIL");
    }
  }
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noise-bounded loss experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // lets --json appear after the subcommand
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");

  auto* bound = app.add_subcommand("bound", "compute the noise bound B(eta, c)");
  std::string bound_loss = "ce";
  double bound_eta = 0.0;
  std::size_t bound_c = 2;
  bound->add_option("loss", bound_loss, "loss spec, e.g. ce, gce:a=0.4, fce:sym:eta=0.4")
      ->required();
  bound->add_option("eta", bound_eta, "noise rate in [0, (c-1)/c]")->required();
  bound->add_option("c", bound_c, "class count >= 2")->required();

  auto* inject_cmd = app.add_subcommand("inject", "inject label noise into a dataset");
  InjectArgs inject_args;
  inject_cmd->add_option("--data", inject_args.data_path, "input CSV (omit to generate blobs)");
  inject_cmd->add_option("--classes", inject_args.classes, "blob classes");
  inject_cmd->add_option("--per-class", inject_args.per_class, "blob points per class");
  inject_cmd->add_option("--dims", inject_args.dims, "blob feature dims");
  inject_cmd->add_option("--separation", inject_args.separation, "blob separation (sigmas)");
  inject_cmd->add_option("--data-seed", inject_args.data_seed, "blob generator seed");
  inject_cmd->add_option("--injector", inject_args.injector,
                         "sym:0.4 | pair:0.4 | matrix:<csv> | group:0.4:<1,2|3> | pred:0.6:<model>")
      ->required();
  inject_cmd->add_option("--seed", inject_args.seed, "injection seed")->required();
  inject_cmd->add_option("--out", inject_args.out, "output CSV path")->required();
  inject_cmd->add_option("--report", inject_args.report_path, "also write the JSON report here");

  auto* train_cmd = app.add_subcommand("train", "train per an experiment config");
  std::string train_config, train_out;
  train_cmd->add_option("config", train_config, "experiment config path")->required();
  train_cmd->add_option("--out-dir", train_out, "override [output] dir");

  auto* sweep_cmd = app.add_subcommand("sweep", "train across an estimated-noise-rate grid");
  std::string sweep_config, sweep_grid = "0:0.05:0.6", sweep_out;
  int sweep_jobs = 0;
  sweep_cmd->add_option("config", sweep_config, "experiment config path")->required();
  sweep_cmd->add_option("--grid", sweep_grid, "eta_hat grid, lo:step:hi or comma list");
  sweep_cmd->add_option("--jobs", sweep_jobs, "parallel runs (0 = all cores)");
  sweep_cmd->add_option("--out", sweep_out, "output CSV (default <out-dir>/sweep.csv)");

  auto* sens_cmd = app.add_subcommand("sensitivity", "entropy interval curves");
  std::string sens_losses = "ce,gce:a=0.4,sce:A=8";
  std::string sens_classes = "10,200";
  std::string sens_grid = "0.05:0.05:0.5";
  std::string sens_out;
  sens_cmd->add_option("--losses", sens_losses, "comma list of loss specs");
  sens_cmd->add_option("--classes", sens_classes, "comma list of class counts");
  sens_cmd->add_option("--grid", sens_grid, "eta grid");
  sens_cmd->add_option("--out", sens_out, "output CSV path");

  auto* oracle_cmd =
      app.add_subcommand("oracle", "brute-force argmin checks of the noise-model inverses");
  (void)oracle_cmd;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (bound->parsed()) return cmd_bound(bound_loss, bound_eta, bound_c, as_json);
    if (inject_cmd->parsed()) return cmd_inject(inject_args, as_json);
    if (train_cmd->parsed()) return cmd_train(train_config, train_out, as_json);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_config, sweep_grid, sweep_jobs, sweep_out, as_json);
    }
    if (sens_cmd->parsed()) {
      return cmd_sensitivity(sens_losses, sens_classes, sens_grid, sens_out, as_json);
    }
    if (oracle_cmd->parsed()) return cmd_oracle(as_json);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
