#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "evinam/commands.hpp"
#include "evinam/errors.hpp"
#include "evinam/model_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::string model;
  std::string data;
  std::string task;
  std::vector<std::string> features;
  std::optional<std::size_t> grid_size;
  bool smooth = false;
  bool denormalize = false;
  std::optional<double> lowess_fraction;
  std::optional<std::size_t> lowess_iterations;
};

evinam::RunConfig resolve(const Options& o) {
  evinam::RunConfig cfg = evinam::load_run_config(o.config);
  if (o.seed) evinam::override_seed(cfg, *o.seed);
  if (!o.out.empty()) cfg.out = fs::path(o.out);
  if (!cfg.out) throw evinam::ConfigError("no output directory: pass --out or set 'out' in the config");
  return cfg;
}

void emit(const json& doc, const std::string& out) {
  if (out.empty()) {
    std::cout << doc.dump(2) << "\n";
    return;
  }
  const fs::path path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  evinam::write_text(path, doc.dump(2) + "\n");
}

evinam::EviNamModel open_model(const Options& o) {
  if (!fs::is_regular_file(o.model)) {
    throw evinam::ConfigError("model file '" + o.model + "' does not exist");
  }
  std::optional<evinam::TaskKind> expected;
  if (!o.task.empty()) expected = evinam::task_from_string(o.task);
  return evinam::load_model(o.model, expected);
}

int run(int argc, char** argv) {
  CLI::App app{"Evidential neural additive models: train, evaluate, predict and explain."};
  app.require_subcommand(1);
  Options o;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { o.seed = s; }, "Override the run seed");
  };

  CLI::App* synth = app.add_subcommand("synth", "Generate the configured synthetic dataset");
  synth->add_option("--config", o.config, "Run configuration (JSON)")->required();
  synth->add_option("--out", o.out, "Output directory");
  add_seed(synth);

  CLI::App* train = app.add_subcommand("train", "Train a model");
  train->add_option("--config", o.config, "Run configuration (JSON)")->required();
  train->add_option("--out", o.out, "Output directory");
  add_seed(train);

  CLI::App* eval = app.add_subcommand("eval", "Evaluate a model on a labelled CSV");
  eval->add_option("--model", o.model, "Model file")->required();
  eval->add_option("--data", o.data, "Dataset CSV")->required();
  eval->add_option("--task", o.task, "Expected task kind");
  eval->add_option("--out", o.out, "Write the report here instead of stdout");

  CLI::App* predict = app.add_subcommand("predict", "Per-row predictions with uncertainties");
  predict->add_option("--model", o.model, "Model file")->required();
  predict->add_option("--data", o.data, "Dataset CSV (target column optional)")->required();
  predict->add_option("--task", o.task, "Expected task kind");
  predict->add_option("--out", o.out, "Write the records here instead of stdout");

  CLI::App* explain = app.add_subcommand("explain", "Export shape curves with uncertainty bands");
  explain->add_option("--model", o.model, "Model file")->required();
  explain->add_option("--data", o.data, "CSV checked against the model's schema");
  explain->add_option("--features", o.features, "Encoded feature names (default: all)")->delimiter(',');
  explain->add_option_function<std::size_t>(
      "--grid-size", [&](const std::size_t& g) { o.grid_size = g; }, "Grid points per curve");
  explain->add_flag("--smooth", o.smooth, "LOWESS-smooth the uncertainty bands");
  explain->add_flag("--denormalize-aleatoric", o.denormalize, "Aleatoric band in raw target units");
  explain->add_option_function<double>(
      "--lowess-fraction", [&](const double& f) { o.lowess_fraction = f; }, "LOWESS neighbourhood share");
  explain->add_option_function<std::size_t>(
      "--lowess-iterations", [&](const std::size_t& i) { o.lowess_iterations = i; },
      "LOWESS robustness passes");
  explain->add_option("--out", o.out, "Output directory for explain.json and per-feature CSVs");

  CLI::App* compare = app.add_subcommand("compare-links", "Forwarded vs at-sum links on one config");
  compare->add_option("--config", o.config, "Run configuration (JSON)")->required();
  compare->add_option("--out", o.out, "Output directory");
  add_seed(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? evinam::kExitOk : evinam::kExitUsage;
  }

  if (synth->parsed()) {
    const evinam::RunConfig cfg = resolve(o);
    std::cout << evinam::cmd_synth(cfg, *cfg.out).string() << "\n";
  } else if (train->parsed()) {
    const evinam::RunConfig cfg = resolve(o);
    const auto outcome = evinam::cmd_train(cfg, *cfg.out);
    std::cout << "best epoch " << outcome.report.best_epoch << ", validation loss "
              << outcome.report.best_val_loss << "; wrote " << (*cfg.out / "model.json").string()
              << "\n";
  } else if (eval->parsed()) {
    const auto model = open_model(o);
    const auto data = evinam::load_for_model(model, o.data, false);
    emit(evinam::cmd_eval(model, data), o.out);
  } else if (predict->parsed()) {
    const auto model = open_model(o);
    const auto data = evinam::load_for_model(model, o.data, true);
    emit(evinam::cmd_predict(model, data), o.out);
  } else if (explain->parsed()) {
    const auto model = open_model(o);
    if (!o.data.empty()) model.encoder.check_schema(evinam::load_for_model(model, o.data, true));
    evinam::ExplainOptions opts;
    if (o.grid_size) opts.grid_size = *o.grid_size;
    opts.smooth = o.smooth;
    opts.denormalize_aleatoric = o.denormalize;
    if (o.lowess_fraction) opts.lowess.fraction = *o.lowess_fraction;
    if (o.lowess_iterations) opts.lowess.iterations = *o.lowess_iterations;
    opts.lowess.validate();
    const auto curves = evinam::cmd_explain(model, o.features, opts);
    const json doc = evinam::explain_document(model, curves);
    if (o.out.empty()) {
      std::cout << doc.dump(2) << "\n";
    } else {
      const fs::path dir(o.out);
      fs::create_directories(dir);
      evinam::write_text(dir / "explain.json", doc.dump(2) + "\n");
      for (const auto& c : curves) evinam::write_text(dir / evinam::curve_csv_name(c), evinam::to_csv(c));
    }
  } else if (compare->parsed()) {
    const evinam::RunConfig cfg = resolve(o);
    const json doc = evinam::cmd_compare_links(cfg);
    fs::create_directories(*cfg.out);
    evinam::write_text(*cfg.out / "compare.json", doc.dump(2) + "\n");
    evinam::write_text(*cfg.out / "config.resolved.json", evinam::to_json(cfg).dump(2) + "\n");
    std::cout << doc.dump(2) << "\n";
  }
  return evinam::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    const int code = evinam::exit_code_for_current_exception();
    std::cerr << "evinam: " << e.what() << "\n";
    return code;
  }
}
