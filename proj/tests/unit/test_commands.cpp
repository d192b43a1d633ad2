#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "evinam/commands.hpp"
#include "evinam/errors.hpp"
#include "evinam/model_io.hpp"
#include "fixtures.hpp"

using namespace evinam;
using evinam::diff::Tensor;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <typename E>
int code_for(const E& e) {
  try {
    throw e;
  } catch (...) {
    return exit_code_for_current_exception();
  }
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "evinam_commands_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig small_run(const std::string& kind, std::uint64_t seed = 0) {
  json doc = {{"task", kind == "blobs" ? "classification" : "regression"},
              {"seed", seed},
              {"data", {{"synth", {{"kind", kind}, {"n", 120}}}}},
              {"model", {{"hidden_sizes", {8}}}},
              {"train", {{"max_epochs", 4}, {"patience", 3}, {"batch_size", 32}}},
              {"explain", {{"grid_size", 7}}}};
  return parse_run_config(doc);
}

// Encoder and summaries of a 1D dataset whose target equals its feature, with a
// network that outputs the normalized feature as the mean term.
EviNamModel identity_model(const Dataset& data) {
  ModelSpec spec;
  spec.hidden_sizes = {1};
  EviNamModel model = fixture::fitted_model(data, spec, 1);
  auto& trunk = model.nets[0].trunks[0];
  trunk[0].weight = Tensor::matrix(1, 1, {1.0});
  trunk[0].bias = Tensor::vector({10.0});
  trunk[1].weight = Tensor::matrix(1, 4, {1.0, 0.0, 0.0, 0.0});
  trunk[1].bias = Tensor::vector({-10.0, 0.0, 0.0, 0.0});
  model.biases = Tensor::vector({0.0, 0.5, 0.5, 0.5});
  return model;
}

Dataset diagonal(std::size_t n) {
  Dataset d;
  d.columns = {ColumnSpec{"x", ColumnKind::numeric, {}}};
  d.target_name = "y";
  d.rows = n;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    d.values.push_back(v);
    d.targets.push_back(v);
  }
  return d;
}

}  // namespace

TEST_SUITE("commands") {
  TEST_CASE("exit codes by error family") {
    CHECK(code_for(ConfigError("x")) == kExitUsage);
    CHECK(code_for(KindMismatch("x")) == kExitUsage);
    CHECK(code_for(fs::filesystem_error("x", std::error_code())) == kExitUsage);
    CHECK(code_for(DataError("x")) == kExitData);
    CHECK(code_for(InvalidInput("x")) == kExitData);
    CHECK(code_for(FormatError("x")) == kExitData);
    CHECK(code_for(DomainError("x")) == kExitNumeric);
    CHECK(code_for(NumericError("x")) == kExitNumeric);
    CHECK(code_for(TrainingDiverged("x", TrainReport{})) == kExitNumeric);
    CHECK(code_for(ShapeError("x")) == kExitNumeric);
    CHECK(code_for(std::runtime_error("x")) == 1);
  }

  TEST_CASE("a perfect hand-built model evaluates to zero error") {
    const Dataset data = diagonal(21);
    const EviNamModel model = identity_model(data);
    const json report = cmd_eval(model, data);
    CHECK(report.at("format") == "evinam-metrics");
    CHECK(report.at("count") == 21);
    CHECK(report.at("metrics").at("mae").get<double>() < 1e-12);
    CHECK(report.at("metrics").at("r2").get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    const json preds = cmd_predict(model, data);
    for (std::size_t i = 0; i < 21; ++i) {
      CHECK(preds.at("records")[i].at("prediction").get<double>() ==
            doctest::Approx(data.targets[i]).epsilon(1e-12));
    }
  }

  TEST_CASE("evaluating an empty dataset is an input error") {
    const Dataset data = diagonal(5);
    const EviNamModel model = identity_model(data);
    Dataset empty = data;
    empty.rows = 0;
    empty.values.clear();
    empty.targets.clear();
    CHECK_THROWS_AS(cmd_eval(model, empty), InvalidInput);
    Dataset unlabelled = data;
    unlabelled.has_targets = false;
    CHECK_THROWS_AS(cmd_eval(model, unlabelled), InvalidInput);
  }

  TEST_CASE("predictions are deterministic and contributions re-assemble") {
    const Dataset data = fixture::small_cubic_2d(40, 3);
    const EviNamModel model = fixture::fitted_model(data, ModelSpec{}, 4);
    const json a = cmd_predict(model, data);
    CHECK(a.dump() == cmd_predict(model, data).dump());
    const auto names = a.at("parameter_names").get<std::vector<std::string>>();
    for (const json& rec : a.at("records")) {
      const json& c = rec.at("contributions");
      for (const std::string& k : names) {
        double sum = c.at("bias").at(k).get<double>();
        for (const auto& f : c.at("features").items()) sum += f.value().at(k).get<double>();
        CHECK(std::abs(sum - rec.at("parameters").at(k).get<double>()) <= 1e-9);
        CHECK(std::abs(sum - c.at("assembled").at(k).get<double>()) <= 1e-9);
      }
    }
  }

  TEST_CASE("classification predictions name classes") {
    const Dataset data = fixture::small_blobs(40, 3);
    const EviNamModel model = fixture::fitted_model(data, ModelSpec{}, 4);
    const json p = cmd_predict(model, data);
    for (const json& rec : p.at("records")) {
      double total = 0.0;
      for (const auto& item : rec.at("probabilities").items()) total += item.value().get<double>();
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(rec.at("probabilities").contains(rec.at("prediction").get<std::string>()));
    }
  }

  TEST_CASE("unknown explain features list the available names") {
    const Dataset data = fixture::small_cubic_2d(40, 3);
    const EviNamModel model = fixture::fitted_model(data, ModelSpec{}, 4);
    CHECK_THROWS_WITH_AS(cmd_explain(model, {"nope"}, ExplainOptions{}),
                         doctest::Contains("available: x1 x2"), InvalidInput);
    ExplainOptions opt;
    opt.grid_size = 5;
    const auto curves = cmd_explain(model, {"x2"}, opt);
    REQUIRE(curves.size() == 1);
    CHECK(curves[0].feature == "x2");
    CHECK(cmd_explain(model, {}, opt).size() == 2);
    CHECK(curve_csv_name(curves[0]) == "shape_x2.csv");
    const json doc = explain_document(model, curves);
    CHECK(doc.at("curves").size() == 1);
  }

  TEST_CASE("train writes its outputs and reruns are byte-identical") {
    const RunConfig cfg = small_run("cubic_2d", 3);
    const fs::path a = scratch("run_a");
    const fs::path b = scratch("run_b");
    cmd_train(cfg, a);
    cmd_train(cfg, b);
    for (const char* f : {"model.json", "report.json", "config.resolved.json"}) CHECK(fs::exists(a / f));
    CHECK(slurp(a / "model.json") == slurp(b / "model.json"));
    const json report = json::parse(slurp(a / "report.json"));
    CHECK(report.at("rows").at("test") == 12);
    CHECK(report.at("metrics").contains("test"));
    CHECK_NOTHROW(load_model(a / "model.json", TaskKind::regression));
    CHECK(load_training_block(a / "model.json").at("seed") == 3);
  }

  TEST_CASE("train writes nothing when data loading fails") {
    const fs::path dir = scratch("broken");
    {
      std::ofstream csv(dir / "bad.csv");
      csv << "x,y\n1,2\nfoo,3\n";
    }
    json doc = {{"task", "regression"}, {"data", {{"path", (dir / "bad.csv").string()}}}};
    const RunConfig cfg = parse_run_config(doc);
    const fs::path out = dir / "out";
    CHECK_THROWS_AS(cmd_train(cfg, out), DataError);
    CHECK_FALSE(fs::exists(out));
  }

  TEST_CASE("synth writes the dataset and the resolved config") {
    const RunConfig cfg = small_run("blobs", 2);
    const fs::path dir = scratch("synth");
    const fs::path csv = cmd_synth(cfg, dir);
    CHECK(fs::exists(csv));
    CHECK(fs::exists(dir / "config.resolved.json"));
    CsvSchema schema;
    schema.task = TaskKind::classification;
    schema.target_column = "label";
    CHECK(load_csv(csv, schema).rows == 120);
  }

  TEST_CASE("loading data for a model checks the file and schema") {
    const RunConfig cfg = small_run("cubic_2d");
    const fs::path dir = scratch("load");
    const fs::path csv = cmd_synth(cfg, dir);
    const EviNamModel model = fixture::fitted_model(cfg.load_data(), ModelSpec{}, 1);
    CHECK(load_for_model(model, csv, false).rows == 120);
    CHECK_THROWS_AS(load_for_model(model, dir / "missing.csv", false), ConfigError);
    {
      std::ofstream other(dir / "other.csv");
      other << "x1,z,y\n1,2,3\n";
    }
    CHECK_THROWS_AS(load_for_model(model, dir / "other.csv", false), DataError);
  }

  TEST_CASE("link comparison trains both variants") {
    const json doc = cmd_compare_links(small_run("cubic_1d", 1));
    CHECK(doc.at("evaluated_on") == "test");
    CHECK(doc.at("results").contains("forwarded"));
    CHECK(doc.at("results").contains("at_sum"));
    CHECK(doc.at("results").at("at_sum").at("metrics").contains("crps"));
  }
}
