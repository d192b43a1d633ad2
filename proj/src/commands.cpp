#include "evinam/commands.hpp"

#include <algorithm>
#include <fstream>

#include "evinam/errors.hpp"
#include "evinam/heads.hpp"
#include "evinam/model_io.hpp"
#include "evinam/uncertainty.hpp"

namespace evinam {

using nlohmann::json;

int exit_code_for_current_exception() noexcept {
  try {
    throw;
  } catch (const ConfigError&) {
    return kExitUsage;
  } catch (const KindMismatch&) {
    return kExitUsage;
  } catch (const DataError&) {
    return kExitData;
  } catch (const InvalidInput&) {
    return kExitData;
  } catch (const FormatError&) {
    return kExitData;
  } catch (const DomainError&) {
    return kExitNumeric;
  } catch (const NumericError&) {
    return kExitNumeric;
  } catch (const ShapeError&) {
    return kExitNumeric;
  } catch (const std::filesystem::filesystem_error&) {
    return kExitUsage;
  } catch (...) {
    return 1;
  }
}

json to_json(const MetricReport& report) {
  json values = json::object();
  for (const auto& [name, value] : report.values) values[name] = value;
  return {{"count", report.count}, {"metrics", values}};
}

json to_json(const TrainReport& report) {
  return {{"best_epoch", report.best_epoch},
          {"stopped_epoch", report.stopped_epoch},
          {"best_val_loss", report.best_val_loss},
          {"wall_seconds", report.wall_seconds},
          {"train_loss", report.train_loss},
          {"val_loss", report.val_loss},
          {"learning_rate", report.learning_rate}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << text;
    if (!out.flush()) throw ConfigError("failed writing '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

namespace {

json normalization_json(const Encoder& enc) {
  return {{"scale", "normalized"},
          {"target_mean", enc.normalizer.target_mean},
          {"target_std", enc.normalizer.target_std}};
}

MetricReport metrics_for(const EviNamModel& model, const EncodedData& data) {
  if (data.rows() == 0) throw InvalidInput("cannot evaluate on an empty dataset");
  if (model.task == TaskKind::regression) {
    return regression_metrics(data.y, predict_nig(model, data.x));
  }
  std::vector<double> probs;
  probs.reserve(data.rows() * model.n_classes());
  for (const DirichletParams& p : predict_dirichlet(model, data.x)) {
    const double s = p.strength();
    for (double a : p.alpha) probs.push_back(a / s);
  }
  return classification_metrics(data.y, probs, model.n_classes());
}

struct Prepared {
  Encoder encoder;
  EncodedData train;
  EncodedData val;
  EncodedData test;
};

Prepared prepare(const RunConfig& config) {
  const Dataset data = config.load_data();
  data.validate();
  const DataSplits parts = split(data, config.split);
  Prepared p;
  p.encoder = Encoder::fit(parts.train);
  p.train = p.encoder.transform(parts.train);
  p.val = p.encoder.transform(parts.val);
  if (parts.test.rows > 0) p.test = p.encoder.transform(parts.test);
  return p;
}

TrainOutcome train_prepared(const RunConfig& config, const Prepared& p, LinkMode link) {
  RunConfig cfg = config;
  cfg.model.link_mode = link;
  const std::size_t classes = config.task == TaskKind::classification ? p.encoder.class_names.size() : 0;
  if (config.task == TaskKind::classification && classes < 2) {
    throw DataError("classification needs at least two classes");
  }
  EviNamModel model = make_model(cfg.model_spec(p.encoder.width(), classes));
  model.encoder = p.encoder;
  model.feature_summaries = summarize_features(p.train);

  TrainOutcome outcome;
  outcome.report = train(model, p.train, p.val, cfg.train);
  json metrics = {{"val", to_json(metrics_for(model, p.val))}};
  if (p.test.rows() > 0) metrics["test"] = to_json(metrics_for(model, p.test));
  outcome.report_json = {{"format", "evinam-train-report"},
                         {"version", 1},
                         {"task", to_string(config.task)},
                         {"link_mode", to_string(link)},
                         {"rows", {{"train", p.train.rows()}, {"val", p.val.rows()}, {"test", p.test.rows()}}},
                         {"features", p.encoder.feature_names},
                         {"dropped_columns", p.encoder.normalizer.dropped},
                         {"normalization", normalization_json(p.encoder)},
                         {"training", to_json(outcome.report)},
                         {"metrics", metrics}};
  outcome.model = std::move(model);
  return outcome;
}

std::string file_safe(const std::string& name) {
  std::string out;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

json contributions_json(const ContributionTable& t) {
  json features = json::object();
  for (std::size_t j = 0; j < t.feature_names.size(); ++j) {
    json terms = json::object();
    for (std::size_t k = 0; k < t.parameter_names.size(); ++k) {
      terms[t.parameter_names[k]] = t.feature_terms[j][k];
    }
    features[t.feature_names[j]] = terms;
  }
  json bias = json::object();
  json assembled = json::object();
  for (std::size_t k = 0; k < t.parameter_names.size(); ++k) {
    bias[t.parameter_names[k]] = t.bias_terms[k];
    assembled[t.parameter_names[k]] = t.assembled[k];
  }
  return {{"bias", bias}, {"features", features}, {"assembled", assembled}};
}

}  // namespace

std::filesystem::path cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir) {
  if (!config.data.synth) throw ConfigError("synth needs a 'data.synth' section");
  const Dataset data = config.data.synth->generate(config.seed);
  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / "data.csv";
  write_csv(data, path);
  write_text(out_dir / "config.resolved.json", to_json(config).dump(2) + "\n");
  return path;
}

TrainOutcome run_training(const RunConfig& config) {
  return train_prepared(config, prepare(config), config.model.link_mode);
}

TrainOutcome cmd_train(const RunConfig& config, const std::filesystem::path& out_dir) {
  TrainOutcome outcome = run_training(config);
  const json resolved = to_json(config);
  // The output directory is left out so reruns elsewhere give identical model bytes.
  json provenance = resolved;
  provenance.erase("out");
  const std::string model_text = dump_model(outcome.model, provenance);
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "model.json", model_text);
  write_text(out_dir / "report.json", outcome.report_json.dump(2) + "\n");
  write_text(out_dir / "config.resolved.json", resolved.dump(2) + "\n");
  return outcome;
}

Dataset load_for_model(const EviNamModel& model, const std::filesystem::path& path,
                       bool target_optional) {
  if (!std::filesystem::is_regular_file(path)) {
    throw ConfigError("dataset file '" + path.string() + "' does not exist");
  }
  const Encoder& enc = model.encoder;
  if (enc.columns.empty()) throw InvalidInput("model carries no column schema");
  CsvSchema schema;
  schema.task = model.task;
  schema.target_column = enc.target_name;
  schema.class_names = enc.class_names;
  schema.target_optional = target_optional;
  for (const ColumnSpec& col : enc.columns) schema.columns[col.name] = col;
  return load_csv(path, schema);
}

json cmd_eval(const EviNamModel& model, const Dataset& data) {
  if (!data.has_targets) throw InvalidInput("evaluation data has no target column");
  const EncodedData encoded = model.encoder.transform(data);
  const MetricReport report = metrics_for(model, encoded);
  json out = to_json(report);
  out["format"] = "evinam-metrics";
  out["version"] = 1;
  out["task"] = to_string(model.task);
  out["normalization"] = normalization_json(model.encoder);
  return out;
}

json cmd_predict(const EviNamModel& model, const Dataset& data) {
  const EncodedData encoded = model.encoder.transform(data);
  const std::size_t n = encoded.rows();
  const std::size_t width = encoded.features();
  const bool additive = model.link_mode == LinkMode::forwarded;
  json records = json::array();
  if (model.task == TaskKind::regression) {
    const auto params = predict_nig(model, encoded.x);
    for (std::size_t i = 0; i < n; ++i) {
      const NigParams& p = params[i];
      const UncertaintyPair u = regression_uncertainty(p);
      json rec = {{"index", i},
                  {"prediction", model.encoder.denormalize_target(p.gamma)},
                  {"parameters", {{"gamma", p.gamma}, {"nu", p.nu}, {"alpha", p.alpha}, {"beta", p.beta}}},
                  {"aleatoric", u.aleatoric},
                  {"aleatoric_raw", u.aleatoric * model.encoder.normalizer.target_std},
                  {"epistemic", u.epistemic}};
      const std::span<const double> row(encoded.x.data().data() + i * width, width);
      rec["contributions"] = additive ? contributions_json(contributions(model, row)) : json(nullptr);
      records.push_back(std::move(rec));
    }
  } else {
    const auto params = predict_dirichlet(model, encoded.x);
    const auto& names = model.encoder.class_names;
    for (std::size_t i = 0; i < n; ++i) {
      const DirichletUncertainty u = dirichlet_uncertainty(params[i]);
      json probs = json::object();
      json alpha = json::object();
      for (std::size_t c = 0; c < u.probs.size(); ++c) {
        const std::string name = c < names.size() ? names[c] : std::to_string(c);
        probs[name] = u.probs[c];
        alpha[name] = params[i].alpha[c];
      }
      const auto best = static_cast<std::size_t>(
          std::max_element(u.probs.begin(), u.probs.end()) - u.probs.begin());
      json rec = {{"index", i},
                  {"prediction", best < names.size() ? names[best] : std::to_string(best)},
                  {"probabilities", probs},
                  {"alpha", alpha},
                  {"epistemic", u.epistemic},
                  {"aleatoric", u.aleatoric}};
      const std::span<const double> row(encoded.x.data().data() + i * width, width);
      rec["contributions"] = additive ? contributions_json(contributions(model, row)) : json(nullptr);
      records.push_back(std::move(rec));
    }
  }
  return {{"format", "evinam-predictions"},
          {"version", 1},
          {"task", to_string(model.task)},
          {"parameter_names", model.parameter_names()},
          {"normalization", normalization_json(model.encoder)},
          {"records", records}};
}

std::vector<ShapeCurve> cmd_explain(const EviNamModel& model, const std::vector<std::string>& features,
                                    const ExplainOptions& options) {
  std::vector<std::size_t> indices;
  const auto names = model.feature_names();
  if (features.empty()) {
    for (std::size_t j = 0; j < names.size(); ++j) indices.push_back(j);
  } else {
    for (const std::string& f : features) {
      const auto it = std::find(names.begin(), names.end(), f);
      if (it == names.end()) {
        std::string msg = "unknown feature '" + f + "'; available:";
        for (const auto& n : names) msg += " " + n;
        throw InvalidInput(msg);
      }
      indices.push_back(static_cast<std::size_t>(it - names.begin()));
    }
  }
  std::vector<ShapeCurve> curves;
  for (std::size_t j : indices) curves.push_back(explain_feature(model, j, options));
  return curves;
}

json explain_document(const EviNamModel& model, const std::vector<ShapeCurve>& curves) {
  json arr = json::array();
  for (const ShapeCurve& c : curves) arr.push_back(to_json(c));
  return {{"format", "evinam-shape-curves"},
          {"version", 1},
          {"task", to_string(model.task)},
          {"normalization", normalization_json(model.encoder)},
          {"curves", arr}};
}

json cmd_compare_links(const RunConfig& config) {
  const Prepared p = prepare(config);
  const EncodedData& target = p.test.rows() > 0 ? p.test : p.val;
  json results = json::object();
  for (LinkMode link : {LinkMode::forwarded, LinkMode::at_sum}) {
    const TrainOutcome outcome = train_prepared(config, p, link);
    json entry = to_json(metrics_for(outcome.model, target));
    entry["best_epoch"] = outcome.report.best_epoch;
    entry["best_val_loss"] = outcome.report.best_val_loss;
    results[to_string(link)] = entry;
  }
  return {{"format", "evinam-link-comparison"},
          {"version", 1},
          {"task", to_string(config.task)},
          {"evaluated_on", p.test.rows() > 0 ? "test" : "val"},
          {"normalization", normalization_json(p.encoder)},
          {"results", results}};
}

std::string curve_csv_name(const ShapeCurve& curve) { return "shape_" + file_safe(curve.feature) + ".csv"; }

}  // namespace evinam
