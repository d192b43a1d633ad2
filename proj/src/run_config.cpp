#include "evinam/run_config.hpp"

#include <fstream>
#include <set>

#include "evinam/errors.hpp"

namespace evinam {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError("'" + where + "' must be a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : obj.items()) {
    if (!ok.contains(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in '" + where + "'");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + where + "." + key + "' has the wrong type");
  }
}

std::string read_string(const json& obj, const char* key, const std::string& fallback,
                        const std::string& where) {
  std::string value = fallback;
  read(obj, key, value, where);
  return value;
}

std::string reading_name(NoiseReading r) { return r == NoiseReading::variance ? "variance" : "std"; }

NoiseReading reading_from(const std::string& name) {
  if (name == "std") return NoiseReading::std_dev;
  if (name == "variance") return NoiseReading::variance;
  throw ConfigError("noise_reading must be 'std' or 'variance', got '" + name + "'");
}

}  // namespace

TaskKind SynthConfig::task() const {
  if (kind == "cubic_1d" || kind == "cubic_2d") return TaskKind::regression;
  if (kind == "blobs") return TaskKind::classification;
  throw ConfigError("unknown synthetic dataset kind '" + kind + "'");
}

Dataset SynthConfig::generate(std::uint64_t run_seed) const {
  const std::uint64_t s = seed.value_or(run_seed);
  if (kind == "blobs") {
    BlobSpec spec;
    spec.n = n;
    spec.seed = s;
    spec.offset = offset;
    spec.radius = radius;
    return synth_blobs(spec);
  }
  CubicSpec spec = kind == "cubic_2d" ? default_cubic_2d() : default_cubic_1d();
  if (kind != "cubic_1d" && kind != "cubic_2d") throw ConfigError("unknown synthetic kind " + kind);
  spec.n = n;
  spec.seed = s;
  spec.lo = lo;
  spec.hi = hi;
  if (!noise.empty()) spec.noise = noise;
  if (reading) spec.reading = *reading;
  return kind == "cubic_2d" ? synth_cubic_2d(spec) : synth_cubic_1d(spec);
}

void RunConfig::validate() const {
  if (data.path.has_value() == data.synth.has_value()) {
    throw ConfigError("data needs exactly one of 'path' or 'synth'");
  }
  if (data.synth && data.synth->task() != task) {
    throw ConfigError("synthetic dataset '" + data.synth->kind + "' does not fit task " +
                      to_string(task));
  }
  if (data.path && !std::filesystem::is_regular_file(*data.path)) {
    throw ConfigError("dataset file '" + data.path->string() + "' does not exist");
  }
  if (data.target.empty()) throw ConfigError("target column name must not be empty");
  if (task == TaskKind::regression && !data.class_names.empty()) {
    throw ConfigError("class_names only apply to classification");
  }
  if (model.hidden_sizes.empty()) throw ConfigError("hidden_sizes must not be empty");
  if (task == TaskKind::regression && model.evidence_link != EvidenceLink::softplus) {
    throw ConfigError("evidence_link only applies to classification");
  }
  split.validate();
  train.validate();
  explain.lowess.validate();
  if (explain.grid_size < 2) throw ConfigError("explain.grid_size must be at least 2");
}

ModelSpec RunConfig::model_spec(std::size_t n_features, std::size_t n_classes) const {
  ModelSpec spec;
  spec.task = task;
  spec.n_features = n_features;
  spec.n_classes = n_classes;
  spec.hidden_sizes = model.hidden_sizes;
  spec.activation = model.activation;
  spec.separate_nets = model.separate_nets;
  spec.link_mode = model.link_mode;
  spec.evidence_link = model.evidence_link;
  spec.seed = seed;
  return spec;
}

Dataset RunConfig::load_data() const {
  if (data.synth) return data.synth->generate(seed);
  CsvSchema schema;
  schema.target_column = data.target;
  schema.task = task;
  schema.columns = data.columns;
  schema.class_names = data.class_names;
  return load_csv(*data.path, schema);
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc, "config", {"task", "data", "split", "model", "train", "explain", "seed", "out"});
  RunConfig cfg;
  if (!doc.contains("task")) throw ConfigError("config must name a 'task'");
  try {
    cfg.task = task_from_string(doc.at("task").get<std::string>());
  } catch (const json::exception&) {
    throw ConfigError("'task' must be a string");
  }
  read(doc, "seed", cfg.seed, "config");
  if (doc.contains("out")) {
    std::filesystem::path out = read_string(doc, "out", "", "config");
    cfg.out = out.is_relative() ? base_dir / out : out;
  }

  if (!doc.contains("data")) throw ConfigError("config must have a 'data' section");
  const json& d = doc.at("data");
  check_keys(d, "data", {"path", "synth", "target", "columns", "class_names"});
  if (d.contains("path")) {
    std::filesystem::path p = read_string(d, "path", "", "data");
    cfg.data.path = p.is_relative() ? base_dir / p : p;
  }
  if (d.contains("synth")) {
    const json& s = d.at("synth");
    check_keys(s, "data.synth", {"kind", "n", "seed", "lo", "hi", "noise", "noise_reading", "offset", "radius"});
    SynthConfig synth;
    read(s, "kind", synth.kind, "data.synth");
    read(s, "n", synth.n, "data.synth");
    if (s.contains("seed")) {
      std::uint64_t v = 0;
      read(s, "seed", v, "data.synth");
      synth.seed = v;
    }
    read(s, "lo", synth.lo, "data.synth");
    read(s, "hi", synth.hi, "data.synth");
    read(s, "noise", synth.noise, "data.synth");
    if (s.contains("noise_reading")) synth.reading = reading_from(read_string(s, "noise_reading", "", "data.synth"));
    read(s, "offset", synth.offset, "data.synth");
    read(s, "radius", synth.radius, "data.synth");
    synth.task();
    cfg.data.synth = synth;
  }
  read(d, "target", cfg.data.target, "data");
  read(d, "class_names", cfg.data.class_names, "data");
  if (d.contains("columns")) {
    const json& cols = d.at("columns");
    if (!cols.is_object()) throw ConfigError("'data.columns' must be an object");
    for (const auto& item : cols.items()) {
      const std::string where = "data.columns." + item.key();
      check_keys(item.value(), where, {"kind", "categories"});
      ColumnSpec spec;
      spec.name = item.key();
      const std::string kind = read_string(item.value(), "kind", "numeric", where);
      if (kind == "numeric") {
        spec.kind = ColumnKind::numeric;
      } else if (kind == "categorical") {
        spec.kind = ColumnKind::categorical;
      } else {
        throw ConfigError("'" + where + ".kind' must be numeric or categorical");
      }
      read(item.value(), "categories", spec.categories, where);
      if (spec.kind == ColumnKind::numeric && !spec.categories.empty()) {
        throw ConfigError("'" + where + "' lists categories for a numeric column");
      }
      cfg.data.columns[item.key()] = std::move(spec);
    }
  }

  if (doc.contains("split")) {
    const json& s = doc.at("split");
    check_keys(s, "split", {"train", "val", "test"});
    read(s, "train", cfg.split.train, "split");
    read(s, "val", cfg.split.val, "split");
    read(s, "test", cfg.split.test, "split");
  }

  if (doc.contains("model")) {
    const json& m = doc.at("model");
    check_keys(m, "model", {"hidden_sizes", "activation", "separate_nets", "link_mode", "evidence_link"});
    read(m, "hidden_sizes", cfg.model.hidden_sizes, "model");
    if (m.contains("activation")) cfg.model.activation = activation_from_string(read_string(m, "activation", "", "model"));
    read(m, "separate_nets", cfg.model.separate_nets, "model");
    if (m.contains("link_mode")) cfg.model.link_mode = link_mode_from_string(read_string(m, "link_mode", "", "model"));
    if (m.contains("evidence_link")) {
      cfg.model.evidence_link = evidence_link_from_string(read_string(m, "evidence_link", "", "model"));
    }
  }

  if (doc.contains("train")) {
    const json& t = doc.at("train");
    check_keys(t, "train", {"lr", "batch_size", "max_epochs", "patience", "min_delta", "scheduler", "loss"});
    read(t, "lr", cfg.train.lr, "train");
    read(t, "batch_size", cfg.train.batch_size, "train");
    read(t, "max_epochs", cfg.train.max_epochs, "train");
    read(t, "patience", cfg.train.patience, "train");
    read(t, "min_delta", cfg.train.min_delta, "train");
    if (t.contains("scheduler")) {
      const json& s = t.at("scheduler");
      check_keys(s, "train.scheduler", {"factor", "patience", "min_lr", "threshold"});
      read(s, "factor", cfg.train.scheduler.factor, "train.scheduler");
      read(s, "patience", cfg.train.scheduler.patience, "train.scheduler");
      read(s, "min_lr", cfg.train.scheduler.min_lr, "train.scheduler");
      read(s, "threshold", cfg.train.scheduler.threshold, "train.scheduler");
    }
    if (t.contains("loss")) {
      const json& l = t.at("loss");
      if (cfg.task == TaskKind::regression) {
        check_keys(l, "train.loss", {"lambda", "p"});
        read(l, "lambda", cfg.train.loss.lambda, "train.loss");
        read(l, "p", cfg.train.loss.p, "train.loss");
      } else {
        check_keys(l, "train.loss", {"classification", "kl_anneal_epochs"});
        if (l.contains("classification")) {
          cfg.train.loss.classification =
              classification_loss_from_string(read_string(l, "classification", "", "train.loss"));
        }
        read(l, "kl_anneal_epochs", cfg.train.loss.kl_anneal_epochs, "train.loss");
      }
    }
  }

  if (doc.contains("explain")) {
    const json& e = doc.at("explain");
    check_keys(e, "explain", {"grid_size", "smooth", "denormalize_aleatoric", "lowess"});
    read(e, "grid_size", cfg.explain.grid_size, "explain");
    read(e, "smooth", cfg.explain.smooth, "explain");
    read(e, "denormalize_aleatoric", cfg.explain.denormalize_aleatoric, "explain");
    if (e.contains("lowess")) {
      const json& l = e.at("lowess");
      check_keys(l, "explain.lowess", {"fraction", "iterations"});
      read(l, "fraction", cfg.explain.lowess.fraction, "explain.lowess");
      read(l, "iterations", cfg.explain.lowess.iterations, "explain.lowess");
    }
  }

  cfg.split.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

void override_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.split.seed = seed;
  config.train.seed = seed;
}

json to_json(const RunConfig& cfg) {
  json data = {{"target", cfg.data.target}};
  if (cfg.data.path) data["path"] = std::filesystem::absolute(*cfg.data.path).lexically_normal().string();
  if (cfg.data.synth) {
    const SynthConfig& s = *cfg.data.synth;
    json synth = {{"kind", s.kind}, {"n", s.n}, {"seed", s.seed.value_or(cfg.seed)}};
    if (s.kind == "blobs") {
      synth["offset"] = s.offset;
      synth["radius"] = s.radius;
    } else {
      CubicSpec defaults = s.kind == "cubic_2d" ? default_cubic_2d() : default_cubic_1d();
      synth["lo"] = s.lo;
      synth["hi"] = s.hi;
      synth["noise"] = s.noise.empty() ? defaults.noise : s.noise;
      synth["noise_reading"] = reading_name(s.reading.value_or(defaults.reading));
    }
    data["synth"] = synth;
  }
  if (!cfg.data.columns.empty()) {
    json cols = json::object();
    for (const auto& [name, spec] : cfg.data.columns) {
      json c = {{"kind", spec.kind == ColumnKind::numeric ? "numeric" : "categorical"}};
      if (!spec.categories.empty()) c["categories"] = spec.categories;
      cols[name] = c;
    }
    data["columns"] = cols;
  }
  if (!cfg.data.class_names.empty()) data["class_names"] = cfg.data.class_names;

  json loss;
  if (cfg.task == TaskKind::regression) {
    loss = {{"lambda", cfg.train.loss.lambda}, {"p", cfg.train.loss.p}};
  } else {
    loss = {{"classification", to_string(cfg.train.loss.classification)},
            {"kl_anneal_epochs", cfg.train.loss.kl_anneal_epochs}};
  }
  json model = {{"hidden_sizes", cfg.model.hidden_sizes},
                {"activation", to_string(cfg.model.activation)},
                {"separate_nets", cfg.model.separate_nets},
                {"link_mode", to_string(cfg.model.link_mode)}};
  if (cfg.task == TaskKind::classification) model["evidence_link"] = to_string(cfg.model.evidence_link);

  json out = {
      {"task", to_string(cfg.task)},
      {"seed", cfg.seed},
      {"data", data},
      {"split", {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}}},
      {"model", model},
      {"train",
       {{"lr", cfg.train.lr},
        {"batch_size", cfg.train.batch_size},
        {"max_epochs", cfg.train.max_epochs},
        {"patience", cfg.train.patience},
        {"min_delta", cfg.train.min_delta},
        {"scheduler",
         {{"factor", cfg.train.scheduler.factor},
          {"patience", cfg.train.scheduler.patience},
          {"min_lr", cfg.train.scheduler.min_lr},
          {"threshold", cfg.train.scheduler.threshold}}},
        {"loss", loss}}},
      {"explain",
       {{"grid_size", cfg.explain.grid_size},
        {"smooth", cfg.explain.smooth},
        {"denormalize_aleatoric", cfg.explain.denormalize_aleatoric},
        {"lowess",
         {{"fraction", cfg.explain.lowess.fraction},
          {"iterations", cfg.explain.lowess.iterations}}}}}};
  if (cfg.out) out["out"] = std::filesystem::absolute(*cfg.out).lexically_normal().string();
  return out;
}

}  // namespace evinam
