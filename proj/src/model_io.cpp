#include "evinam/model_io.hpp"

#include <fstream>
#include <sstream>

#include "evinam/errors.hpp"

namespace evinam {

using diff::Tensor;
using nlohmann::json;

namespace {

json tensor_to_json(const Tensor& t) {
  return {{"shape", t.shape()}, {"data", std::vector<double>(t.data().begin(), t.data().end())}};
}

Tensor tensor_from_json(const json& j) {
  try {
    return Tensor(j.at("shape").get<diff::Shape>(), j.at("data").get<std::vector<double>>());
  } catch (const ShapeError& e) {
    throw FormatError(std::string("tensor payload inconsistent: ") + e.what());
  }
}

json encoder_to_json(const Encoder& enc) {
  json columns = json::array();
  for (std::size_t c = 0; c < enc.columns.size(); ++c) {
    const ColumnSpec& col = enc.columns[c];
    json entry = {{"name", col.name},
                  {"kind", col.kind == ColumnKind::numeric ? "numeric" : "categorical"},
                  {"categories", col.categories}};
    if (c < enc.normalizer.columns.size()) {
      const auto& st = enc.normalizer.columns[c];
      entry["mean"] = st.mean;
      entry["std"] = st.std;
      entry["dropped"] = st.dropped;
    }
    columns.push_back(std::move(entry));
  }
  json sources = json::array();
  for (const EncodedSource& s : enc.sources) {
    sources.push_back({{"raw_column", s.raw_column},
                       {"category", s.category ? json(*s.category) : json(nullptr)}});
  }
  return {{"task", to_string(enc.task)},
          {"columns", columns},
          {"target_name", enc.target_name},
          {"class_names", enc.class_names},
          {"target_mean", enc.normalizer.target_mean},
          {"target_std", enc.normalizer.target_std},
          {"dropped", enc.normalizer.dropped},
          {"feature_names", enc.feature_names},
          {"sources", sources}};
}

Encoder encoder_from_json(const json& j) {
  Encoder enc;
  enc.task = task_from_string(j.at("task").get<std::string>());
  for (const json& entry : j.at("columns")) {
    ColumnSpec col;
    col.name = entry.at("name").get<std::string>();
    const auto kind = entry.at("kind").get<std::string>();
    if (kind != "numeric" && kind != "categorical") throw FormatError("unknown column kind " + kind);
    col.kind = kind == "numeric" ? ColumnKind::numeric : ColumnKind::categorical;
    col.categories = entry.at("categories").get<std::vector<std::string>>();
    enc.columns.push_back(std::move(col));
    Normalizer::Stats st;
    st.mean = entry.value("mean", 0.0);
    st.std = entry.value("std", 1.0);
    st.dropped = entry.value("dropped", false);
    enc.normalizer.columns.push_back(st);
  }
  enc.target_name = j.at("target_name").get<std::string>();
  enc.class_names = j.at("class_names").get<std::vector<std::string>>();
  enc.normalizer.target_mean = j.at("target_mean").get<double>();
  enc.normalizer.target_std = j.at("target_std").get<double>();
  enc.normalizer.dropped = j.at("dropped").get<std::vector<std::string>>();
  enc.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  for (const json& s : j.at("sources")) {
    EncodedSource src;
    src.raw_column = s.at("raw_column").get<std::size_t>();
    if (src.raw_column >= enc.columns.size()) throw FormatError("encoder source out of range");
    if (!s.at("category").is_null()) src.category = s.at("category").get<std::size_t>();
    enc.sources.push_back(src);
  }
  if (enc.sources.size() != enc.feature_names.size()) {
    throw FormatError("encoder feature names and sources differ in length");
  }
  return enc;
}

json net_to_json(const ShapeNet& net) {
  json trunks = json::array();
  for (const auto& trunk : net.trunks) {
    json layers = json::array();
    for (const DenseLayer& layer : trunk) {
      layers.push_back({{"weight", tensor_to_json(layer.weight)},
                        {"bias", tensor_to_json(layer.bias)}});
    }
    trunks.push_back(std::move(layers));
  }
  return {{"feature_index", net.feature_index}, {"trunks", trunks}};
}

ShapeNet net_from_json(const json& j, const ShapeNetConfig& config) {
  ShapeNet net;
  net.config = config;
  net.feature_index = j.at("feature_index").get<std::size_t>();
  const std::size_t expected_trunks = config.separate_nets ? config.n_outputs : 1;
  const std::size_t head = config.separate_nets ? 1 : config.n_outputs;
  if (j.at("trunks").size() != expected_trunks) throw FormatError("unexpected trunk count");
  for (const json& layers : j.at("trunks")) {
    if (layers.size() != config.hidden_sizes.size() + 1) throw FormatError("unexpected layer count");
    std::vector<DenseLayer> trunk;
    std::size_t in = 1;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const std::size_t out = l < config.hidden_sizes.size() ? config.hidden_sizes[l] : head;
      DenseLayer layer{tensor_from_json(layers[l].at("weight")),
                       tensor_from_json(layers[l].at("bias"))};
      if (layer.weight.shape() != diff::Shape{in, out} || layer.bias.shape() != diff::Shape{out}) {
        throw FormatError("layer shape does not match the stored configuration");
      }
      if (!layer.weight.all_finite() || !layer.bias.all_finite()) {
        throw FormatError("non-finite weight in model file");
      }
      trunk.push_back(std::move(layer));
      in = out;
    }
    net.trunks.push_back(std::move(trunk));
  }
  return net;
}

}  // namespace

json model_to_json(const EviNamModel& model) {
  json summaries = json::array();
  for (const FeatureSummary& s : model.feature_summaries) {
    summaries.push_back(
        {{"min", s.min}, {"max", s.max}, {"bin_edges", s.bin_edges}, {"counts", s.counts}});
  }
  json nets = json::array();
  for (const ShapeNet& net : model.nets) nets.push_back(net_to_json(net));
  const ShapeNetConfig& cfg = model.net_config;
  return {{"format", kModelFormat},
          {"version", kModelFormatVersion},
          {"task", to_string(model.task)},
          {"link_mode", to_string(model.link_mode)},
          {"evidence_link", to_string(model.evidence_link)},
          {"net_config",
           {{"hidden_sizes", cfg.hidden_sizes},
            {"activation", to_string(cfg.activation)},
            {"n_outputs", cfg.n_outputs},
            {"init_seed", cfg.init_seed},
            {"separate_nets", cfg.separate_nets}}},
          {"biases", tensor_to_json(model.biases)},
          {"encoder", encoder_to_json(model.encoder)},
          {"feature_summaries", summaries},
          {"nets", nets}};
}

EviNamModel model_from_json(const json& doc) {
  try {
    if (!doc.is_object() || doc.value("format", std::string{}) != kModelFormat) {
      throw FormatError("not an evinam model file");
    }
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion) {
      throw FormatError("unsupported model format version " + std::to_string(version) +
                        " (expected " + std::to_string(kModelFormatVersion) + ")");
    }
    EviNamModel model;
    model.task = task_from_string(doc.at("task").get<std::string>());
    model.link_mode = link_mode_from_string(doc.at("link_mode").get<std::string>());
    model.evidence_link = evidence_link_from_string(doc.at("evidence_link").get<std::string>());
    const json& nc = doc.at("net_config");
    model.net_config.hidden_sizes = nc.at("hidden_sizes").get<std::vector<std::size_t>>();
    model.net_config.activation = activation_from_string(nc.at("activation").get<std::string>());
    model.net_config.n_outputs = nc.at("n_outputs").get<std::size_t>();
    model.net_config.init_seed = nc.at("init_seed").get<std::uint64_t>();
    model.net_config.separate_nets = nc.at("separate_nets").get<bool>();
    model.net_config.validate();
    if (model.task == TaskKind::regression && model.net_config.n_outputs != kNigParams) {
      throw FormatError("regression model must have 4 outputs per feature");
    }
    model.biases = tensor_from_json(doc.at("biases"));
    const diff::Shape bias_shape{model.task == TaskKind::regression ? kNigParams : 0};
    if (model.biases.shape() != bias_shape) throw FormatError("intercept tensor has wrong shape");
    model.encoder = encoder_from_json(doc.at("encoder"));
    if (model.encoder.task != model.task) throw FormatError("encoder task disagrees with model task");
    for (const json& s : doc.at("feature_summaries")) {
      FeatureSummary fs;
      fs.min = s.at("min").get<double>();
      fs.max = s.at("max").get<double>();
      fs.bin_edges = s.at("bin_edges").get<std::vector<double>>();
      fs.counts = s.at("counts").get<std::vector<std::size_t>>();
      if (fs.bin_edges.size() != fs.counts.size() + 1) throw FormatError("histogram malformed");
      model.feature_summaries.push_back(std::move(fs));
    }
    for (const json& n : doc.at("nets")) model.nets.push_back(net_from_json(n, model.net_config));
    if (model.nets.empty()) throw FormatError("model has no feature networks");
    if (!model.encoder.feature_names.empty() &&
        model.encoder.feature_names.size() != model.nets.size()) {
      throw FormatError("encoder width does not match the number of feature networks");
    }
    if (!model.feature_summaries.empty() && model.feature_summaries.size() != model.nets.size()) {
      throw FormatError("feature summaries do not match the number of feature networks");
    }
    return model;
  } catch (const json::exception& e) {
    throw FormatError(std::string("corrupt model file: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("corrupt model file: ") + e.what());
  }
}

std::string dump_model(const EviNamModel& model, const json& training) {
  json doc = model_to_json(model);
  if (!training.is_null()) doc["training"] = training;
  return doc.dump(1) + "\n";
}

void save_model(const EviNamModel& model, const std::filesystem::path& path,
                const json& training) {
  const std::string text = dump_model(model, training);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write model file " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw ConfigError("failed while writing model file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ConfigError("cannot move model file into place at " + path.string());
  }
}

namespace {

json read_document(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    throw FormatError("corrupt model file " + path.string() + ": " + e.what());
  }
}

}  // namespace

EviNamModel load_model(const std::filesystem::path& path, std::optional<TaskKind> expected) {
  EviNamModel model = model_from_json(read_document(path));
  if (expected && *expected != model.task) {
    throw KindMismatch("model file holds a " + to_string(model.task) + " model, expected " +
                       to_string(*expected));
  }
  return model;
}

json load_training_block(const std::filesystem::path& path) {
  const json doc = read_document(path);
  return doc.contains("training") ? doc.at("training") : json(nullptr);
}

}  // namespace evinam
