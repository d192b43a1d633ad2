#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evinam/data.hpp"
#include "evinam/explain.hpp"
#include "evinam/heads.hpp"
#include "evinam/shape_net.hpp"
#include "evinam/train.hpp"

namespace evinam {

struct SynthConfig {
  /// cubic_1d, cubic_2d or blobs.
  std::string kind = "cubic_1d";
  std::size_t n = 1000;
  /// Defaults to the run seed.
  std::optional<std::uint64_t> seed;
  double lo = -3.0;
  double hi = 3.0;
  /// Empty means the kind's default noise.
  std::vector<double> noise;
  std::optional<NoiseReading> reading;
  double offset = 3.0;
  double radius = 1.0;

  TaskKind task() const;
  Dataset generate(std::uint64_t run_seed) const;
};

struct DataConfig {
  std::optional<std::filesystem::path> path;
  std::optional<SynthConfig> synth;
  std::string target = "y";
  std::map<std::string, ColumnSpec> columns;
  std::vector<std::string> class_names;
};

struct ModelConfig {
  std::vector<std::size_t> hidden_sizes{64, 32};
  Activation activation = Activation::relu;
  bool separate_nets = false;
  LinkMode link_mode = LinkMode::forwarded;
  EvidenceLink evidence_link = EvidenceLink::softplus;
};

/// Everything one CLI invocation needs. One `seed` drives the split, the
/// weight initialization and the batch order.
struct RunConfig {
  TaskKind task = TaskKind::regression;
  DataConfig data;
  SplitSpec split;
  ModelConfig model;
  TrainConfig train;
  ExplainOptions explain;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out;

  /// Throws ConfigError for inconsistent settings, including a data file that does not exist.
  void validate() const;
  ModelSpec model_spec(std::size_t n_features, std::size_t n_classes) const;
  /// Loads the CSV or generates the synthetic set.
  Dataset load_data() const;
};

/// Strict parse: unknown keys and loss settings for the other task are errors.
/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully resolved configuration, every default spelled out.
nlohmann::json to_json(const RunConfig& config);

/// Applies a --seed override to the run seed.
void override_seed(RunConfig& config, std::uint64_t seed);

}  // namespace evinam
