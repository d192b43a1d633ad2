#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evinam/tensor.hpp"

namespace evinam {

enum class TaskKind { regression, classification };

std::string to_string(TaskKind task);
TaskKind task_from_string(const std::string& name);

enum class ColumnKind { numeric, categorical };

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::numeric;
  /// Declared category list (categorical columns only).
  std::vector<std::string> categories;
};

/// Raw tabular data. Categorical cells hold the index into their column's
/// category list; classification targets hold the class index.
struct Dataset {
  std::string name;
  TaskKind task = TaskKind::regression;
  std::vector<ColumnSpec> columns;
  std::string target_name = "y";
  std::vector<std::string> class_names;
  std::size_t rows = 0;
  std::vector<double> values;  // rows x columns, row-major
  std::vector<double> targets;
  /// False when the source had no target column; targets are then zero placeholders.
  bool has_targets = true;

  double value(std::size_t row, std::size_t col) const { return values[row * columns.size() + col]; }
  std::size_t column_index(const std::string& name) const;
  Dataset subset(std::span<const std::size_t> indices) const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Synthetic cubic benchmarks

/// How the noise parameters of a synthetic spec are read.
enum class NoiseReading { std_dev, variance };

struct CubicSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double lo = -3.0;
  double hi = 3.0;
  /// One entry per noise term (1 for 1D, 2 for 2D).
  std::vector<double> noise;
  NoiseReading reading = NoiseReading::std_dev;

  double noise_std(std::size_t term) const;
};

/// y = x^3 + eps, eps ~ N(0, 3) read as a standard deviation.
CubicSpec default_cubic_1d();
/// y = (x1^3 + eps1) + (x2^2 + eps2), eps1 ~ N(0, 5), eps2 ~ N(0, 1) read as variances.
CubicSpec default_cubic_2d();

Dataset synth_cubic_1d(const CubicSpec& spec);
Dataset synth_cubic_2d(const CubicSpec& spec);

/// Two isotropic Gaussian blobs centred at -(offset, offset) and +(offset, offset).
struct BlobSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double offset = 3.0;
  /// Per-axis standard deviation; also the blob radius.
  double radius = 1.0;
};

/// Classes alternate 0, 1, 0, ... so each holds half the rows (rounded up for class 0).
/// Columns are "x1" and "x2"; class names are "a" and "b".
Dataset synth_blobs(const BlobSpec& spec);

// ---------------------------------------------------------------------------
// CSV

struct CsvSchema {
  std::string target_column;
  TaskKind task = TaskKind::regression;
  /// Declared kinds by column name; undeclared feature columns are numeric.
  std::map<std::string, ColumnSpec> columns;
  /// Declared class names for classification; collected from the file when empty.
  std::vector<std::string> class_names;
  /// Accept files without the target column (prediction inputs).
  bool target_optional = false;
};

/// Comma-separated, header row required, '.' decimal separator, no quoting.
Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema);
void write_csv(const Dataset& data, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Encoding

/// Indicator vector of `value` within `categories`.
std::vector<double> one_hot(const std::string& value, std::span<const std::string> categories);
/// Inverse of one_hot; throws InvalidInput unless exactly one entry is 1.
std::string one_hot_inverse(std::span<const double> code, std::span<const std::string> categories);

/// Z-score statistics fitted on a training set (population std).
struct Normalizer {
  struct Stats {
    double mean = 0.0;
    double std = 1.0;
    bool dropped = false;
  };
  std::vector<Stats> columns;  // parallel to Dataset::columns; unused for categoricals
  double target_mean = 0.0;
  double target_std = 1.0;
  std::vector<std::string> dropped;
};

Normalizer fit_normalizer(const Dataset& train);

/// Where an encoded column comes from.
struct EncodedSource {
  std::size_t raw_column = 0;
  /// Category index for one-hot columns, nullopt for numeric columns.
  std::optional<std::size_t> category;
};

/// Model-ready design matrix.
struct EncodedData {
  TaskKind task = TaskKind::regression;
  diff::Tensor x;  // [N x J]
  std::vector<double> y;
  std::size_t n_classes = 0;

  std::size_t rows() const { return y.size(); }
  std::size_t features() const { return x.rank() == 2 ? x.cols() : 0; }
  EncodedData subset(std::span<const std::size_t> indices) const;
};

/// Normalization plus one-hot expansion, fitted on training data only.
struct Encoder {
  TaskKind task = TaskKind::regression;
  std::vector<ColumnSpec> columns;
  std::string target_name;
  std::vector<std::string> class_names;
  Normalizer normalizer;
  std::vector<std::string> feature_names;
  std::vector<EncodedSource> sources;

  static Encoder fit(const Dataset& train);

  EncodedData transform(const Dataset& data) const;
  std::size_t width() const { return feature_names.size(); }
  std::size_t feature_index(const std::string& name) const;

  double denormalize_target(double value) const;
  double normalize_target(double value) const;
  /// Raw-unit value of an encoded column (identity for one-hot columns).
  double denormalize_feature(std::size_t feature, double value) const;
  double normalize_feature(std::size_t feature, double value) const;

  /// Throws InvalidInput naming missing and extra columns.
  void check_schema(const Dataset& data) const;
};

// ---------------------------------------------------------------------------
// Splitting

struct SplitSpec {
  double test = 0.10;
  double train = 0.72;
  double val = 0.18;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Shuffles once, carves floor(test*n) test rows, then floor(val*n) validation
/// rows; the remainder goes to train.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct DataSplits {
  Dataset train;
  Dataset val;
  Dataset test;
};

DataSplits split(const Dataset& data, const SplitSpec& spec);

}  // namespace evinam
