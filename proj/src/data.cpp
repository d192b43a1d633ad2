#include "evinam/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "evinam/errors.hpp"

namespace evinam {

std::string to_string(TaskKind task) {
  return task == TaskKind::regression ? "regression" : "classification";
}

TaskKind task_from_string(const std::string& name) {
  if (name == "regression") return TaskKind::regression;
  if (name == "classification") return TaskKind::classification;
  throw ConfigError("unknown task kind '" + name + "' (expected regression or classification)");
}

std::size_t Dataset::column_index(const std::string& column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  throw InvalidInput("dataset '" + name + "' has no column '" + column + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.name = name;
  out.task = task;
  out.columns = columns;
  out.target_name = target_name;
  out.class_names = class_names;
  out.has_targets = has_targets;
  out.rows = indices.size();
  const std::size_t width = columns.size();
  out.values.reserve(indices.size() * width);
  out.targets.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= rows) throw InvalidInput("subset index out of range");
    out.values.insert(out.values.end(), values.begin() + idx * width,
                      values.begin() + (idx + 1) * width);
    out.targets.push_back(targets[idx]);
  }
  return out;
}

void Dataset::validate() const {
  if (values.size() != rows * columns.size() || targets.size() != rows) {
    throw InvalidInput("dataset '" + name + "': row counts disagree");
  }
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c].kind != ColumnKind::categorical) continue;
    const double n_cat = static_cast<double>(columns[c].categories.size());
    for (std::size_t r = 0; r < rows; ++r) {
      const double v = value(r, c);
      if (v < 0.0 || v >= n_cat || v != std::floor(v)) {
        throw InvalidInput("dataset '" + name + "': column '" + columns[c].name +
                           "' holds a value outside its category list");
      }
    }
  }
  if (task == TaskKind::classification) {
    const double n_cls = static_cast<double>(class_names.size());
    for (double t : targets) {
      if (t < 0.0 || t >= n_cls || t != std::floor(t)) {
        throw InvalidInput("dataset '" + name + "': class label out of range");
      }
    }
  }
}

// ---------------------------------------------------------------------------

double CubicSpec::noise_std(std::size_t term) const {
  const double v = noise.at(term);
  return reading == NoiseReading::variance ? std::sqrt(v) : v;
}

CubicSpec default_cubic_1d() {
  CubicSpec spec;
  spec.noise = {3.0};
  spec.reading = NoiseReading::std_dev;
  return spec;
}

CubicSpec default_cubic_2d() {
  CubicSpec spec;
  spec.noise = {5.0, 1.0};
  spec.reading = NoiseReading::variance;
  return spec;
}

namespace {

void check_cubic(const CubicSpec& spec, std::size_t noise_terms) {
  if (spec.n == 0) throw InvalidInput("synthetic dataset needs n > 0");
  if (!(spec.lo < spec.hi)) throw InvalidInput("synthetic dataset needs lo < hi");
  if (spec.noise.size() != noise_terms) {
    throw InvalidInput("synthetic dataset expects " + std::to_string(noise_terms) +
                       " noise parameter(s)");
  }
  for (double v : spec.noise) {
    if (!(v >= 0.0)) throw InvalidInput("noise parameters must be non-negative");
  }
}

}  // namespace

Dataset synth_cubic_1d(const CubicSpec& spec) {
  check_cubic(spec, 1);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> xdist(spec.lo, spec.hi);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sd = spec.noise_std(0);

  Dataset d;
  d.name = "cubic_1d";
  d.columns = {{"x", ColumnKind::numeric, {}}};
  d.rows = spec.n;
  d.values.resize(spec.n);
  d.targets.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x = xdist(rng);
    const double eps = sd * noise(rng);
    d.values[i] = x;
    d.targets[i] = x * x * x + eps;
  }
  return d;
}

Dataset synth_cubic_2d(const CubicSpec& spec) {
  check_cubic(spec, 2);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> xdist(spec.lo, spec.hi);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double sd1 = spec.noise_std(0);
  const double sd2 = spec.noise_std(1);

  Dataset d;
  d.name = "cubic_2d";
  d.columns = {{"x1", ColumnKind::numeric, {}}, {"x2", ColumnKind::numeric, {}}};
  d.rows = spec.n;
  d.values.resize(2 * spec.n);
  d.targets.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x1 = xdist(rng);
    const double x2 = xdist(rng);
    const double e1 = sd1 * noise(rng);
    const double e2 = sd2 * noise(rng);
    d.values[2 * i] = x1;
    d.values[2 * i + 1] = x2;
    d.targets[i] = (x1 * x1 * x1 + e1) + (x2 * x2 + e2);
  }
  return d;
}

Dataset synth_blobs(const BlobSpec& spec) {
  if (spec.n < 2) throw InvalidInput("blob dataset needs n >= 2");
  if (!(spec.radius > 0.0) || !std::isfinite(spec.offset)) {
    throw InvalidInput("blob dataset needs a positive radius and finite offset");
  }
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);

  Dataset d;
  d.name = "blobs";
  d.task = TaskKind::classification;
  d.columns = {{"x1", ColumnKind::numeric, {}}, {"x2", ColumnKind::numeric, {}}};
  d.target_name = "label";
  d.class_names = {"a", "b"};
  d.rows = spec.n;
  d.values.resize(2 * spec.n);
  d.targets.resize(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const std::size_t label = i % 2;
    const double centre = label == 0 ? -spec.offset : spec.offset;
    d.values[2 * i] = centre + spec.radius * noise(rng);
    d.values[2 * i + 1] = centre + spec.radius * noise(rng);
    d.targets[i] = static_cast<double>(label);
  }
  return d;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) return std::nullopt;
  return value;
}

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::size_t category_of(const std::vector<std::string>& cats, const std::string& value) {
  const auto it = std::find(cats.begin(), cats.end(), value);
  return it == cats.end() ? cats.size() : static_cast<std::size_t>(it - cats.begin());
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw DataError("dataset '" + path.string() + "' has no header row");
  }
  const std::vector<std::string> header = split_line(line);
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (!seen.insert(h).second) throw DataError("duplicate column '" + h + "' in header");
    }
  }
  const auto target_it = std::find(header.begin(), header.end(), schema.target_column);
  const bool has_target = target_it != header.end();
  if (!has_target && !schema.target_optional) {
    throw DataError("dataset '" + path.string() + "' has no target column '" +
                    schema.target_column + "'");
  }
  const std::size_t target_pos =
      has_target ? static_cast<std::size_t>(target_it - header.begin()) : header.size();
  for (const auto& [name, spec] : schema.columns) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw DataError("declared column '" + name + "' is missing from '" + path.string() + "'");
    }
  }

  Dataset d;
  d.name = path.stem().string();
  d.task = schema.task;
  d.target_name = schema.target_column;
  d.has_targets = has_target;
  std::vector<std::size_t> feature_pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == target_pos) continue;
    feature_pos.push_back(i);
    const auto it = schema.columns.find(header[i]);
    ColumnSpec spec = it != schema.columns.end() ? it->second : ColumnSpec{};
    spec.name = header[i];
    d.columns.push_back(std::move(spec));
  }

  // First pass: raw cells.
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }

  // Category lists not declared up front are collected (sorted) from the file.
  for (std::size_t c = 0; c < d.columns.size(); ++c) {
    ColumnSpec& col = d.columns[c];
    if (col.kind != ColumnKind::categorical || !col.categories.empty()) continue;
    std::set<std::string> values;
    for (const auto& r : rows) values.insert(r[feature_pos[c]]);
    col.categories.assign(values.begin(), values.end());
  }
  if (d.task == TaskKind::classification) {
    d.class_names = schema.class_names;
    if (d.class_names.empty() && has_target) {
      std::set<std::string> values;
      for (const auto& r : rows) values.insert(r[target_pos]);
      d.class_names.assign(values.begin(), values.end());
    }
  }

  d.rows = rows.size();
  d.values.reserve(d.rows * d.columns.size());
  d.targets.reserve(d.rows);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t data_row = r + 1;
    for (std::size_t c = 0; c < d.columns.size(); ++c) {
      const ColumnSpec& col = d.columns[c];
      const std::string& cell = rows[r][feature_pos[c]];
      if (col.kind == ColumnKind::numeric) {
        const auto v = parse_number(cell);
        if (!v) {
          throw DataError("row " + std::to_string(data_row) + ", column '" + col.name +
                          "': cannot parse '" + cell + "' as a number");
        }
        d.values.push_back(*v);
      } else {
        const std::size_t idx = category_of(col.categories, cell);
        if (idx == col.categories.size()) {
          throw DataError("row " + std::to_string(data_row) + ", column '" + col.name +
                          "': '" + cell + "' is not a declared category");
        }
        d.values.push_back(static_cast<double>(idx));
      }
    }
    if (!has_target) {
      d.targets.push_back(0.0);
      continue;
    }
    const std::string& tcell = rows[r][target_pos];
    if (d.task == TaskKind::regression) {
      const auto v = parse_number(tcell);
      if (!v) {
        throw DataError("row " + std::to_string(data_row) + ", column '" + d.target_name +
                        "': cannot parse '" + tcell + "' as a number");
      }
      d.targets.push_back(*v);
    } else {
      const std::size_t idx = category_of(d.class_names, tcell);
      if (idx == d.class_names.size()) {
        throw DataError("row " + std::to_string(data_row) + ", column '" + d.target_name +
                        "': unknown class '" + tcell + "'");
      }
      d.targets.push_back(static_cast<double>(idx));
    }
  }
  return d;
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  for (const ColumnSpec& col : data.columns) out << col.name << ',';
  out << data.target_name << '\n';
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (std::size_t c = 0; c < data.columns.size(); ++c) {
      const ColumnSpec& col = data.columns[c];
      const double v = data.value(r, c);
      if (col.kind == ColumnKind::numeric) {
        out << format_number(v);
      } else {
        out << col.categories.at(static_cast<std::size_t>(v));
      }
      out << ',';
    }
    if (data.task == TaskKind::regression) {
      out << format_number(data.targets[r]);
    } else {
      out << data.class_names.at(static_cast<std::size_t>(data.targets[r]));
    }
    out << '\n';
  }
  if (!out) throw DataError("failed while writing '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// Encoding

std::vector<double> one_hot(const std::string& value, std::span<const std::string> categories) {
  std::vector<double> code(categories.size(), 0.0);
  const auto it = std::find(categories.begin(), categories.end(), value);
  if (it == categories.end()) throw InvalidInput("'" + value + "' is not a declared category");
  code[static_cast<std::size_t>(it - categories.begin())] = 1.0;
  return code;
}

std::string one_hot_inverse(std::span<const double> code, std::span<const std::string> categories) {
  if (code.size() != categories.size()) throw InvalidInput("one-hot width mismatch");
  std::optional<std::size_t> hot;
  for (std::size_t i = 0; i < code.size(); ++i) {
    if (code[i] == 1.0) {
      if (hot) throw InvalidInput("one-hot code has more than one active entry");
      hot = i;
    } else if (code[i] != 0.0) {
      throw InvalidInput("one-hot code entries must be 0 or 1");
    }
  }
  if (!hot) throw InvalidInput("one-hot code has no active entry");
  return categories[*hot];
}

Normalizer fit_normalizer(const Dataset& train) {
  if (train.rows == 0) throw InvalidInput("cannot fit normalization on an empty dataset");
  Normalizer norm;
  norm.columns.resize(train.columns.size());
  const double n = static_cast<double>(train.rows);
  for (std::size_t c = 0; c < train.columns.size(); ++c) {
    if (train.columns[c].kind != ColumnKind::numeric) continue;
    double sum = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) sum += train.value(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < train.rows; ++r) {
      const double d = train.value(r, c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    auto& stats = norm.columns[c];
    stats.mean = mean;
    if (sd > 0.0) {
      stats.std = sd;
    } else {
      stats.std = 1.0;
      stats.dropped = true;
      norm.dropped.push_back(train.columns[c].name);
      std::clog << "warning: column '" << train.columns[c].name
                << "' has zero variance on the training set and is dropped\n";
    }
  }
  if (train.task == TaskKind::regression) {
    double sum = 0.0;
    for (double t : train.targets) sum += t;
    norm.target_mean = sum / n;
    double ss = 0.0;
    for (double t : train.targets) ss += (t - norm.target_mean) * (t - norm.target_mean);
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) throw DomainError("regression target has zero variance on the training set");
    norm.target_std = sd;
  }
  return norm;
}

EncodedData EncodedData::subset(std::span<const std::size_t> indices) const {
  const std::size_t width = features();
  std::vector<double> xs;
  xs.reserve(indices.size() * width);
  EncodedData out;
  out.task = task;
  out.n_classes = n_classes;
  for (std::size_t idx : indices) {
    if (idx >= rows()) throw InvalidInput("subset index out of range");
    auto row = x.data().subspan(idx * width, width);
    xs.insert(xs.end(), row.begin(), row.end());
    out.y.push_back(y[idx]);
  }
  out.x = diff::Tensor::matrix(indices.size(), width, std::move(xs));
  return out;
}

Encoder Encoder::fit(const Dataset& train) {
  train.validate();
  Encoder enc;
  enc.task = train.task;
  enc.columns = train.columns;
  enc.target_name = train.target_name;
  enc.class_names = train.class_names;
  enc.normalizer = fit_normalizer(train);
  for (std::size_t c = 0; c < train.columns.size(); ++c) {
    const ColumnSpec& col = train.columns[c];
    if (col.kind == ColumnKind::numeric) {
      if (enc.normalizer.columns[c].dropped) continue;
      enc.feature_names.push_back(col.name);
      enc.sources.push_back({c, std::nullopt});
    } else {
      for (std::size_t k = 0; k < col.categories.size(); ++k) {
        enc.feature_names.push_back(col.name + "=" + col.categories[k]);
        enc.sources.push_back({c, k});
      }
    }
  }
  if (enc.feature_names.empty()) throw InvalidInput("no usable feature columns after encoding");
  return enc;
}

void Encoder::check_schema(const Dataset& data) const {
  std::vector<std::string> missing;
  std::vector<std::string> extra;
  for (const ColumnSpec& col : columns) {
    const bool found = std::any_of(data.columns.begin(), data.columns.end(),
                                   [&](const ColumnSpec& c) { return c.name == col.name; });
    if (!found) missing.push_back(col.name);
  }
  for (const ColumnSpec& col : data.columns) {
    const bool found = std::any_of(columns.begin(), columns.end(),
                                   [&](const ColumnSpec& c) { return c.name == col.name; });
    if (!found) extra.push_back(col.name);
  }
  if (missing.empty() && extra.empty()) return;
  std::ostringstream msg;
  msg << "feature schema mismatch;";
  if (!missing.empty()) {
    msg << " missing:";
    for (const auto& m : missing) msg << ' ' << m;
    msg << ';';
  }
  if (!extra.empty()) {
    msg << " extra:";
    for (const auto& e : extra) msg << ' ' << e;
    msg << ';';
  }
  throw InvalidInput(msg.str());
}

EncodedData Encoder::transform(const Dataset& data) const {
  check_schema(data);
  if (data.task != task) {
    throw KindMismatch("dataset is " + to_string(data.task) + " but the encoder is " +
                       to_string(task));
  }
  data.validate();
  // Map the encoder's columns to the dataset's column order and categories.
  std::vector<std::size_t> pos(columns.size());
  std::vector<std::vector<std::size_t>> remap(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    pos[c] = data.column_index(columns[c].name);
    const ColumnSpec& theirs = data.columns[pos[c]];
    if (theirs.kind != columns[c].kind) {
      throw InvalidInput("column '" + columns[c].name + "' changed kind");
    }
    if (columns[c].kind == ColumnKind::categorical) {
      for (const std::string& cat : theirs.categories) {
        const auto it = std::find(columns[c].categories.begin(), columns[c].categories.end(), cat);
        if (it == columns[c].categories.end()) {
          throw InvalidInput("column '" + columns[c].name + "' has unseen category '" + cat + "'");
        }
        remap[c].push_back(static_cast<std::size_t>(it - columns[c].categories.begin()));
      }
    }
  }
  std::vector<std::size_t> class_remap;
  if (task == TaskKind::classification) {
    for (const std::string& cls : data.class_names) {
      const auto it = std::find(class_names.begin(), class_names.end(), cls);
      if (it == class_names.end()) throw InvalidInput("unknown class '" + cls + "'");
      class_remap.push_back(static_cast<std::size_t>(it - class_names.begin()));
    }
  }

  const std::size_t width = this->width();
  std::vector<double> xs(data.rows * width);
  EncodedData out;
  out.task = task;
  out.n_classes = class_names.size();
  out.y.resize(data.rows);
  for (std::size_t r = 0; r < data.rows; ++r) {
    for (std::size_t j = 0; j < width; ++j) {
      const EncodedSource& src = sources[j];
      const double raw = data.value(r, pos[src.raw_column]);
      if (src.category) {
        const std::size_t cat = remap[src.raw_column][static_cast<std::size_t>(raw)];
        xs[r * width + j] = cat == *src.category ? 1.0 : 0.0;
      } else {
        const auto& st = normalizer.columns[src.raw_column];
        xs[r * width + j] = (raw - st.mean) / st.std;
      }
    }
    if (task == TaskKind::regression) {
      out.y[r] = normalize_target(data.targets[r]);
    } else {
      out.y[r] = static_cast<double>(class_remap[static_cast<std::size_t>(data.targets[r])]);
    }
  }
  out.x = diff::Tensor::matrix(data.rows, width, std::move(xs));
  return out;
}

std::size_t Encoder::feature_index(const std::string& name) const {
  const auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) {
    std::ostringstream msg;
    msg << "unknown feature '" << name << "'; available:";
    for (const auto& f : feature_names) msg << ' ' << f;
    throw InvalidInput(msg.str());
  }
  return static_cast<std::size_t>(it - feature_names.begin());
}

double Encoder::denormalize_target(double value) const {
  return value * normalizer.target_std + normalizer.target_mean;
}

double Encoder::normalize_target(double value) const {
  return (value - normalizer.target_mean) / normalizer.target_std;
}

double Encoder::denormalize_feature(std::size_t feature, double value) const {
  const EncodedSource& src = sources.at(feature);
  if (src.category) return value;
  const auto& st = normalizer.columns[src.raw_column];
  return value * st.std + st.mean;
}

double Encoder::normalize_feature(std::size_t feature, double value) const {
  const EncodedSource& src = sources.at(feature);
  if (src.category) return value;
  const auto& st = normalizer.columns[src.raw_column];
  return (value - st.mean) / st.std;
}

// ---------------------------------------------------------------------------

void SplitSpec::validate() const {
  if (test < 0.0 || train <= 0.0 || val < 0.0) throw ConfigError("split fractions must be non-negative");
  if (std::abs(test + train + val - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(spec.seed);
  std::shuffle(order.begin(), order.end(), rng);

  // A small epsilon keeps exact products such as 0.18 * 1000 from flooring to 179.
  const auto count = [n](double fraction) {
    return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  };
  const std::size_t n_test = count(spec.test);
  const std::size_t n_val = count(spec.val);
  SplitIndices out;
  out.test.assign(order.begin(), order.begin() + n_test);
  out.val.assign(order.begin() + n_test, order.begin() + n_test + n_val);
  out.train.assign(order.begin() + n_test + n_val, order.end());
  return out;
}

DataSplits split(const Dataset& data, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(data.rows, spec);
  return {data.subset(idx.train), data.subset(idx.val), data.subset(idx.test)};
}

}  // namespace evinam
