#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evinam/explain.hpp"
#include "evinam/metrics.hpp"
#include "evinam/model.hpp"
#include "evinam/run_config.hpp"
#include "evinam/train.hpp"

namespace evinam {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumeric = 4 };

/// Maps an in-flight exception to an exit code. Call inside a catch block.
int exit_code_for_current_exception() noexcept;

nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const TrainReport& report);

/// Writes data.csv and the resolved config into `out_dir`.
std::filesystem::path cmd_synth(const RunConfig& config, const std::filesystem::path& out_dir);

struct TrainOutcome {
  EviNamModel model;
  TrainReport report;
  nlohmann::json report_json;
};

/// Trains the configured model without touching the filesystem beyond reading data.
TrainOutcome run_training(const RunConfig& config);

/// Trains, then writes model.json, report.json and config.resolved.json into `out_dir`.
/// Nothing is written when any step before the final writes fails.
TrainOutcome cmd_train(const RunConfig& config, const std::filesystem::path& out_dir);

/// Loads a CSV laid out like the model's training data.
Dataset load_for_model(const EviNamModel& model, const std::filesystem::path& path,
                       bool target_optional);

/// Metrics on the normalized target scale plus the normalization constants.
nlohmann::json cmd_eval(const EviNamModel& model, const Dataset& data);

/// One record per row: prediction, uncertainties and the contribution table.
nlohmann::json cmd_predict(const EviNamModel& model, const Dataset& data);

/// Shape curves for the named encoded features (all features when empty).
std::vector<ShapeCurve> cmd_explain(const EviNamModel& model, const std::vector<std::string>& features,
                                    const ExplainOptions& options);
/// File name for a curve's CSV export.
std::string curve_csv_name(const ShapeCurve& curve);
nlohmann::json explain_document(const EviNamModel& model, const std::vector<ShapeCurve>& curves);

/// Trains the configuration under forwarded and at-sum links and compares test metrics.
nlohmann::json cmd_compare_links(const RunConfig& config);

/// Atomic text write (temporary sibling plus rename).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace evinam
