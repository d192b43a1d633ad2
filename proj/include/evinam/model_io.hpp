#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "evinam/model.hpp"

namespace evinam {

inline constexpr const char* kModelFormat = "evinam-model";
inline constexpr int kModelFormatVersion = 1;

nlohmann::json model_to_json(const EviNamModel& model);

/// Throws FormatError on a wrong format tag, unsupported version or any
/// structural inconsistency.
EviNamModel model_from_json(const nlohmann::json& doc);

/// Writes to a sibling temporary file and renames it into place, so readers
/// never observe a partial model. `training` is stored verbatim as provenance.
void save_model(const EviNamModel& model, const std::filesystem::path& path,
                const nlohmann::json& training = nullptr);

/// Throws FormatError for unreadable or corrupt files and KindMismatch when
/// `expected` is given and differs from the stored task.
EviNamModel load_model(const std::filesystem::path& path,
                       std::optional<TaskKind> expected = std::nullopt);

/// The provenance block written by save_model (null when absent).
nlohmann::json load_training_block(const std::filesystem::path& path);

/// Serialized text exactly as save_model writes it.
std::string dump_model(const EviNamModel& model, const nlohmann::json& training = nullptr);

}  // namespace evinam
