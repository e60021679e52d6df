#pragma once

// JSON documents for configs and results. Reading starts from the
// default-constructed value and overrides the keys that are present; unknown
// keys are rejected so that typos do not silently fall back to defaults.

#include <filesystem>

#include "json.hpp"

#include "hpjks/dgp.hpp"
#include "hpjks/kstest.hpp"
#include "hpjks/montecarlo.hpp"
#include "hpjks/panel.hpp"
#include "hpjks/prodfn.hpp"

namespace hpjks {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const LatentDistSpec& v);
void from_json(const Json& j, LatentDistSpec& v);
void to_json(Json& j, const NoiseSpec& v);
void from_json(const Json& j, NoiseSpec& v);
void to_json(Json& j, const InputProcess& v);
void from_json(const Json& j, InputProcess& v);
void to_json(Json& j, const DgpConfig& v);
void from_json(const Json& j, DgpConfig& v);

void to_json(Json& j, const ExperimentGrid& v);
void from_json(const Json& j, ExperimentGrid& v);
void to_json(Json& j, const ExperimentConfig& v);
void from_json(const Json& j, ExperimentConfig& v);

void to_json(Json& j, const ColumnMapping& v);
void from_json(const Json& j, ColumnMapping& v);
void to_json(Json& j, const CleaningConfig& v);
void from_json(const Json& j, CleaningConfig& v);

void to_json(Json& j, const CleaningReport& v);
void to_json(Json& j, const ProductionEstimate& v);
void to_json(Json& j, const TestResult& v);

/// Parses a JSON document from disk. Throws DataError on I/O or syntax errors.
Json read_json_file(const std::filesystem::path& path);
/// Pretty-printed with a trailing newline, written atomically.
void write_json_file(const std::filesystem::path& path, const Json& doc);

}  // namespace hpjks
