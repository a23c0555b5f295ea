#pragma once

// Text formats shared with other tools: architecture JSON, sampling plans,
// search checkpoints and the CSV exports.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "paretonas/archspace.hpp"
#include "paretonas/fairsampler.hpp"
#include "paretonas/search.hpp"

namespace paretonas {

inline constexpr int kArchSchemaVersion = 1;
inline constexpr int kCheckpointSchemaVersion = 1;

nlohmann::ordered_json arch_to_json(const ArchDescriptor& arch);
/// Throws ValidationError for missing or mistyped fields.
ArchDescriptor arch_from_json(const nlohmann::json& j);

nlohmann::ordered_json plan_to_json(const SamplingPlan& plan);

nlohmann::ordered_json config_to_json(const SearchConfig& config);
SearchConfig config_from_json(const nlohmann::json& j, SearchConfig defaults = {});

/// FNV-1a over the log rows' canonical text.
std::uint64_t log_digest(std::span<const EvaluationRecord> log);

nlohmann::ordered_json checkpoint_to_json(const SearchState& state);
/// Verifies the stored digest against the stored log.
SearchState checkpoint_from_json(const nlohmann::json& j);

/// chromosome,accuracy,macs,params,rank,crowding
std::string front_csv(std::span<const Individual> front);
/// Parses a front CSV (header required). Throws ValidationError on bad rows.
std::vector<Individual> parse_front_csv(std::string_view text);

/// iteration,accuracy,macs
std::string scatter_csv(std::span<const EvaluationRecord> log);
/// iteration,chromosome,accuracy,macs,params,cached
std::string log_csv(std::span<const EvaluationRecord> log);

std::string read_text_file(const std::filesystem::path& path);
/// Writes via a temporary file and rename so readers never see partial data.
void write_text_file(const std::filesystem::path& path, std::string_view text);

} // namespace paretonas
