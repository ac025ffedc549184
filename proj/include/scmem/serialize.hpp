#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "scmem/montecarlo.hpp"

namespace scmem::io {

inline constexpr int kConfigSchema = 1;
inline constexpr const char* kToolVersion = "scmem 0.1.0";

// Config documents carry "schema": 1 and mirror TrialConfig field by field;
// unknown keys are rejected so typos cannot silently change an experiment.
mc::TrialConfig parse_trial_config(const nlohmann::json& doc);
mc::TrialConfig load_trial_config(const std::string& path);
nlohmann::json trial_config_to_json(const mc::TrialConfig& cfg);

// Deterministic payload (config echo + rates + bounds + comparisons).  Wall
// clock and timestamps are manifest-only so equal seeds give equal bytes.
nlohmann::json report_payload(const mc::ExperimentReport& report);
std::string canonical_payload(const mc::ExperimentReport& report);

// Full report document: {"schema", "manifest", "rates", "bounds",
// "comparisons"}; the manifest lists every artifact with a content digest.
nlohmann::json report_document(const mc::ExperimentReport& report,
                               const std::vector<std::pair<std::string, std::string>>& artifacts);

std::string crc32_hex(const std::string& bytes);

std::string trials_csv(const std::vector<mc::TrialResult>& trials);
std::string grid_csv_header();
std::string grid_csv_row(const std::string& param, double value,
                         const mc::ExperimentReport& report);

// 6 significant digits, locale-independent; used for CLI-facing numbers.
std::string format_number(double v);

} // namespace scmem::io
