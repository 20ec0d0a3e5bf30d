#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distillplan/types.hpp"

// Loading and serialization for the three catalog file kinds.
//
//   fleet:   JSON array of server records
//   zoo:     JSON array of model records
//   dataset: JSONL, one training example per line
//
// Field names in the files match the struct fields one to one. Loaders
// throw ParseError for malformed documents and ValidationError for
// contract violations; every failure message names the offending record
// id or line number.

namespace distill {

nlohmann::json to_json(const ServerSpec& s);
nlohmann::json to_json(const EvalRecord& r);
nlohmann::json to_json(const ModelSpec& m);
nlohmann::json to_json(const HardwareFloor& f);
nlohmann::json to_json(const PlanRequest& r);
nlohmann::json to_json(const TrainingExample& e);

ServerSpec server_from_json(const nlohmann::json& j, const std::string& where);
ModelSpec model_from_json(const nlohmann::json& j, const std::string& where);
PlanRequest request_from_json(const nlohmann::json& j);
TrainingExample example_from_json(const nlohmann::json& j,
                                  const std::string& where);

std::vector<ServerSpec> load_fleet(const std::filesystem::path& path);
std::vector<ModelSpec> load_model_zoo(const std::filesystem::path& path);
std::vector<TrainingExample> load_dataset(const std::filesystem::path& path);
PlanRequest load_plan_request(const std::filesystem::path& path);

void save_fleet(const std::filesystem::path& path,
                const std::vector<ServerSpec>& fleet);
void save_model_zoo(const std::filesystem::path& path,
                    const std::vector<ModelSpec>& zoo);
// One compact JSON object per line; stable key order, byte-reproducible.
void save_dataset(const std::filesystem::path& path,
                  const std::vector<TrainingExample>& examples);

// Validation entry points used by the loaders; public so callers holding
// in-memory records can check them the same way. `where` prefixes error
// messages ("fleet record 'srv-1'", "dataset line 17").
void validate_server(const ServerSpec& s, const std::string& where);
void validate_model(const ModelSpec& m, const std::string& where);
void validate_example(const TrainingExample& e, const std::string& where);
void validate_request(const PlanRequest& r);

const char* to_string(ModelRole role);
const char* to_string(Origin origin);

}  // namespace distill
