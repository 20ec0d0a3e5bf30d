#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "distillplan/pfg.hpp"
#include "distillplan/selector.hpp"
#include "distillplan/types.hpp"

// The deployment plan document: every choice the planner made, the
// numbers behind it, and an audit trail of the candidates it examined.
// Serialization is canonical: stable key order, derived numbers rounded
// to six significant digits, two-space indent, trailing newline. Two runs
// over the same inputs emit byte-identical documents.

namespace distill {

struct PlanEstimates {
  double train_time_h = 0;
  double tokens_per_s = 0;
  double train_cost_usd = 0;
  double hourly_cost_usd = 0;
  double rtt_ms = 0;

  bool operator==(const PlanEstimates&) const = default;
};

enum class AuditStage { server, teacher, student };

const char* to_string(AuditStage stage);

struct AuditEntry {
  AuditStage stage = AuditStage::server;
  std::string candidate_id;
  bool selected = false;
  // Absent for the winner and for losing candidates that were scored but
  // simply outranked.
  std::optional<std::string> rejected_reason;
  std::map<std::string, double> metrics;

  bool operator==(const AuditEntry&) const = default;
};

struct DeploymentPlan {
  std::string task_id;
  ServerSpec server;
  ModelSpec teacher;
  ModelSpec student;
  Strategy strategy = Strategy::alignment;
  StrategyDecision decision;
  PlanEstimates estimates;
  PfgResult pfg;
  std::vector<AuditEntry> audit;
  PlanRequest request;
};

nlohmann::json plan_to_document(const DeploymentPlan& plan);

// dump(2) of the document plus a trailing newline.
std::string plan_document_json(const DeploymentPlan& plan);

DeploymentPlan plan_from_json(const nlohmann::json& doc);

Strategy strategy_from_string(const std::string& s);

}  // namespace distill
