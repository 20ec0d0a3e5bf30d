#include "distillplan/plan.hpp"

#include "distillplan/canonical.hpp"
#include "distillplan/catalog.hpp"
#include "distillplan/errors.hpp"

namespace distill {

namespace {

AuditStage stage_from_string(const std::string& s) {
  if (s == "server") return AuditStage::server;
  if (s == "teacher") return AuditStage::teacher;
  if (s == "student") return AuditStage::student;
  throw ParseError("plan document: unknown audit stage '" + s + "'");
}

nlohmann::json audit_to_json(const AuditEntry& e) {
  nlohmann::json metrics = nlohmann::json::object();
  for (const auto& [k, v] : e.metrics) metrics[k] = canonical_round(v);
  nlohmann::json j{
      {"candidate_id", e.candidate_id},
      {"metrics", metrics},
      {"selected", e.selected},
      {"stage", to_string(e.stage)},
  };
  if (e.rejected_reason) j["rejected_reason"] = *e.rejected_reason;
  return j;
}

AuditEntry audit_from_json(const nlohmann::json& j) {
  AuditEntry e;
  e.stage = stage_from_string(j.at("stage").get<std::string>());
  e.candidate_id = j.at("candidate_id").get<std::string>();
  e.selected = j.at("selected").get<bool>();
  if (j.contains("rejected_reason"))
    e.rejected_reason = j.at("rejected_reason").get<std::string>();
  e.metrics = j.at("metrics").get<std::map<std::string, double>>();
  return e;
}

}  // namespace

const char* to_string(AuditStage stage) {
  switch (stage) {
    case AuditStage::server:
      return "server";
    case AuditStage::teacher:
      return "teacher";
    case AuditStage::student:
      return "student";
  }
  return "unknown";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "alignment") return Strategy::alignment;
  if (s == "injection") return Strategy::injection;
  throw ParseError("plan document: unknown strategy '" + s + "'");
}

nlohmann::json plan_to_document(const DeploymentPlan& plan) {
  nlohmann::json audit = nlohmann::json::array();
  for (const auto& e : plan.audit) audit.push_back(audit_to_json(e));

  nlohmann::json members = nlohmann::json::array();
  for (const auto& id : plan.pfg.pfg_members) members.push_back(id);

  return nlohmann::json{
      {"audit", audit},
      {"decision",
       {{"strategy", to_string(plan.decision.strategy)},
        {"teacher_sample_accuracy",
         canonical_round(plan.decision.teacher_sample_accuracy)},
        {"threshold_used", plan.decision.threshold_used}}},
      {"estimates",
       {{"hourly_cost_usd", plan.estimates.hourly_cost_usd},
        {"rtt_ms", plan.estimates.rtt_ms},
        {"tokens_per_s", canonical_round(plan.estimates.tokens_per_s)},
        {"train_cost_usd", canonical_round(plan.estimates.train_cost_usd)},
        {"train_time_h", canonical_round(plan.estimates.train_time_h)}}},
      {"pfg",
       {{"chosen_cell", plan.pfg.chosen_cell.coords},
        {"cost_cell_rule", "lowest_cost_coordinate"},
        {"grid_intervals", plan.pfg.grid_intervals},
        {"ideal_point",
         {{"cost", plan.pfg.ideal_point.cost},
          {"latency", plan.pfg.ideal_point.latency},
          {"neg_hardware", canonical_round(plan.pfg.ideal_point.neg_hardware)}}},
        {"members", members}}},
      {"request", to_json(plan.request)},
      {"schema", "deployment-plan/1"},
      {"server", to_json(plan.server)},
      {"strategy", to_string(plan.strategy)},
      {"student", to_json(plan.student)},
      {"task_id", plan.task_id},
      {"teacher", to_json(plan.teacher)},
  };
}

std::string plan_document_json(const DeploymentPlan& plan) {
  return plan_to_document(plan).dump(2) + "\n";
}

DeploymentPlan plan_from_json(const nlohmann::json& doc) {
  try {
    const std::string schema = doc.at("schema").get<std::string>();
    if (schema != "deployment-plan/1")
      throw ParseError("plan document: unsupported schema '" + schema + "'");

    DeploymentPlan plan;
    plan.task_id = doc.at("task_id").get<std::string>();
    plan.server = server_from_json(doc.at("server"), "plan server");
    plan.teacher = model_from_json(doc.at("teacher"), "plan teacher");
    plan.student = model_from_json(doc.at("student"), "plan student");
    plan.strategy = strategy_from_string(doc.at("strategy").get<std::string>());

    const auto& d = doc.at("decision");
    plan.decision.strategy =
        strategy_from_string(d.at("strategy").get<std::string>());
    plan.decision.teacher_sample_accuracy =
        d.at("teacher_sample_accuracy").get<double>();
    plan.decision.threshold_used = d.at("threshold_used").get<double>();

    const auto& e = doc.at("estimates");
    plan.estimates.train_time_h = e.at("train_time_h").get<double>();
    plan.estimates.tokens_per_s = e.at("tokens_per_s").get<double>();
    plan.estimates.train_cost_usd = e.at("train_cost_usd").get<double>();
    plan.estimates.hourly_cost_usd = e.at("hourly_cost_usd").get<double>();
    plan.estimates.rtt_ms = e.at("rtt_ms").get<double>();

    const auto& p = doc.at("pfg");
    plan.pfg.chosen = plan.server;
    plan.pfg.grid_intervals = p.at("grid_intervals").get<int>();
    const auto& cell = p.at("chosen_cell");
    for (std::size_t i = 0; i < 3; ++i)
      plan.pfg.chosen_cell.coords[i] = cell.at(i).get<int>();
    for (const auto& m : p.at("members"))
      plan.pfg.pfg_members.insert(m.get<std::string>());
    const auto& ideal = p.at("ideal_point");
    plan.pfg.ideal_point.neg_hardware = ideal.at("neg_hardware").get<double>();
    plan.pfg.ideal_point.cost = ideal.at("cost").get<double>();
    plan.pfg.ideal_point.latency = ideal.at("latency").get<double>();

    for (const auto& a : doc.at("audit")) plan.audit.push_back(audit_from_json(a));
    plan.request = request_from_json(doc.at("request"));
    return plan;
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("plan document: ") + ex.what());
  }
}

}  // namespace distill
