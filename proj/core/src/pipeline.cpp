#include "distillplan/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "distillplan/catalog.hpp"
#include "distillplan/errors.hpp"
#include "distillplan/evaluator.hpp"
#include "distillplan/http_teacher.hpp"
#include "distillplan/mock_teacher.hpp"
#include "distillplan/pfg.hpp"
#include "distillplan/rng.hpp"
#include "distillplan/selector.hpp"

namespace distill {

namespace {

void expect_keys(const nlohmann::json& j,
                 std::initializer_list<const char*> keys, const char* where) {
  for (const auto& [k, v] : j.items()) {
    (void)v;
    bool known = false;
    for (const char* key : keys) {
      if (k == key) {
        known = true;
        break;
      }
    }
    if (!known)
      throw ParseError(std::string("config: unknown key '") + k + "' in " +
                       where);
  }
}

void require_fraction(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw ValidationError(std::string("config: ") + name +
                          " must lie in [0, 1]");
}

TrainMethod method_from_string(const std::string& s) {
  if (s == "sft_lora") return TrainMethod::sft_lora;
  if (s == "grpo") return TrainMethod::grpo;
  throw ParseError("config: unknown training method '" + s + "'");
}

double mock_rate_for(const MockConfig& mock, std::span<const ModelSpec> zoo,
                     const std::string& task_id, const std::string& model_id) {
  if (auto it = mock.rates.find(model_id); it != mock.rates.end())
    return it->second;
  for (const auto& m : zoo) {
    if (m.id != model_id) continue;
    if (const EvalRecord* r = m.find_eval(task_id, false)) return r->accuracy;
    break;
  }
  return mock.default_rate;
}

std::map<std::string, std::string> answer_key_from(
    std::span<const TrainingExample> dataset) {
  std::map<std::string, std::string> key;
  for (const auto& ex : dataset) key[ex.id] = ex.answer;
  return key;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

double round_cents(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
  PipelineConfig c;
  try {
    expect_keys(j,
                {"estimator", "mock", "endpoint", "synthesis", "training",
                 "paths", "overall_weights"},
                "the top level");
    if (j.contains("estimator")) {
      const auto& e = j.at("estimator");
      expect_keys(e, {"adapter_factor", "utilization"}, "estimator");
      if (e.contains("adapter_factor"))
        c.estimator.adapter_factor = e.at("adapter_factor").get<double>();
      if (e.contains("utilization"))
        c.estimator.utilization = e.at("utilization").get<double>();
      if (!(c.estimator.adapter_factor > 0) || !(c.estimator.utilization > 0))
        throw ValidationError(
            "config: estimator factors must be positive");
    }
    if (j.contains("mock")) {
      const auto& m = j.at("mock");
      expect_keys(m,
                  {"enabled", "seed", "default_rate", "rates",
                   "verifier_accept_rate", "fail_rate"},
                  "mock");
      if (m.contains("enabled")) c.mock.enabled = m.at("enabled").get<bool>();
      if (m.contains("seed"))
        c.mock.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("default_rate"))
        c.mock.default_rate = m.at("default_rate").get<double>();
      if (m.contains("rates"))
        c.mock.rates = m.at("rates").get<std::map<std::string, double>>();
      if (m.contains("verifier_accept_rate"))
        c.mock.verifier_accept_rate =
            m.at("verifier_accept_rate").get<double>();
      if (m.contains("fail_rate"))
        c.mock.fail_rate = m.at("fail_rate").get<double>();
      require_fraction(c.mock.default_rate, "mock.default_rate");
      require_fraction(c.mock.verifier_accept_rate,
                       "mock.verifier_accept_rate");
      require_fraction(c.mock.fail_rate, "mock.fail_rate");
      for (const auto& [id, rate] : c.mock.rates)
        require_fraction(rate, ("mock.rates['" + id + "']").c_str());
    }
    if (j.contains("endpoint")) {
      const auto& e = j.at("endpoint");
      expect_keys(e, {"base_url", "api_key", "model"}, "endpoint");
      if (e.contains("base_url"))
        c.endpoint.base_url = e.at("base_url").get<std::string>();
      if (e.contains("api_key"))
        c.endpoint.api_key = e.at("api_key").get<std::string>();
      if (e.contains("model"))
        c.endpoint.model = e.at("model").get<std::string>();
    }
    if (j.contains("synthesis")) {
      const auto& s = j.at("synthesis");
      expect_keys(s,
                  {"max_in_flight", "seeds_per_prompt", "regeneration_budget",
                   "synthetic_count", "target_total"},
                  "synthesis");
      if (s.contains("max_in_flight"))
        c.synthesis.max_in_flight = s.at("max_in_flight").get<int>();
      if (s.contains("seeds_per_prompt"))
        c.synthesis.seeds_per_prompt = s.at("seeds_per_prompt").get<int>();
      if (s.contains("regeneration_budget"))
        c.synthesis.regeneration_budget =
            s.at("regeneration_budget").get<int>();
      if (s.contains("synthetic_count"))
        c.synthesis.synthetic_count = s.at("synthetic_count").get<int>();
      if (s.contains("target_total"))
        c.synthesis.target_total = s.at("target_total").get<int>();
      if (c.synthesis.max_in_flight < 1)
        throw ValidationError("config: synthesis.max_in_flight must be >= 1");
      if (c.synthesis.seeds_per_prompt < 1)
        throw ValidationError(
            "config: synthesis.seeds_per_prompt must be >= 1");
      if (c.synthesis.regeneration_budget < 0 ||
          c.synthesis.synthetic_count < 0 || c.synthesis.target_total < 0)
        throw ValidationError("config: synthesis counts must be >= 0");
    }
    if (j.contains("training")) {
      const auto& t = j.at("training");
      expect_keys(t, {"alignment_method", "hyperparams"}, "training");
      if (t.contains("alignment_method"))
        c.training.alignment_method =
            method_from_string(t.at("alignment_method").get<std::string>());
      if (t.contains("hyperparams")) {
        for (const auto& [k, v] :
             t.at("hyperparams").get<std::map<std::string, double>>())
          c.training.hyperparams[k] = v;
      }
    }
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      expect_keys(p, {"fleet", "zoo", "dataset"}, "paths");
      if (p.contains("fleet")) c.paths.fleet = p.at("fleet").get<std::string>();
      if (p.contains("zoo")) c.paths.zoo = p.at("zoo").get<std::string>();
      if (p.contains("dataset"))
        c.paths.dataset = p.at("dataset").get<std::string>();
    }
    if (j.contains("overall_weights")) {
      const auto& w = j.at("overall_weights");
      if (!w.is_array() || w.size() != 4)
        throw ValidationError(
            "config: overall_weights must hold exactly four numbers");
      for (std::size_t i = 0; i < 4; ++i)
        c.overall_weights[i] = w.at(i).get<double>();
      for (double v : c.overall_weights) {
        if (!(v >= 0) || !std::isfinite(v))
          throw ValidationError("config: overall_weights must be >= 0");
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(std::string("config: ") + ex.what());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("config: cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("config: '" + path.string() + "': " + ex.what());
  }
  return from_json(j);
}

nlohmann::json PipelineConfig::to_json() const {
  return nlohmann::json{
      {"estimator",
       {{"adapter_factor", estimator.adapter_factor},
        {"utilization", estimator.utilization}}},
      {"mock",
       {{"enabled", mock.enabled},
        {"seed", mock.seed},
        {"default_rate", mock.default_rate},
        {"rates", mock.rates},
        {"verifier_accept_rate", mock.verifier_accept_rate},
        {"fail_rate", mock.fail_rate}}},
      {"endpoint",
       {{"base_url", endpoint.base_url},
        {"api_key", endpoint.api_key},
        {"model", endpoint.model}}},
      {"synthesis",
       {{"max_in_flight", synthesis.max_in_flight},
        {"seeds_per_prompt", synthesis.seeds_per_prompt},
        {"regeneration_budget", synthesis.regeneration_budget},
        {"synthetic_count", synthesis.synthetic_count},
        {"target_total", synthesis.target_total}}},
      {"training",
       {{"alignment_method", to_string(training.alignment_method)},
        {"hyperparams", training.hyperparams}}},
      {"paths",
       {{"fleet", paths.fleet},
        {"zoo", paths.zoo},
        {"dataset", paths.dataset}}},
      {"overall_weights", overall_weights},
  };
}

nlohmann::json env_config_overlay() {
  nlohmann::json endpoint = nlohmann::json::object();
  if (auto v = env_or_empty("TEACHER_ENDPOINT_URL"); !v.empty())
    endpoint["base_url"] = v;
  if (auto v = env_or_empty("TEACHER_API_KEY"); !v.empty())
    endpoint["api_key"] = v;
  if (auto v = env_or_empty("TEACHER_MODEL"); !v.empty())
    endpoint["model"] = v;
  nlohmann::json overlay = nlohmann::json::object();
  if (!endpoint.empty()) overlay["endpoint"] = endpoint;
  return overlay;
}

void merge_config(nlohmann::json& base, const nlohmann::json& overlay) {
  if (overlay.is_null()) return;
  if (!base.is_object() || !overlay.is_object()) {
    base = overlay;
    return;
  }
  base.update(overlay, /*merge_objects=*/true);
}

FleetGenSpec FleetGenSpec::defaults() {
  FleetGenSpec s;
  s.profiles = {
      {"rtx4090", 1, 24, 165, 1008, 0.30, 0.60, 20, 40},
      {"rtx3090", 1, 24, 71, 936, 0.25, 0.50, 25, 45},
      {"rtx6000ada", 1, 48, 182, 960, 0.80, 1.40, 30, 60},
      {"l20", 8, 384, 956, 6912, 5.00, 8.50, 45, 75},
      {"h20", 8, 768, 1184, 32192, 12.00, 17.00, 60, 95},
      {"a100sxm4", 8, 640, 2496, 16312, 14.00, 22.00, 70, 110},
  };
  s.regions = {"he1", "se2", "ne1", "se1", "ne2", "ea1"};
  return s;
}

std::vector<ServerSpec> generate_fleet(const FleetGenSpec& spec) {
  if (spec.count <= 0)
    throw ValidationError("fleet_gen: count must be positive");
  const FleetGenSpec defaults = FleetGenSpec::defaults();
  const auto& profiles = spec.profiles.empty() ? defaults.profiles : spec.profiles;
  const auto& regions = spec.regions.empty() ? defaults.regions : spec.regions;

  Rng rng(spec.seed);
  std::vector<ServerSpec> fleet;
  fleet.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    const GpuProfile& p = profiles[rng.index(profiles.size())];
    ServerSpec s;
    char buf[16];
    std::snprintf(buf, sizeof buf, "srv-%04d", i + 1);
    s.id = buf;
    s.region = regions[rng.index(regions.size())];
    s.gpu_model = p.gpu_model;
    s.gpu_count = p.gpu_count;
    s.vram_gb = p.vram_gb;
    s.fp16_tflops = p.fp16_tflops;
    s.mem_bw_gbps = p.mem_bw_gbps;
    s.hourly_cost_usd = round_cents(rng.uniform(p.cost_lo, p.cost_hi));
    s.rtt_ms = std::round(rng.uniform(p.rtt_lo, p.rtt_hi));
    fleet.push_back(std::move(s));
  }
  return fleet;
}

std::uint64_t dataset_token_estimate(
    std::span<const TrainingExample> dataset) {
  std::uint64_t tokens = 0;
  for (const auto& ex : dataset) {
    std::uint64_t bytes = ex.question.size() + ex.answer.size();
    if (ex.reasoning) bytes += ex.reasoning->size();
    tokens += (bytes + 3) / 4;
  }
  return tokens;
}

TeacherClientFactory make_teacher_factory(
    const PipelineConfig& config, std::span<const ModelSpec> zoo,
    const std::string& task_id, std::span<const TrainingExample> dataset) {
  if (config.mock.enabled) {
    MockConfig mock = config.mock;
    std::vector<ModelSpec> zoo_copy(zoo.begin(), zoo.end());
    std::string task = task_id;
    auto key = answer_key_from(dataset);
    return [mock, zoo_copy, task,
            key](const std::string& model_id) -> std::shared_ptr<TeacherClient> {
      MockBehavior b;
      b.seed = mock.seed;
      b.correct_rate = mock_rate_for(mock, zoo_copy, task, model_id);
      b.accept_rate = 1.0;
      b.fail_rate = mock.fail_rate;
      b.answer_key = key;
      return std::make_shared<MockTeacherClient>(std::move(b));
    };
  }

  EndpointConfig ep = config.endpoint;
  if (ep.base_url.empty())
    throw ValidationError(
        "endpoint: base_url is required when the mock is disabled (set "
        "TEACHER_ENDPOINT_URL or endpoint.base_url)");
  return [ep](const std::string& model_id) -> std::shared_ptr<TeacherClient> {
    HttpTeacherConfig c;
    c.base_url = ep.base_url;
    c.api_key = ep.api_key;
    c.model = ep.model.empty() ? model_id : ep.model;
    return std::make_shared<HttpTeacherClient>(c);
  };
}

TeacherClientFactory make_verifier_factory(const PipelineConfig& config) {
  if (config.mock.enabled) {
    MockConfig mock = config.mock;
    return [mock](const std::string&) -> std::shared_ptr<TeacherClient> {
      MockBehavior b;
      b.seed = mock.seed + 1;
      b.correct_rate = 1.0;
      b.accept_rate = mock.verifier_accept_rate;
      b.fail_rate = mock.fail_rate;
      return std::make_shared<MockTeacherClient>(std::move(b));
    };
  }

  EndpointConfig ep = config.endpoint;
  if (ep.base_url.empty())
    throw ValidationError(
        "endpoint: base_url is required when the mock is disabled (set "
        "TEACHER_ENDPOINT_URL or endpoint.base_url)");
  return [ep](const std::string& model_id) -> std::shared_ptr<TeacherClient> {
    HttpTeacherConfig c;
    c.base_url = ep.base_url;
    c.api_key = ep.api_key;
    c.model = ep.model.empty() ? model_id : ep.model;
    return std::make_shared<HttpTeacherClient>(c);
  };
}

namespace {

std::vector<AuditEntry> build_server_audit(std::span<const ServerSpec> fleet,
                                           const PlanRequest& request,
                                           const PfgResult& pfg) {
  std::vector<ServerSpec> pool;
  for (const auto& s : fleet) {
    if (feasible(s, request.hardware_floor)) pool.push_back(s);
  }
  const HardwareBounds hw = HardwareBounds::from_fleet(pool);
  std::vector<ObjectiveVector> objectives;
  objectives.reserve(pool.size());
  for (const auto& s : pool) objectives.push_back(objective_vector(s, hw));
  const ObjectiveBounds bounds = objective_bounds(objectives);
  std::vector<GridCoord> coords;
  coords.reserve(pool.size());
  for (const auto& v : objectives)
    coords.push_back(grid_coord(v, bounds, pfg.grid_intervals));

  int lowest_cost_coord = 0;
  double chosen_dist = 0;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pool[i].id == pfg.chosen.id) {
      lowest_cost_coord = coords[i].coords[1];
      chosen_dist = ideal_distance(objectives[i], bounds);
    }
  }

  std::vector<AuditEntry> audit;
  for (const auto& s : fleet) {
    AuditEntry e;
    e.stage = AuditStage::server;
    e.candidate_id = s.id;
    e.metrics["hourly_cost_usd"] = s.hourly_cost_usd;
    e.metrics["rtt_ms"] = s.rtt_ms;
    if (!feasible(s, request.hardware_floor)) {
      e.rejected_reason = "below_hardware_floor";
      audit.push_back(std::move(e));
      continue;
    }
    std::size_t i = 0;
    while (pool[i].id != s.id) ++i;
    const double dist = ideal_distance(objectives[i], bounds);
    e.metrics["hardware_score"] = hardware_score(s, hw);
    e.metrics["ideal_distance"] = dist;
    if (s.id == pfg.chosen.id) {
      e.selected = true;
    } else if (!pfg.pfg_members.count(s.id)) {
      e.rejected_reason = "outside_pareto_front_grid";
    } else if (coords[i].coords[1] != lowest_cost_coord) {
      e.rejected_reason = "not_lowest_cost_cell";
    } else if (dist != chosen_dist) {
      e.rejected_reason = "farther_from_ideal";
    } else {
      e.rejected_reason = "tie_broken_by_id";
    }
    audit.push_back(std::move(e));
  }
  return audit;
}

std::vector<AuditEntry> build_teacher_audit(
    std::span<const ModelSpec> teachers, const std::string& task_id,
    double accuracy_threshold, const ModelSpec& winner) {
  const EvalRecord* wr = winner.find_eval(task_id, false);
  bool any_qualifies = false;
  for (const auto& t : teachers) {
    if (const EvalRecord* r = t.find_eval(task_id, false);
        r && r->accuracy >= accuracy_threshold)
      any_qualifies = true;
  }

  std::vector<AuditEntry> audit;
  for (const auto& t : teachers) {
    const EvalRecord* r = t.find_eval(task_id, false);
    AuditEntry e;
    e.stage = AuditStage::teacher;
    e.candidate_id = t.id;
    e.metrics["accuracy"] = r ? r->accuracy : 0;
    if (t.api_cost_per_mtok_usd)
      e.metrics["api_cost_per_mtok_usd"] = *t.api_cost_per_mtok_usd;
    if (t.id == winner.id) {
      e.selected = true;
    } else if (any_qualifies && r && r->accuracy < accuracy_threshold) {
      e.rejected_reason = "below_accuracy_threshold";
    } else if (!any_qualifies && r && wr && r->accuracy < wr->accuracy) {
      e.rejected_reason = "lower_accuracy";
    } else if (t.api_cost_per_mtok_usd && winner.api_cost_per_mtok_usd &&
               *t.api_cost_per_mtok_usd > *winner.api_cost_per_mtok_usd) {
      e.rejected_reason = "higher_api_cost";
    } else {
      e.rejected_reason = "tie_broken_by_id";
    }
    audit.push_back(std::move(e));
  }
  return audit;
}

std::vector<AuditEntry> build_student_audit(
    const std::vector<CandidateScore>& scores, const std::string& winner_id) {
  std::vector<AuditEntry> audit;
  for (const auto& c : scores) {
    AuditEntry e;
    e.stage = AuditStage::student;
    e.candidate_id = c.model_id;
    e.metrics["accuracy"] = c.accuracy;
    e.metrics["train_time_h"] = c.train_time_h;
    e.metrics["tokens_per_s"] = c.tps;
    if (c.score) e.metrics["score"] = *c.score;
    if (c.rejected_reason) {
      e.rejected_reason = to_string(*c.rejected_reason);
    } else if (c.model_id == winner_id) {
      e.selected = true;
    }
    audit.push_back(std::move(e));
  }
  return audit;
}

}  // namespace

DeploymentPlan plan(const PlanInputs& inputs, const PipelineConfig& config) {
  return plan(inputs, config,
              make_teacher_factory(config, inputs.zoo, inputs.request.task_id,
                                   inputs.dataset));
}

DeploymentPlan plan(const PlanInputs& inputs, const PipelineConfig& config,
                    const TeacherClientFactory& teacher_factory) {
  validate_request(inputs.request);
  if (inputs.fleet.empty()) throw ValidationError("plan: fleet is empty");
  if (inputs.zoo.empty()) throw ValidationError("plan: model zoo is empty");
  if (inputs.dataset.empty()) throw ValidationError("plan: dataset is empty");
  for (const auto& s : inputs.fleet)
    validate_server(s, "fleet record '" + s.id + "'");
  for (const auto& m : inputs.zoo)
    validate_model(m, "zoo record '" + m.id + "'");

  std::vector<ModelSpec> teachers;
  std::vector<ModelSpec> students;
  for (const auto& m : inputs.zoo) {
    (m.role == ModelRole::teacher ? teachers : students).push_back(m);
  }
  if (teachers.empty())
    throw ValidationError("plan: the zoo holds no teacher models");
  if (students.empty())
    throw ValidationError("plan: the zoo holds no student models");

  const PlanRequest& request = inputs.request;
  const PfgResult pfg = select_server(inputs.fleet, request);
  const ModelSpec teacher =
      select_teacher(teachers, request.task_id, request.accuracy_threshold);

  const std::size_t want = std::min<std::size_t>(
      static_cast<std::size_t>(request.sample_size), inputs.dataset.size());
  const auto picks = Rng(request.seed).sample_indices(inputs.dataset.size(), want);
  std::vector<TrainingExample> sample;
  sample.reserve(picks.size());
  for (auto i : picks) sample.push_back(inputs.dataset[i]);

  auto client = teacher_factory(teacher.id);
  ProbeOptions probe_options;
  probe_options.max_in_flight = config.synthesis.max_in_flight;
  const EvalOutcome probe = probe_accuracy(*client, teacher.id,
                                           request.task_id, sample,
                                           probe_options);

  const StrategyDecision decision = decide_strategy(probe.accuracy, request);

  const std::uint64_t dataset_tokens = dataset_token_estimate(inputs.dataset);
  auto [student, student_scores] =
      select_student(students, request.task_id, pfg.chosen, request,
                     dataset_tokens, config.estimator);

  const ResourceEstimate est =
      estimate_pair(student, pfg.chosen, dataset_tokens, config.estimator);

  DeploymentPlan p;
  p.task_id = request.task_id;
  p.server = pfg.chosen;
  p.teacher = teacher;
  p.student = student;
  p.strategy = decision.strategy;
  p.decision = decision;
  p.estimates.train_time_h = est.train_time_h;
  p.estimates.tokens_per_s = est.tokens_per_s;
  p.estimates.train_cost_usd = est.train_cost_usd;
  p.estimates.hourly_cost_usd = pfg.chosen.hourly_cost_usd;
  p.estimates.rtt_ms = pfg.chosen.rtt_ms;
  p.pfg = pfg;

  auto audit = build_server_audit(inputs.fleet, request, pfg);
  auto teacher_audit = build_teacher_audit(teachers, request.task_id,
                                           request.accuracy_threshold, teacher);
  auto student_audit = build_student_audit(student_scores, student.id);
  audit.insert(audit.end(), teacher_audit.begin(), teacher_audit.end());
  audit.insert(audit.end(), student_audit.begin(), student_audit.end());
  p.audit = std::move(audit);
  p.request = request;
  return p;
}

StrategyRunResult run_plan_synthesis(const DeploymentPlan& plan,
                                     std::span<const TrainingExample> dataset,
                                     const PipelineConfig& config,
                                     const std::filesystem::path& out_dir) {
  StrategyRunContext ctx;
  ctx.strategy = plan.strategy;
  ctx.task_id = plan.task_id;
  ctx.student_id = plan.student.id;
  ctx.server_id = plan.server.id;
  ctx.synthetic_count = config.synthesis.synthetic_count;
  ctx.target_total = config.synthesis.target_total;
  ctx.alignment_method = config.training.alignment_method;
  ctx.hyperparams = config.training.hyperparams;
  ctx.out_dir = out_dir;
  ctx.options.max_in_flight = config.synthesis.max_in_flight;
  ctx.options.seed = plan.request.seed;
  ctx.options.seeds_per_prompt = config.synthesis.seeds_per_prompt;
  ctx.options.regeneration_budget = config.synthesis.regeneration_budget;

  const std::vector<ModelSpec> zoo{plan.teacher};
  auto teacher_factory =
      make_teacher_factory(config, zoo, plan.task_id, dataset);
  auto teacher = teacher_factory(plan.teacher.id);
  auto verifier = make_verifier_factory(config)(plan.teacher.id);
  return run_strategy(ctx, dataset, *teacher, *verifier);
}

}  // namespace distill
