#include "distillplan/catalog.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "distillplan/errors.hpp"

namespace distill {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_document(const std::string& text, const std::string& where) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(where + ": malformed JSON");
  return j;
}

const json& require_field(const json& j, const char* key,
                          const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

double require_number(const json& j, const char* key,
                      const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_number())
    throw ValidationError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::string require_string(const json& j, const char* key,
                           const std::string& where) {
  const json& v = require_field(j, key, where);
  if (!v.is_string())
    throw ValidationError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

void check_finite(double v, const char* key, const std::string& where) {
  if (!std::isfinite(v))
    throw ValidationError(where + ": field '" + key + "' must be finite");
}

void check_positive(double v, const char* key, const std::string& where) {
  check_finite(v, key, where);
  if (v <= 0)
    throw ValidationError(where + ": field '" + key + "' must be > 0");
}

void check_non_negative(double v, const char* key, const std::string& where) {
  check_finite(v, key, where);
  if (v < 0)
    throw ValidationError(where + ": field '" + key + "' must be >= 0");
}

}  // namespace

const char* to_string(ModelRole role) {
  return role == ModelRole::teacher ? "teacher" : "student";
}

const char* to_string(Origin origin) {
  return origin == Origin::real ? "real" : "synthetic";
}

// ---------------------------------------------------------------- servers

json to_json(const ServerSpec& s) {
  return json{{"id", s.id},
              {"region", s.region},
              {"gpu_model", s.gpu_model},
              {"gpu_count", s.gpu_count},
              {"vram_gb", s.vram_gb},
              {"fp16_tflops", s.fp16_tflops},
              {"mem_bw_gbps", s.mem_bw_gbps},
              {"hourly_cost_usd", s.hourly_cost_usd},
              {"rtt_ms", s.rtt_ms}};
}

ServerSpec server_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": record must be an object");
  ServerSpec s;
  s.id = require_string(j, "id", where);
  const std::string here = "fleet record '" + s.id + "'";
  s.region = require_string(j, "region", here);
  s.gpu_model = require_string(j, "gpu_model", here);
  s.gpu_count = static_cast<int>(require_number(j, "gpu_count", here));
  s.vram_gb = require_number(j, "vram_gb", here);
  s.fp16_tflops = require_number(j, "fp16_tflops", here);
  s.mem_bw_gbps = require_number(j, "mem_bw_gbps", here);
  s.hourly_cost_usd = require_number(j, "hourly_cost_usd", here);
  s.rtt_ms = require_number(j, "rtt_ms", here);
  validate_server(s, here);
  return s;
}

void validate_server(const ServerSpec& s, const std::string& where) {
  if (s.id.empty()) throw ValidationError(where + ": empty id");
  if (s.gpu_count <= 0)
    throw ValidationError(where + ": field 'gpu_count' must be > 0");
  check_positive(s.vram_gb, "vram_gb", where);
  check_positive(s.fp16_tflops, "fp16_tflops", where);
  check_positive(s.mem_bw_gbps, "mem_bw_gbps", where);
  check_non_negative(s.hourly_cost_usd, "hourly_cost_usd", where);
  check_non_negative(s.rtt_ms, "rtt_ms", where);
}

std::vector<ServerSpec> load_fleet(const std::filesystem::path& path) {
  json doc = parse_document(read_file(path), "fleet file " + path.string());
  if (!doc.is_array())
    throw ValidationError("fleet file " + path.string() +
                          ": top level must be an array");
  std::vector<ServerSpec> fleet;
  std::set<std::string> seen;
  fleet.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    ServerSpec s =
        server_from_json(doc[i], "fleet record #" + std::to_string(i + 1));
    if (!seen.insert(s.id).second)
      throw ValidationError("fleet record '" + s.id + "': duplicate id");
    fleet.push_back(std::move(s));
  }
  return fleet;
}

void save_fleet(const std::filesystem::path& path,
                const std::vector<ServerSpec>& fleet) {
  json doc = json::array();
  for (const auto& s : fleet) doc.push_back(to_json(s));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

// ----------------------------------------------------------------- models

json to_json(const EvalRecord& r) {
  return json{{"task_id", r.task_id},
              {"accuracy", r.accuracy},
              {"sample_count", r.sample_count},
              {"with_teacher_cot", r.with_teacher_cot}};
}

json to_json(const ModelSpec& m) {
  json j{{"id", m.id},
         {"role", to_string(m.role)},
         {"params_b", m.params_b},
         {"bytes_per_param", m.bytes_per_param}};
  if (m.min_vram_gb) j["min_vram_gb"] = *m.min_vram_gb;
  if (m.api_cost_per_mtok_usd)
    j["api_cost_per_mtok_usd"] = *m.api_cost_per_mtok_usd;
  json records = json::array();
  for (const auto& r : m.eval_records) records.push_back(to_json(r));
  j["eval_records"] = std::move(records);
  return j;
}

ModelSpec model_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": record must be an object");
  ModelSpec m;
  m.id = require_string(j, "id", where);
  const std::string here = "zoo record '" + m.id + "'";
  const std::string role = require_string(j, "role", here);
  if (role == "teacher") {
    m.role = ModelRole::teacher;
  } else if (role == "student") {
    m.role = ModelRole::student;
  } else {
    throw ValidationError(here + ": unknown role '" + role + "'");
  }
  m.params_b = require_number(j, "params_b", here);
  if (j.contains("min_vram_gb"))
    m.min_vram_gb = require_number(j, "min_vram_gb", here);
  if (j.contains("api_cost_per_mtok_usd"))
    m.api_cost_per_mtok_usd = require_number(j, "api_cost_per_mtok_usd", here);
  if (j.contains("bytes_per_param"))
    m.bytes_per_param = require_number(j, "bytes_per_param", here);
  if (j.contains("eval_records")) {
    const json& records = j["eval_records"];
    if (!records.is_array())
      throw ValidationError(here + ": field 'eval_records' must be an array");
    for (std::size_t i = 0; i < records.size(); ++i) {
      const json& rj = records[i];
      const std::string rwhere =
          here + " eval_records[" + std::to_string(i) + "]";
      EvalRecord r;
      r.task_id = require_string(rj, "task_id", rwhere);
      r.accuracy = require_number(rj, "accuracy", rwhere);
      r.sample_count = static_cast<int>(require_number(rj, "sample_count", rwhere));
      const json& cot = require_field(rj, "with_teacher_cot", rwhere);
      if (!cot.is_boolean())
        throw ValidationError(rwhere +
                              ": field 'with_teacher_cot' must be a boolean");
      r.with_teacher_cot = cot.get<bool>();
      if (r.accuracy < 0 || r.accuracy > 1)
        throw ValidationError(rwhere + ": accuracy must be within [0, 1]");
      if (r.sample_count <= 0)
        throw ValidationError(rwhere + ": sample_count must be > 0");
      m.eval_records.push_back(std::move(r));
    }
  }
  validate_model(m, here);
  return m;
}

void validate_model(const ModelSpec& m, const std::string& where) {
  if (m.id.empty()) throw ValidationError(where + ": empty id");
  check_positive(m.params_b, "params_b", where);
  check_positive(m.bytes_per_param, "bytes_per_param", where);
  if (m.role == ModelRole::teacher) {
    if (!m.api_cost_per_mtok_usd)
      throw ValidationError(where +
                            ": teacher requires 'api_cost_per_mtok_usd'");
    check_non_negative(*m.api_cost_per_mtok_usd, "api_cost_per_mtok_usd",
                       where);
  } else {
    if (!m.min_vram_gb)
      throw ValidationError(where + ": student requires 'min_vram_gb'");
    check_positive(*m.min_vram_gb, "min_vram_gb", where);
  }
}

std::vector<ModelSpec> load_model_zoo(const std::filesystem::path& path) {
  json doc = parse_document(read_file(path), "zoo file " + path.string());
  if (!doc.is_array())
    throw ValidationError("zoo file " + path.string() +
                          ": top level must be an array");
  std::vector<ModelSpec> zoo;
  std::set<std::string> seen;
  zoo.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    ModelSpec m =
        model_from_json(doc[i], "zoo record #" + std::to_string(i + 1));
    if (!seen.insert(m.id).second)
      throw ValidationError("zoo record '" + m.id + "': duplicate id");
    zoo.push_back(std::move(m));
  }
  return zoo;
}

void save_model_zoo(const std::filesystem::path& path,
                    const std::vector<ModelSpec>& zoo) {
  json doc = json::array();
  for (const auto& m : zoo) doc.push_back(to_json(m));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

// ---------------------------------------------------------------- dataset

json to_json(const TrainingExample& e) {
  json j{{"id", e.id},
         {"question", e.question},
         {"answer", e.answer},
         {"origin", to_string(e.origin)},
         {"verified", e.verified}};
  if (e.reasoning) j["reasoning"] = *e.reasoning;
  return j;
}

TrainingExample example_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ValidationError(where + ": record must be an object");
  TrainingExample e;
  e.id = require_string(j, "id", where);
  e.question = require_string(j, "question", where);
  e.answer = require_string(j, "answer", where);
  if (j.contains("reasoning")) {
    const json& r = j["reasoning"];
    if (r.is_string()) {
      e.reasoning = r.get<std::string>();
    } else if (!r.is_null()) {
      throw ValidationError(where + ": field 'reasoning' must be a string");
    }
  }
  const std::string origin = require_string(j, "origin", where);
  if (origin == "real") {
    e.origin = Origin::real;
  } else if (origin == "synthetic") {
    e.origin = Origin::synthetic;
  } else {
    throw ValidationError(where + ": unknown origin '" + origin + "'");
  }
  const json& v = require_field(j, "verified", where);
  if (!v.is_boolean())
    throw ValidationError(where + ": field 'verified' must be a boolean");
  e.verified = v.get<bool>();
  validate_example(e, where);
  return e;
}

void validate_example(const TrainingExample& e, const std::string& where) {
  if (e.id.empty()) throw ValidationError(where + ": empty id");
  if (e.question.empty()) throw ValidationError(where + ": empty question");
  if (e.answer.empty()) throw ValidationError(where + ": empty answer");
  if (e.origin == Origin::synthetic &&
      (!e.reasoning || e.reasoning->empty()))
    throw ValidationError(where + ": synthetic example '" + e.id +
                          "' missing reasoning");
}

std::vector<TrainingExample> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::vector<TrainingExample> examples;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = "dataset line " + std::to_string(lineno);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError(where + ": malformed JSON");
    TrainingExample e = example_from_json(j, where);
    if (!seen.insert(e.id).second)
      throw ValidationError(where + ": duplicate id '" + e.id + "'");
    examples.push_back(std::move(e));
  }
  return examples;
}

void save_dataset(const std::filesystem::path& path,
                  const std::vector<TrainingExample>& examples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write " + path.string());
  for (const auto& e : examples) out << to_json(e).dump() << '\n';
}

// ---------------------------------------------------------------- request

json to_json(const HardwareFloor& f) {
  return json{{"gpu_count", f.gpu_count},
              {"vram_gb", f.vram_gb},
              {"fp16_tflops", f.fp16_tflops},
              {"mem_bw_gbps", f.mem_bw_gbps}};
}

json to_json(const PlanRequest& r) {
  json j{{"task_id", r.task_id},
         {"accuracy_threshold", r.accuracy_threshold},
         {"tps_floor", r.tps_floor},
         {"train_time_cap_h", r.train_time_cap_h},
         {"weight_accuracy", r.weight_accuracy},
         {"weight_train_time", r.weight_train_time},
         {"weight_tps", r.weight_tps},
         {"cost_window_usd", r.cost_window_usd},
         {"sample_size", r.sample_size},
         {"seed", r.seed}};
  if (r.hardware_floor) j["hardware_floor"] = to_json(*r.hardware_floor);
  if (r.alignment_threshold) j["alignment_threshold"] = *r.alignment_threshold;
  return j;
}

PlanRequest request_from_json(const json& j) {
  const std::string where = "plan request";
  if (!j.is_object()) throw ValidationError(where + ": must be an object");
  PlanRequest r;
  r.task_id = require_string(j, "task_id", where);
  r.accuracy_threshold = require_number(j, "accuracy_threshold", where);
  r.tps_floor = require_number(j, "tps_floor", where);
  r.train_time_cap_h = require_number(j, "train_time_cap_h", where);
  if (j.contains("weight_accuracy"))
    r.weight_accuracy = require_number(j, "weight_accuracy", where);
  if (j.contains("weight_train_time"))
    r.weight_train_time = require_number(j, "weight_train_time", where);
  if (j.contains("weight_tps"))
    r.weight_tps = require_number(j, "weight_tps", where);
  r.cost_window_usd = require_number(j, "cost_window_usd", where);
  if (j.contains("hardware_floor")) {
    const json& f = j["hardware_floor"];
    if (!f.is_object())
      throw ValidationError(where + ": field 'hardware_floor' must be an object");
    HardwareFloor floor;
    if (f.contains("gpu_count"))
      floor.gpu_count = static_cast<int>(require_number(f, "gpu_count", where));
    if (f.contains("vram_gb"))
      floor.vram_gb = require_number(f, "vram_gb", where);
    if (f.contains("fp16_tflops"))
      floor.fp16_tflops = require_number(f, "fp16_tflops", where);
    if (f.contains("mem_bw_gbps"))
      floor.mem_bw_gbps = require_number(f, "mem_bw_gbps", where);
    r.hardware_floor = floor;
  }
  if (j.contains("sample_size"))
    r.sample_size = static_cast<int>(require_number(j, "sample_size", where));
  if (j.contains("alignment_threshold"))
    r.alignment_threshold = require_number(j, "alignment_threshold", where);
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_integer() && !s.is_number_unsigned())
      throw ValidationError(where + ": field 'seed' must be an integer");
    r.seed = s.get<std::uint64_t>();
  }
  validate_request(r);
  return r;
}

void validate_request(const PlanRequest& r) {
  const std::string where = "plan request";
  if (r.task_id.empty()) throw ValidationError(where + ": empty task_id");
  if (r.accuracy_threshold < 0 || r.accuracy_threshold > 1)
    throw ValidationError(where +
                          ": accuracy_threshold must be within [0, 1]");
  check_positive(r.tps_floor, "tps_floor", where);
  check_positive(r.train_time_cap_h, "train_time_cap_h", where);
  check_non_negative(r.weight_accuracy, "weight_accuracy", where);
  check_non_negative(r.weight_train_time, "weight_train_time", where);
  check_non_negative(r.weight_tps, "weight_tps", where);
  if (r.weight_accuracy + r.weight_train_time + r.weight_tps <= 0)
    throw ValidationError(where + ": score weights must not all be zero");
  check_positive(r.cost_window_usd, "cost_window_usd", where);
  if (r.sample_size <= 0)
    throw ValidationError(where + ": sample_size must be > 0");
  if (r.alignment_threshold &&
      (*r.alignment_threshold < 0 || *r.alignment_threshold > 1))
    throw ValidationError(where +
                          ": alignment_threshold must be within [0, 1]");
}

PlanRequest load_plan_request(const std::filesystem::path& path) {
  json doc =
      parse_document(read_file(path), "request file " + path.string());
  return request_from_json(doc);
}

}  // namespace distill
