#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "distillplan/canonical.hpp"
#include "distillplan/catalog.hpp"
#include "distillplan/errors.hpp"
#include "distillplan/evaluator.hpp"
#include "distillplan/pipeline.hpp"
#include "distillplan/plan.hpp"
#include "distillplan/rng.hpp"
#include "distillplan/service.hpp"

namespace {

using distill::merge_config;
using distill::PipelineConfig;

// defaults < environment < flags < config file
PipelineConfig resolve_config(const std::optional<std::string>& config_path,
                              const nlohmann::json& flag_overlay) {
  nlohmann::json overlay = distill::env_config_overlay();
  merge_config(overlay, flag_overlay);
  if (config_path) {
    std::ifstream in(*config_path, std::ios::binary);
    if (!in)
      throw distill::ParseError("config: cannot open '" + *config_path + "'");
    nlohmann::json file = nlohmann::json::parse(in, nullptr, false);
    if (file.is_discarded())
      throw distill::ParseError("config: '" + *config_path +
                                "': malformed JSON");
    merge_config(overlay, file);
  }
  return PipelineConfig::from_json(overlay);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw distill::ParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw distill::ParseError("cannot write " + path);
  out << content;
}

int run_plan(const std::string& fleet, const std::string& zoo,
             const std::string& dataset, const std::string& request,
             const std::string& out,
             const std::optional<std::string>& config_path) {
  const PipelineConfig config = resolve_config(config_path, {});
  distill::PlanInputs inputs;
  inputs.fleet = distill::load_fleet(fleet);
  inputs.zoo = distill::load_model_zoo(zoo);
  inputs.dataset = distill::load_dataset(dataset);
  inputs.request = distill::load_plan_request(request);

  const distill::DeploymentPlan plan = distill::plan(inputs, config);
  write_file(out, distill::plan_document_json(plan));
  std::cout << "plan: server=" << plan.server.id
            << " teacher=" << plan.teacher.id
            << " student=" << plan.student.id
            << " strategy=" << distill::to_string(plan.strategy) << "\n"
            << "wrote " << out << "\n";
  return 0;
}

int run_synth(const std::string& plan_path, const std::string& dataset_path,
              const std::string& out_dir,
              const std::optional<std::uint64_t>& mock_seed,
              const std::optional<std::string>& config_path) {
  nlohmann::json flag_overlay = nlohmann::json::object();
  if (mock_seed) flag_overlay["mock"] = {{"seed", *mock_seed}};
  const PipelineConfig config = resolve_config(config_path, flag_overlay);

  nlohmann::json doc = nlohmann::json::parse(read_file(plan_path), nullptr, false);
  if (doc.is_discarded())
    throw distill::ParseError("plan file " + plan_path + ": malformed JSON");
  const distill::DeploymentPlan plan = distill::plan_from_json(doc);
  const auto dataset = distill::load_dataset(dataset_path);

  const distill::StrategyRunResult result =
      distill::run_plan_synthesis(plan, dataset, config, out_dir);
  std::cout << "synthesis: strategy=" << distill::to_string(plan.strategy)
            << " requested=" << result.report.requested
            << " generated=" << result.report.generated
            << " accepted=" << result.report.verified_accepted
            << " rejected=" << result.report.verifier_rejected << "\n"
            << "wrote " << result.dataset_path.string() << "\n";
  return 0;
}

int run_eval(const std::string& model, const std::string& dataset_path,
             int sample, const std::string& task, std::uint64_t seed,
             const std::optional<std::string>& config_path) {
  const PipelineConfig config = resolve_config(config_path, {});
  const auto dataset = distill::load_dataset(dataset_path);
  if (dataset.empty())
    throw distill::ValidationError("eval: dataset is empty");

  const std::size_t want =
      std::min<std::size_t>(static_cast<std::size_t>(sample), dataset.size());
  const auto picks = distill::Rng(seed).sample_indices(dataset.size(), want);
  std::vector<distill::TrainingExample> samples;
  samples.reserve(picks.size());
  for (auto i : picks) samples.push_back(dataset[i]);

  auto factory = distill::make_teacher_factory(config, {}, task, dataset);
  auto client = factory(model);
  distill::ProbeOptions options;
  options.max_in_flight = config.synthesis.max_in_flight;
  const distill::EvalOutcome outcome =
      distill::probe_accuracy(*client, model, task, samples, options);

  const nlohmann::json j{{"task_id", outcome.task_id},
                         {"model_id", outcome.model_id},
                         {"n", outcome.n},
                         {"correct", outcome.correct},
                         {"accuracy", distill::canonical_round(outcome.accuracy)}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int run_simulate_fleet(int n, std::uint64_t seed, const std::string& out) {
  distill::FleetGenSpec spec = distill::FleetGenSpec::defaults();
  spec.count = n;
  spec.seed = seed;
  const auto fleet = distill::generate_fleet(spec);
  distill::save_fleet(out, fleet);
  std::cout << "wrote " << fleet.size() << " servers to " << out << "\n";
  return 0;
}

int run_serve(const std::string& config_path, const std::string& addr) {
  const PipelineConfig config = PipelineConfig::load(config_path);
  if (config.paths.fleet.empty() || config.paths.zoo.empty() ||
      config.paths.dataset.empty())
    throw distill::ValidationError(
        "config: serve requires paths.fleet, paths.zoo, and paths.dataset");

  const std::size_t colon = addr.rfind(':');
  if (colon == std::string::npos)
    throw distill::ValidationError("serve: --addr must look like HOST:PORT");
  const std::string host = addr.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(addr.substr(colon + 1));
  } catch (const std::exception&) {
    throw distill::ValidationError("serve: invalid port in --addr");
  }

  distill::ServicePaths paths;
  paths.fleet = config.paths.fleet;
  paths.zoo = config.paths.zoo;
  paths.dataset = config.paths.dataset;
  paths.config = config_path;

  distill::PlanningService service(paths);
  const int bound = service.start(host, port);
  std::cout << "listening on " << host << ":" << bound << "\n";
  service.wait();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM distillation deployment planner"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  std::optional<std::string> config_path;

  auto* plan_cmd = app.add_subcommand("plan", "Compute a deployment plan");
  std::string fleet, zoo, dataset, request, out;
  plan_cmd->add_option("--fleet", fleet, "Fleet JSON file")->required();
  plan_cmd->add_option("--zoo", zoo, "Model zoo JSON file")->required();
  plan_cmd->add_option("--dataset", dataset, "Task dataset JSONL file")
      ->required();
  plan_cmd->add_option("--request", request, "Plan request JSON file")
      ->required();
  plan_cmd->add_option("--out", out, "Output path for the plan document")
      ->required();
  plan_cmd->add_option("--config", config_path, "Pipeline config JSON file");

  auto* synth_cmd =
      app.add_subcommand("synth", "Run the plan's data synthesis stage");
  std::string plan_path, synth_dataset, synth_out;
  std::optional<std::uint64_t> mock_seed;
  synth_cmd->add_option("--plan", plan_path, "Plan document")->required();
  synth_cmd->add_option("--dataset", synth_dataset, "Task dataset JSONL file")
      ->required();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--mock-seed", mock_seed, "Override the mock seed");
  synth_cmd->add_option("--config", config_path, "Pipeline config JSON file");

  auto* eval_cmd =
      app.add_subcommand("eval", "Probe a model's accuracy on a dataset");
  std::string eval_model, eval_dataset, eval_task;
  int eval_sample = 32;
  std::uint64_t eval_seed = 0;
  eval_cmd->add_option("--model", eval_model, "Model id")->required();
  eval_cmd->add_option("--dataset", eval_dataset, "Task dataset JSONL file")
      ->required();
  eval_cmd->add_option("--sample", eval_sample, "Sample size")->required();
  eval_cmd->add_option("--task", eval_task, "Task id for rate lookup");
  eval_cmd->add_option("--seed", eval_seed, "Sampling seed");
  eval_cmd->add_option("--config", config_path, "Pipeline config JSON file");

  auto* sim_cmd =
      app.add_subcommand("simulate-fleet", "Generate a synthetic fleet file");
  int sim_n = 20;
  std::uint64_t sim_seed = 0;
  std::string sim_out;
  sim_cmd->add_option("--n", sim_n, "Number of servers")->required();
  sim_cmd->add_option("--seed", sim_seed, "Generator seed")->required();
  sim_cmd->add_option("--out", sim_out, "Output fleet JSON file")->required();

  auto* serve_cmd = app.add_subcommand("serve", "Run the planning service");
  std::string serve_config, serve_addr = "127.0.0.1:8080";
  serve_cmd->add_option("--config", serve_config, "Pipeline config JSON file")
      ->required();
  serve_cmd->add_option("--addr", serve_addr, "HOST:PORT to bind");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed())
      return run_plan(fleet, zoo, dataset, request, out, config_path);
    if (synth_cmd->parsed())
      return run_synth(plan_path, synth_dataset, synth_out, mock_seed,
                       config_path);
    if (eval_cmd->parsed())
      return run_eval(eval_model, eval_dataset, eval_sample, eval_task,
                      eval_seed, config_path);
    if (sim_cmd->parsed()) return run_simulate_fleet(sim_n, sim_seed, sim_out);
    if (serve_cmd->parsed()) return run_serve(serve_config, serve_addr);
  } catch (const distill::InfeasibleError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const distill::ParseError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const distill::ValidationError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  } catch (const distill::TransportError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
