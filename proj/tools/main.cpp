#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ssdp/baselines.hpp"
#include "ssdp/harness.hpp"
#include "ssdp/synthetic.hpp"

using namespace ssdp;

namespace {

int g_exit = 0;

// Hyperparameter flags shared by the run/experiment/sweep subcommands. Each
// flag writes into `config`; apply() copies only the flags the user actually
// passed onto a target config (so spec-file values survive untouched).
struct ConfigFlags {
  CLI::App* cmd = nullptr;
  Config values;
  std::string merge_mode;
  std::string clock_mode;

  void attach(CLI::App* owner) {
    cmd = owner;
    cmd->add_option("--tau", values.tau, "sibling merge similarity threshold");
    cmd->add_option("--b", values.b, "candidates per expansion");
    cmd->add_option("--k", values.k, "parallel selections per round");
    cmd->add_option("--w", values.w, "UCB exploration weight");
    cmd->add_option("--p", values.p, "fraction of selection slots that exploit");
    cmd->add_option("--lambda-es", values.lambda_es,
                    "early-stop reward multiplier");
    cmd->add_option("--lambda-ds", values.lambda_ds,
                    "deep-seek reward multiplier");
    cmd->add_option("--t-star", values.t_star,
                    "solutions before quality gating");
    cmd->add_option("--t-max", values.t_max_s, "time budget in seconds");
    cmd->add_option("--r-max", values.r_max, "rollout budget");
    cmd->add_option("--max-depth", values.max_depth, "tree depth cap");
    cmd->add_option("--seed", values.seed, "engine RNG seed");
    cmd->add_option("--merge-mode", merge_mode, "merge representative policy")
        ->check(CLI::IsMember({"best_score", "centroid", "disabled"}));
    cmd->add_option("--clock", clock_mode, "timing source")
        ->check(CLI::IsMember({"simulated", "real"}));
  }

  void apply(Config& target) const {
    if (cmd->count("--tau")) target.tau = values.tau;
    if (cmd->count("--b")) target.b = values.b;
    if (cmd->count("--k")) target.k = values.k;
    if (cmd->count("--w")) target.w = values.w;
    if (cmd->count("--p")) target.p = values.p;
    if (cmd->count("--lambda-es")) target.lambda_es = values.lambda_es;
    if (cmd->count("--lambda-ds")) target.lambda_ds = values.lambda_ds;
    if (cmd->count("--t-star")) target.t_star = values.t_star;
    if (cmd->count("--t-max")) target.t_max_s = values.t_max_s;
    if (cmd->count("--r-max")) target.r_max = values.r_max;
    if (cmd->count("--max-depth")) target.max_depth = values.max_depth;
    if (cmd->count("--seed")) target.seed = values.seed;
    if (cmd->count("--merge-mode")) {
      target.merge_mode = merge_mode_from_string(merge_mode);
    }
    if (cmd->count("--clock")) {
      target.clock_mode = clock_mode_from_string(clock_mode);
    }
  }
};

const std::vector<std::string> kStrategies = {
    "ssdp", "parallel_no_merge", "mcts", "best_of_n", "beam"};

void print_metrics(const RunMetrics& metrics, const std::string& halt_reason,
                   const std::string& clock_label) {
  std::cout << "halt: " << halt_reason << " after "
            << metrics.rollouts_completed << " rollouts, "
            << format_double(metrics.wall_time_s) << "s " << clock_label
            << "\n";
  std::cout << "nodes: " << metrics.nodes_generated << " generated, "
            << metrics.nodes_explored << " explored, " << metrics.nodes_merged
            << " merged; solutions: " << metrics.solutions.size() << "\n";
  if (metrics.answer) {
    std::cout << "answer (phi " << format_double(metrics.answer_phi)
              << "): " << *metrics.answer << "\n";
  } else {
    std::cout << "answer: none\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tree-of-thought search with semantic sibling merging"};
  app.require_subcommand(1);

  // ----- run: one synthetic search, metrics to stdout -----
  CLI::App* run_cmd =
      app.add_subcommand("run", "run one search on a planted-path problem");
  auto run_config = std::make_shared<ConfigFlags>();
  run_config->attach(run_cmd);
  auto strategy = std::make_shared<std::string>("ssdp");
  run_cmd->add_option("--strategy", *strategy, "search strategy")
      ->check(CLI::IsMember(kStrategies));
  auto problem = std::make_shared<PlantedPathProblem>();
  run_cmd->add_option("--problem-seed", problem->seed,
                      "planted-path problem seed");
  run_cmd->add_option("--depth", problem->depth, "planted path length");
  run_cmd->add_option("--arity", problem->arity, "distinct moves per state");
  run_cmd->add_option("--dup-rate", problem->dup_rate,
                      "paraphrases per distinct move");
  run_cmd->add_option("--dim", problem->embedding_dim, "embedding dimension");
  run_cmd->add_option("--reward-noise", problem->reward_noise,
                      "reward noise scale");
  run_cmd->add_option("--sigma-dup", problem->sigma_dup,
                      "intra-group cosine floor");
  run_cmd->add_option("--sigma-distinct", problem->sigma_distinct,
                      "inter-group cosine ceiling");
  auto trace_out = std::make_shared<std::string>();
  run_cmd->add_option("--trace", *trace_out, "write the JSONL trace here");
  run_cmd->callback([=]() {
    Config config;
    run_config->apply(config);
    config.validate();
    problem->validate();
    const StrategyId id = strategy_from_string(*strategy);
    RunLabels labels;
    labels.run_id = *strategy + "-s" + std::to_string(config.seed);
    const RunResult result = run_strategy(id, problem->statement(), config,
                                          make_synthetic_backends(*problem),
                                          labels);
    std::cout << "run " << labels.run_id << ": strategy " << *strategy
              << ", problem seed " << problem->seed << "\n";
    if (result.aborted) {
      std::cout << "aborted: " << result.error << "\n";
      g_exit = 1;
    } else {
      print_metrics(result.metrics, result.halt_reason,
                    to_string(config.clock_mode));
      const std::string planted = problem->planted_answer();
      const bool correct =
          result.metrics.answer &&
          make_synthetic_backends(*problem).generator->answers_match(
              *result.metrics.answer, planted);
      std::cout << "planted answer " << (correct ? "found" : "missed") << ": "
                << planted << "\n";
    }
    if (!trace_out->empty()) {
      result.trace->write_file(*trace_out);
      std::cout << "trace: " << *trace_out << " ("
                << result.trace->lines().size() << " lines)\n";
    }
  });

  // ----- experiment: batch runs from a spec file -----
  CLI::App* exp_cmd =
      app.add_subcommand("experiment", "run a spec file's full suite");
  auto exp_spec_path = std::make_shared<std::string>();
  exp_cmd->add_option("--spec", *exp_spec_path, "experiment spec (JSON)")
      ->required();
  auto exp_config = std::make_shared<ConfigFlags>();
  exp_config->attach(exp_cmd);
  auto exp_strategy = std::make_shared<std::string>();
  exp_cmd->add_option("--strategy", *exp_strategy, "override spec strategy")
      ->check(CLI::IsMember(kStrategies));
  auto exp_out = std::make_shared<std::string>();
  exp_cmd->add_option("--output-dir", *exp_out, "override spec output_dir");
  exp_cmd->callback([=]() {
    ExperimentSpec spec = spec_from_file(*exp_spec_path);
    exp_config->apply(spec.config);
    if (!exp_strategy->empty()) {
      spec.strategy = strategy_from_string(*exp_strategy);
    }
    if (!exp_out->empty()) spec.output_dir = *exp_out;
    const ExperimentResult result = run_experiment(spec);
    std::cout << result.report;
    std::cout << "wrote " << result.trace_paths.size() << " traces and "
              << result.csv_path << "\n";
  });

  // ----- sweep: the same suite across a tau grid -----
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "sweep tau over a grid and report the "
                                  "pareto front");
  auto sweep_spec_path = std::make_shared<std::string>();
  sweep_cmd->add_option("--spec", *sweep_spec_path, "experiment spec (JSON)")
      ->required();
  auto taus = std::make_shared<std::vector<double>>();
  sweep_cmd
      ->add_option("--taus", *taus,
                   "tau grid points (default 0.00..1.00 step 0.05)")
      ->delimiter(',')
      ->check([](const std::string& token) {
        return token.empty() ? std::string("tau grid point must not be empty")
                             : std::string();
      });
  auto sweep_config = std::make_shared<ConfigFlags>();
  sweep_config->attach(sweep_cmd);
  auto sweep_out = std::make_shared<std::string>();
  sweep_cmd->add_option("--output-dir", *sweep_out, "override spec output_dir");
  sweep_cmd->callback([=]() {
    ExperimentSpec spec = spec_from_file(*sweep_spec_path);
    sweep_config->apply(spec.config);
    if (!sweep_out->empty()) spec.output_dir = *sweep_out;
    const SweepResult result =
        tau_sweep(spec, taus->empty() ? default_tau_grid() : *taus);
    std::cout << result.report;
    std::cout << "wrote " << result.csv_path << "\n";
  });

  // ----- diagnose: per-strategy node statistics from traces -----
  CLI::App* diag_cmd = app.add_subcommand(
      "diagnose", "aggregate node statistics from trace files");
  auto diag_paths = std::make_shared<std::vector<std::string>>();
  diag_cmd->add_option("traces", *diag_paths, "JSONL trace files")
      ->required()
      ->expected(-1);
  diag_cmd->callback([=]() {
    const DiagnosticsReport report = node_diagnostics(*diag_paths);
    std::cout << report.text;
  });

  // ----- replay: rebuild and verify one trace -----
  CLI::App* replay_cmd = app.add_subcommand(
      "replay", "rebuild a trace's tree and verify its recorded counters");
  auto replay_path = std::make_shared<std::string>();
  replay_cmd->add_option("trace", *replay_path, "JSONL trace file")
      ->required();
  replay_cmd->callback([=]() {
    const ReplayedRun run = replay_trace_file(*replay_path);
    std::cout << "replayed " << *replay_path << ": consistent\n";
    std::cout << "run " << run.header.at("run_id").get<std::string>()
              << ", strategy " << run.header.at("strategy").get<std::string>()
              << ", " << run.tree.nodes.size() << " nodes\n";
    print_metrics(run.metrics, "recorded",
                  run.header.at("clock_mode").get<std::string>());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return g_exit;
}
