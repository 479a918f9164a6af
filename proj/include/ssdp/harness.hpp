#pragma once

#include <variant>

#include "ssdp/baselines.hpp"
#include "ssdp/http_backend.hpp"
#include "ssdp/synthetic.hpp"

namespace ssdp {

// ===== Experiment specification =====

// One planted-path problem per seed; the other fields shape every instance.
struct SyntheticSuite {
  PlantedPathProblem base;
  std::vector<std::uint64_t> seeds{1};
};

// Question/answer problems served by an OpenAI-compatible endpoint.
// Generation is the only remote call: rewards use a constant stand-in and
// embeddings use deterministic hashed bag-of-words.
struct HttpSuite {
  HttpEndpointConfig endpoint;
  std::string dataset_path;  // JSON array of {"question": ..., "answer": ...}
  int embedding_dim = 256;
  double reward_value = 0.5;
};

struct ExperimentSpec {
  StrategyId strategy = StrategyId::SSDP;
  Config config;
  std::variant<SyntheticSuite, HttpSuite> suite;
  int repetitions = 1;
  std::string output_dir = "out";

  void validate() const;
};

std::string spec_to_json(const ExperimentSpec& spec);
ExperimentSpec spec_from_json(const std::string& json_text);
ExperimentSpec spec_from_file(const std::string& path);

// ===== Experiment execution =====

// One row of the per-run summary CSV. Column order:
//   strategy,tau,seed,rep,accuracy,wall_time_s,nodes_generated,
//   nodes_explored,nodes_merged,rollouts,clock_mode
struct RunRow {
  std::string strategy;
  double tau = 0.0;
  std::uint64_t seed = 0;
  int rep = 0;
  double accuracy = 0.0;  // 1 when the run's answer matches the expected one
  double wall_time_s = 0.0;
  std::int64_t nodes_generated = 0;
  std::int64_t nodes_explored = 0;
  std::int64_t nodes_merged = 0;
  int rollouts = 0;
  std::string clock_mode;
};

std::string run_rows_to_csv(const std::vector<RunRow>& rows);

struct ExperimentResult {
  std::vector<RunRow> rows;           // seed-major, repetition-minor order
  std::vector<std::string> trace_paths;
  std::string csv_path;
  std::string report;                 // aggregate means, human-readable
};

// Runs strategy x suite x repetitions, writes one trace file per run plus
// runs.csv into spec.output_dir, and returns the rows. The output directory
// is created and probed before any run starts (IoError otherwise). Aborted
// runs (backend failure) score accuracy 0 and keep their partial trace.
// Reruns of the same synthetic spec produce byte-identical traces and CSV
// (HTTP suites report wall-clock timings, which vary).
ExperimentResult run_experiment(const ExperimentSpec& spec);

// ===== Tau sweep =====

struct SweepRow {
  double tau = 0.0;
  double accuracy_mean = 0.0;
  double wall_time_s_mean = 0.0;
  double nodes_explored_mean = 0.0;
  bool pareto = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // in the given tau order
  std::string csv_path;
  std::string report;          // human-readable summary table
};

// 0.00, 0.05, ..., 1.00 (21 points).
std::vector<double> default_tau_grid();

// Indices of rows on the Pareto front under (maximize accuracy, minimize
// time), by exhaustive pairwise dominance.
std::vector<size_t> pareto_front(const std::vector<SweepRow>& rows);

// Runs the spec's suite once per tau (traces kept in memory only) and writes
// sweep.csv into spec.output_dir.
SweepResult tau_sweep(const ExperimentSpec& spec,
                      const std::vector<double>& taus = default_tau_grid());

// ===== Trace replay and diagnostics =====

struct ReplayedRun {
  nlohmann::ordered_json header;
  SearchTree tree;
  RunMetrics metrics;  // from the Halt event, cross-checked against the tree
};

// Rebuilds the search tree by applying trace events in order and verifies
// that the recomputed counters, solutions, and answer equal the recorded
// Halt payload. Throws ParseError (malformed line) or ConsistencyError
// (out-of-order or contradictory events), both with line numbers.
ReplayedRun replay_trace(const TraceDoc& doc);
ReplayedRun replay_trace_file(const std::string& path);

struct StrategyDiagnostics {
  std::string strategy;
  int runs = 0;
  double mean_generated = 0.0;
  double mean_explored = 0.0;
  double mean_merged = 0.0;
};

struct DiagnosticsReport {
  std::vector<StrategyDiagnostics> per_strategy;  // sorted by strategy name
  // 1 - explored(ssdp)/explored(parallel_no_merge), when both are present.
  std::optional<double> exploration_reduction;
  std::string text;
};

// Replays every trace (validating counters) and aggregates per-strategy node
// statistics.
DiagnosticsReport node_diagnostics(const std::vector<std::string>& trace_paths);

// Shortest round-trip decimal form of a double (CSV/report formatting).
std::string format_double(double value);

}  // namespace ssdp
