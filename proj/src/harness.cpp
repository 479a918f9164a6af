#include "ssdp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "ssdp/hash.hpp"

namespace ssdp {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

// ===== Spec serialization =====

namespace {

ordered_json problem_to_json(const PlantedPathProblem& p) {
  ordered_json j;
  j["type"] = "planted_path";
  j["seed"] = p.seed;
  j["depth"] = p.depth;
  j["arity"] = p.arity;
  j["dup_rate"] = p.dup_rate;
  j["sigma_dup"] = p.sigma_dup;
  j["sigma_distinct"] = p.sigma_distinct;
  j["reward_noise"] = p.reward_noise;
  j["embedding_dim"] = p.embedding_dim;
  j["expand_cost_s"] = p.expand_cost_s;
  j["score_cost_s"] = p.score_cost_s;
  j["embed_cost_s"] = p.embed_cost_s;
  return j;
}

template <typename T>
void read_field(const ordered_json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

PlantedPathProblem problem_from_json(const ordered_json& j) {
  PlantedPathProblem p;
  read_field(j, "seed", p.seed);
  read_field(j, "depth", p.depth);
  read_field(j, "arity", p.arity);
  read_field(j, "dup_rate", p.dup_rate);
  read_field(j, "sigma_dup", p.sigma_dup);
  read_field(j, "sigma_distinct", p.sigma_distinct);
  read_field(j, "reward_noise", p.reward_noise);
  read_field(j, "embedding_dim", p.embedding_dim);
  read_field(j, "expand_cost_s", p.expand_cost_s);
  read_field(j, "score_cost_s", p.score_cost_s);
  read_field(j, "embed_cost_s", p.embed_cost_s);
  return p;
}

ordered_json endpoint_to_json(const HttpEndpointConfig& e) {
  ordered_json j;
  j["base_url"] = e.base_url;
  j["model"] = e.model;
  j["temperature"] = e.temperature;
  j["stop"] = e.stop;
  j["terminal_pattern"] = e.terminal_pattern;
  j["api_key_env"] = e.api_key_env;
  j["max_attempts"] = e.max_attempts;
  j["backoff_initial_ms"] = e.backoff_initial_ms;
  j["max_inflight"] = e.max_inflight;
  j["timeout_s"] = e.timeout_s;
  j["fixture_path"] = e.fixture_path;
  return j;
}

HttpEndpointConfig endpoint_from_json(const ordered_json& j) {
  HttpEndpointConfig e;
  read_field(j, "base_url", e.base_url);
  read_field(j, "model", e.model);
  read_field(j, "temperature", e.temperature);
  read_field(j, "stop", e.stop);
  read_field(j, "terminal_pattern", e.terminal_pattern);
  read_field(j, "api_key_env", e.api_key_env);
  read_field(j, "max_attempts", e.max_attempts);
  read_field(j, "backoff_initial_ms", e.backoff_initial_ms);
  read_field(j, "max_inflight", e.max_inflight);
  read_field(j, "timeout_s", e.timeout_s);
  read_field(j, "fixture_path", e.fixture_path);
  return e;
}

}  // namespace

void ExperimentSpec::validate() const {
  config.validate();
  if (repetitions < 1) {
    throw InvalidInputError("experiment: repetitions must be >= 1");
  }
  if (output_dir.empty()) {
    throw InvalidInputError("experiment: output_dir must not be empty");
  }
  if (const auto* syn = std::get_if<SyntheticSuite>(&suite)) {
    syn->base.validate();
    if (syn->seeds.empty()) {
      throw InvalidInputError("experiment: suite needs at least one seed");
    }
    std::set<std::uint64_t> distinct(syn->seeds.begin(), syn->seeds.end());
    if (distinct.size() != syn->seeds.size()) {
      throw InvalidInputError("experiment: suite seeds must be distinct");
    }
  } else {
    const auto& http = std::get<HttpSuite>(suite);
    if (http.dataset_path.empty()) {
      throw InvalidInputError("experiment: http suite needs a dataset_path");
    }
    if (http.embedding_dim < 1) {
      throw InvalidInputError("experiment: embedding_dim must be >= 1");
    }
    if (http.reward_value < 0.0 || http.reward_value > 1.0) {
      throw InvalidInputError("experiment: reward_value must be in [0, 1]");
    }
  }
}

std::string spec_to_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["strategy"] = to_string(spec.strategy);
  j["config"] = ordered_json::parse(config_to_json(spec.config));
  ordered_json s;
  if (const auto* syn = std::get_if<SyntheticSuite>(&spec.suite)) {
    s["type"] = "synthetic";
    s["problem"] = problem_to_json(syn->base);
    s["seeds"] = syn->seeds;
  } else {
    const auto& http = std::get<HttpSuite>(spec.suite);
    s["type"] = "http";
    s["endpoint"] = endpoint_to_json(http.endpoint);
    s["dataset_path"] = http.dataset_path;
    s["embedding_dim"] = http.embedding_dim;
    s["reward_value"] = http.reward_value;
  }
  j["suite"] = std::move(s);
  j["repetitions"] = spec.repetitions;
  j["output_dir"] = spec.output_dir;
  return j.dump(2);
}

ExperimentSpec spec_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("experiment spec: expected an object");
  ExperimentSpec spec;
  try {
    if (j.contains("strategy")) {
      spec.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    }
    if (j.contains("config")) spec.config = config_from_json(j.at("config").dump());
    read_field(j, "repetitions", spec.repetitions);
    read_field(j, "output_dir", spec.output_dir);
    if (j.contains("suite")) {
      const ordered_json& s = j.at("suite");
      const std::string type = s.value("type", "synthetic");
      if (type == "synthetic") {
        SyntheticSuite syn;
        if (s.contains("problem")) syn.base = problem_from_json(s.at("problem"));
        read_field(s, "seeds", syn.seeds);
        spec.suite = std::move(syn);
      } else if (type == "http") {
        HttpSuite http;
        if (s.contains("endpoint")) {
          http.endpoint = endpoint_from_json(s.at("endpoint"));
        }
        read_field(s, "dataset_path", http.dataset_path);
        read_field(s, "embedding_dim", http.embedding_dim);
        read_field(s, "reward_value", http.reward_value);
        spec.suite = std::move(http);
      } else {
        throw ParseError("experiment spec: unknown suite type: " + type);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

ExperimentSpec spec_from_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open experiment spec: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return spec_from_json(buf.str());
}

// ===== Experiment execution =====

std::string run_rows_to_csv(const std::vector<RunRow>& rows) {
  std::string out =
      "strategy,tau,seed,rep,accuracy,wall_time_s,nodes_generated,"
      "nodes_explored,nodes_merged,rollouts,clock_mode\n";
  for (const RunRow& r : rows) {
    out += r.strategy;
    out += ',' + format_double(r.tau);
    out += ',' + std::to_string(r.seed);
    out += ',' + std::to_string(r.rep);
    out += ',' + format_double(r.accuracy);
    out += ',' + format_double(r.wall_time_s);
    out += ',' + std::to_string(r.nodes_generated);
    out += ',' + std::to_string(r.nodes_explored);
    out += ',' + std::to_string(r.nodes_merged);
    out += ',' + std::to_string(r.rollouts);
    out += ',' + r.clock_mode;
    out += '\n';
  }
  return out;
}

namespace {

// One executable unit of a suite: a problem instance plus everything needed
// to run and score it.
struct PlannedRun {
  std::uint64_t problem_seed = 0;  // CSV "seed" column
  int rep = 0;
  std::string run_id;
  std::string root_text;
  std::string expected_answer;
  Config config;  // per-run engine seed already mixed in
  BackendSet backends;
  RunLabels labels;
};

std::vector<PlannedRun> plan_runs(const ExperimentSpec& spec) {
  std::vector<PlannedRun> plan;
  const std::string strategy = to_string(spec.strategy);
  if (const auto* syn = std::get_if<SyntheticSuite>(&spec.suite)) {
    for (std::uint64_t problem_seed : syn->seeds) {
      PlantedPathProblem problem = syn->base;
      problem.seed = problem_seed;
      const BackendSet backends = make_synthetic_backends(problem);
      for (int rep = 0; rep < spec.repetitions; ++rep) {
        PlannedRun r;
        r.problem_seed = problem_seed;
        r.rep = rep;
        r.run_id = strategy + "-s" + std::to_string(problem_seed) + "-r" +
                   std::to_string(rep);
        r.root_text = problem.statement();
        r.expected_answer = problem.planted_answer();
        r.config = spec.config;
        r.config.seed = mix64(spec.config.seed,
                              mix64(problem_seed,
                                    static_cast<std::uint64_t>(rep)));
        r.backends = backends;
        r.labels.run_id = r.run_id;
        r.labels.strategy = strategy;
        r.labels.problem = problem_to_json(problem);
        plan.push_back(std::move(r));
      }
    }
    return plan;
  }

  const auto& http = std::get<HttpSuite>(spec.suite);
  std::ifstream f(http.dataset_path, std::ios::binary);
  if (!f) throw IoError("cannot open dataset: " + http.dataset_path);
  ordered_json dataset;
  try {
    dataset = ordered_json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("dataset " + http.dataset_path + ": " + e.what());
  }
  if (!dataset.is_array() || dataset.empty()) {
    throw InvalidInputError("dataset " + http.dataset_path +
                            ": expected a non-empty JSON array");
  }
  const auto generator = std::make_shared<HttpGeneratorBackend>(http.endpoint);
  BackendSet backends;
  backends.generator = generator;
  backends.reward = std::make_shared<ConstantRewardBackend>(http.reward_value);
  backends.embedding =
      std::make_shared<HashedBowEmbeddingBackend>(http.embedding_dim);
  for (size_t i = 0; i < dataset.size(); ++i) {
    const ordered_json& item = dataset[i];
    if (!item.is_object() || !item.contains("question") ||
        !item.contains("answer")) {
      throw ParseError("dataset " + http.dataset_path + ": item " +
                       std::to_string(i) + " needs question and answer");
    }
    const std::string question = item.at("question").get<std::string>();
    const std::string answer = item.at("answer").get<std::string>();
    for (int rep = 0; rep < spec.repetitions; ++rep) {
      PlannedRun r;
      r.problem_seed = i;
      r.rep = rep;
      r.run_id =
          strategy + "-s" + std::to_string(i) + "-r" + std::to_string(rep);
      r.root_text = question;
      r.expected_answer = answer;
      r.config = spec.config;
      r.config.seed = mix64(spec.config.seed,
                            mix64(i, static_cast<std::uint64_t>(rep)));
      // HTTP timing is real elapsed time; the clock_mode CSV column keeps the
      // two timing regimes from being averaged together.
      r.config.clock_mode = ClockMode::Real;
      r.backends = backends;
      r.labels.run_id = r.run_id;
      r.labels.strategy = strategy;
      ordered_json problem;
      problem["type"] = "http";
      problem["dataset"] = http.dataset_path;
      problem["index"] = i;
      problem["question"] = question;
      problem["answer"] = answer;
      r.labels.problem = std::move(problem);
      plan.push_back(std::move(r));
    }
  }
  return plan;
}

RunRow row_from_result(const PlannedRun& planned, const RunResult& result) {
  RunRow row;
  row.strategy = planned.labels.strategy;
  row.tau = planned.config.tau;
  row.seed = planned.problem_seed;
  row.rep = planned.rep;
  row.accuracy = 0.0;
  if (!result.aborted && result.metrics.answer &&
      planned.backends.generator->answers_match(*result.metrics.answer,
                                                planned.expected_answer)) {
    row.accuracy = 1.0;
  }
  row.wall_time_s = result.metrics.wall_time_s;
  row.nodes_generated = result.metrics.nodes_generated;
  row.nodes_explored = result.metrics.nodes_explored;
  row.nodes_merged = result.metrics.nodes_merged;
  row.rollouts = result.metrics.rollouts_completed;
  row.clock_mode = to_string(planned.config.clock_mode);
  return row;
}

void prepare_output_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output dir: " + dir);
  }
  const fs::path probe = fs::path(dir) / ".write-probe";
  std::ofstream f(probe, std::ios::binary);
  if (!f) throw IoError("output dir is not writable: " + dir);
  f.close();
  fs::remove(probe, ec);
}

// Plain-text table: first column left-aligned, the rest right-aligned under
// their headers, two-space gutters, no trailing spaces.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<size_t> width(header.size());
  for (size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) {
      width[c] = std::max(width[c], row[c].size());
    }
  }
  std::string out;
  const auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      const std::string pad(width[c] - row[c].size(), ' ');
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out;
}

std::string mean_report(const std::vector<RunRow>& rows) {
  struct Acc {
    int n = 0;
    double accuracy = 0, time = 0, generated = 0, explored = 0, merged = 0;
  };
  std::map<std::string, Acc> by_strategy;
  for (const RunRow& r : rows) {
    Acc& a = by_strategy[r.strategy];
    a.n += 1;
    a.accuracy += r.accuracy;
    a.time += r.wall_time_s;
    a.generated += static_cast<double>(r.nodes_generated);
    a.explored += static_cast<double>(r.nodes_explored);
    a.merged += static_cast<double>(r.nodes_merged);
  }
  std::vector<std::vector<std::string>> table;
  for (const auto& [name, a] : by_strategy) {
    const double n = a.n;
    table.push_back({name, std::to_string(a.n), format_double(a.accuracy / n),
                     format_double(a.time / n), format_double(a.generated / n),
                     format_double(a.explored / n),
                     format_double(a.merged / n)});
  }
  return render_table({"strategy", "runs", "accuracy", "wall_time_s",
                       "generated", "explored", "merged"},
                      table);
}

std::vector<RunRow> execute_plan(const ExperimentSpec& spec,
                                 const std::vector<PlannedRun>& plan,
                                 std::vector<std::string>* trace_paths) {
  std::vector<RunRow> rows;
  rows.reserve(plan.size());
  for (const PlannedRun& planned : plan) {
    const RunResult result = run_strategy(spec.strategy, planned.root_text,
                                          planned.config, planned.backends,
                                          planned.labels);
    rows.push_back(row_from_result(planned, result));
    if (trace_paths) {
      const fs::path path =
          fs::path(spec.output_dir) / (planned.run_id + ".jsonl");
      result.trace->write_file(path.string());
      trace_paths->push_back(path.string());
    }
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << content;
  if (!f) throw IoError("failed writing: " + path);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  prepare_output_dir(spec.output_dir);
  const std::vector<PlannedRun> plan = plan_runs(spec);

  ExperimentResult result;
  result.rows = execute_plan(spec, plan, &result.trace_paths);
  result.csv_path = (fs::path(spec.output_dir) / "runs.csv").string();
  write_text_file(result.csv_path, run_rows_to_csv(result.rows));
  result.report = mean_report(result.rows);
  return result;
}

// ===== Tau sweep =====

std::vector<double> default_tau_grid() {
  std::vector<double> taus;
  for (int i = 0; i <= 20; ++i) taus.push_back(i / 20.0);
  return taus;
}

std::vector<size_t> pareto_front(const std::vector<SweepRow>& rows) {
  std::vector<size_t> front;
  for (size_t i = 0; i < rows.size(); ++i) {
    bool dominated = false;
    for (size_t j = 0; j < rows.size() && !dominated; ++j) {
      if (j == i) continue;
      const bool no_worse = rows[j].accuracy_mean >= rows[i].accuracy_mean &&
                            rows[j].wall_time_s_mean <= rows[i].wall_time_s_mean;
      const bool better = rows[j].accuracy_mean > rows[i].accuracy_mean ||
                          rows[j].wall_time_s_mean < rows[i].wall_time_s_mean;
      dominated = no_worse && better;
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

SweepResult tau_sweep(const ExperimentSpec& spec,
                      const std::vector<double>& taus) {
  spec.validate();
  if (taus.empty()) throw InvalidInputError("tau sweep: empty tau list");
  prepare_output_dir(spec.output_dir);

  SweepResult result;
  for (double tau : taus) {
    ExperimentSpec point = spec;
    point.config.tau = tau;
    const std::vector<PlannedRun> plan = plan_runs(point);
    const std::vector<RunRow> rows = execute_plan(point, plan, nullptr);
    SweepRow row;
    row.tau = tau;
    for (const RunRow& r : rows) {
      row.accuracy_mean += r.accuracy;
      row.wall_time_s_mean += r.wall_time_s;
      row.nodes_explored_mean += static_cast<double>(r.nodes_explored);
    }
    const double n = static_cast<double>(rows.size());
    row.accuracy_mean /= n;
    row.wall_time_s_mean /= n;
    row.nodes_explored_mean /= n;
    result.rows.push_back(row);
  }
  for (size_t i : pareto_front(result.rows)) result.rows[i].pareto = true;

  std::string csv = "tau,accuracy_mean,wall_time_s_mean,nodes_explored_mean,pareto\n";
  std::vector<std::vector<std::string>> table;
  for (const SweepRow& r : result.rows) {
    csv += format_double(r.tau) + ',' + format_double(r.accuracy_mean) + ',' +
           format_double(r.wall_time_s_mean) + ',' +
           format_double(r.nodes_explored_mean) + ',' +
           (r.pareto ? "1" : "0") + '\n';
    table.push_back({format_double(r.tau), format_double(r.accuracy_mean),
                     format_double(r.wall_time_s_mean),
                     format_double(r.nodes_explored_mean),
                     r.pareto ? "*" : ""});
  }
  result.csv_path = (fs::path(spec.output_dir) / "sweep.csv").string();
  write_text_file(result.csv_path, csv);
  result.report = render_table(
      {"tau", "accuracy", "wall_time_s", "nodes_explored", "pareto"}, table);
  return result;
}

// ===== Trace replay =====

namespace {

[[noreturn]] void consistency(size_t line_no, const std::string& what) {
  throw ConsistencyError("trace line " + std::to_string(line_no) + ": " + what);
}

template <typename T>
T field(const TraceLine& line, const char* key) {
  if (!line.json.contains(key)) {
    throw ParseError("trace line " + std::to_string(line.line_no) +
                     ": missing field '" + key + "'");
  }
  try {
    return line.json.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("trace line " + std::to_string(line.line_no) + ": " +
                     e.what());
  }
}

}  // namespace

ReplayedRun replay_trace(const TraceDoc& doc) {
  ReplayedRun out;
  out.header = doc.header;

  SearchTree tree;
  bool have_root = false;
  bool halted = false;
  std::vector<SolutionRecord> solutions;
  std::int64_t expected_seq = 0;

  for (const TraceLine& line : doc.events) {
    const std::int64_t seq = field<std::int64_t>(line, "i");
    if (seq != expected_seq) {
      consistency(line.line_no,
                  "event out of order (expected i=" +
                      std::to_string(expected_seq) + ", got i=" +
                      std::to_string(seq) + ")");
    }
    expected_seq += 1;
    if (halted) consistency(line.line_no, "event after Halt");
    const std::string ev = field<std::string>(line, "ev");

    try {
      if (ev == "NodeCreated") {
        const NodeId id = field<NodeId>(line, "node");
        const std::string text = field<std::string>(line, "text");
        const double phi = field<double>(line, "phi");
        const bool terminal = field<bool>(line, "terminal");
        if (!line.json.contains("parent")) {
          if (have_root) consistency(line.line_no, "second root node");
          if (id != 0) consistency(line.line_no, "root must have id 0");
          tree = create_tree(text);
          have_root = true;
        } else {
          if (!have_root) consistency(line.line_no, "child before root");
          const NodeId parent = field<NodeId>(line, "parent");
          if (id != tree.nodes.size()) {
            consistency(line.line_no, "node ids must be dense and in order");
          }
          const NodeId got = add_child(tree, parent, text, phi, terminal);
          if (tree.nodes[got].depth != field<int>(line, "depth")) {
            consistency(line.line_no, "recorded depth contradicts the tree");
          }
        }
      } else if (ev == "NodeScored") {
        const NodeId id = field<NodeId>(line, "node");
        if (!tree.contains(id)) consistency(line.line_no, "unknown node");
        if (tree.nodes[id].phi != field<double>(line, "phi")) {
          consistency(line.line_no, "score contradicts NodeCreated");
        }
      } else if (ev == "NodeEmbedded") {
        const NodeId id = field<NodeId>(line, "node");
        if (!tree.contains(id)) consistency(line.line_no, "unknown node");
        set_embedding(tree, id, field<Embedding>(line, "embedding"));
      } else if (ev == "ClusterFormed") {
        const auto members = field<std::vector<NodeId>>(line, "members");
        const NodeId rep = field<NodeId>(line, "representative");
        if (members.empty()) consistency(line.line_no, "empty cluster");
        bool rep_in_members = false;
        for (NodeId m : members) {
          if (!tree.contains(m)) consistency(line.line_no, "unknown member");
          if (m == rep) rep_in_members = true;
        }
        if (!rep_in_members) {
          consistency(line.line_no, "representative outside the cluster");
        }
      } else if (ev == "NodeMerged") {
        const NodeId id = field<NodeId>(line, "node");
        const NodeId into = field<NodeId>(line, "into");
        if (!tree.contains(into)) consistency(line.line_no, "unknown target");
        mark_state(tree, id, NodeState::Merged);
      } else if (ev == "NodePruned") {
        const NodeId id = field<NodeId>(line, "node");
        const std::string reason = field<std::string>(line, "reason");
        if (reason == "early_stop" || reason == "depth_limit") {
          mark_state(tree, id, NodeState::PrunedEarlyStop);
        } else if (reason == "deep_seek") {
          mark_state(tree, id, NodeState::PrunedDeepSeek);
        } else {
          consistency(line.line_no, "unknown prune reason: " + reason);
        }
      } else if (ev == "NodeExpanded") {
        const NodeId id = field<NodeId>(line, "node");
        if (!tree.contains(id)) consistency(line.line_no, "unknown node");
        // Rollout strategies legitimately re-expand an Expanded node.
        if (tree.nodes[id].state == NodeState::Frontier) {
          mark_state(tree, id, NodeState::Expanded);
        } else if (tree.nodes[id].state != NodeState::Expanded) {
          consistency(line.line_no, "expansion of a retired node");
        }
      } else if (ev == "Backprop") {
        backpropagate(tree, field<NodeId>(line, "leaf"),
                      field<double>(line, "reward"));
      } else if (ev == "Solution") {
        const NodeId id = field<NodeId>(line, "node");
        if (!tree.contains(id) ||
            tree.nodes[id].state != NodeState::Terminal) {
          consistency(line.line_no, "solution on a non-terminal node");
        }
        solutions.push_back({id, field<double>(line, "phi")});
      } else if (ev == "Halt") {
        halted = true;
        out.metrics.rollouts_completed = field<int>(line, "rollouts");
        out.metrics.wall_time_s = field<double>(line, "wall_time_s");
        out.metrics.solutions = solutions;
        count_tree_metrics(tree, out.metrics);
        if (out.metrics.nodes_generated !=
            field<std::int64_t>(line, "nodes_generated")) {
          consistency(line.line_no, "nodes_generated contradicts the events");
        }
        if (out.metrics.nodes_explored !=
            field<std::int64_t>(line, "nodes_explored")) {
          consistency(line.line_no, "nodes_explored contradicts the events");
        }
        if (out.metrics.nodes_merged !=
            field<std::int64_t>(line, "nodes_merged")) {
          consistency(line.line_no, "nodes_merged contradicts the events");
        }
        if (static_cast<std::int64_t>(solutions.size()) !=
            field<std::int64_t>(line, "solutions")) {
          consistency(line.line_no, "solution count contradicts the events");
        }
        const auto answer = extract_answer(tree);
        if (!line.json.contains("answer") || line.json.at("answer").is_null()) {
          if (answer) consistency(line.line_no, "answer missing from Halt");
        } else {
          if (!answer ||
              answer->text != field<std::string>(line, "answer") ||
              answer->phi != field<double>(line, "answer_phi")) {
            consistency(line.line_no, "answer contradicts the tree");
          }
          out.metrics.answer = answer->text;
          out.metrics.answer_phi = answer->phi;
        }
      } else {
        throw ParseError("trace line " + std::to_string(line.line_no) +
                         ": unknown event kind: " + ev);
      }
    } catch (const ConsistencyError&) {
      throw;
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      // Tree ops reject impossible transitions; surface them as trace
      // consistency failures with the offending line.
      consistency(line.line_no, e.what());
    }
  }

  if (!have_root) throw ParseError("trace has no NodeCreated root event");
  if (!halted) throw ParseError("trace has no Halt event (truncated?)");
  out.tree = std::move(tree);
  return out;
}

ReplayedRun replay_trace_file(const std::string& path) {
  return replay_trace(parse_trace_file(path));
}

// ===== Diagnostics =====

DiagnosticsReport node_diagnostics(
    const std::vector<std::string>& trace_paths) {
  if (trace_paths.empty()) {
    throw InvalidInputError("diagnostics: at least one trace is required");
  }
  struct Acc {
    int runs = 0;
    double generated = 0, explored = 0, merged = 0;
  };
  std::map<std::string, Acc> by_strategy;
  for (const std::string& path : trace_paths) {
    const TraceDoc doc = parse_trace_file(path);
    const ReplayedRun run = replay_trace(doc);
    const std::string strategy = doc.header.value("strategy", "?");
    Acc& a = by_strategy[strategy];
    a.runs += 1;
    a.generated += static_cast<double>(run.metrics.nodes_generated);
    a.explored += static_cast<double>(run.metrics.nodes_explored);
    a.merged += static_cast<double>(run.metrics.nodes_merged);
  }

  DiagnosticsReport report;
  for (const auto& [name, a] : by_strategy) {
    StrategyDiagnostics d;
    d.strategy = name;
    d.runs = a.runs;
    d.mean_generated = a.generated / a.runs;
    d.mean_explored = a.explored / a.runs;
    d.mean_merged = a.merged / a.runs;
    report.per_strategy.push_back(d);
  }

  const auto find = [&](const char* name) -> const StrategyDiagnostics* {
    for (const StrategyDiagnostics& d : report.per_strategy) {
      if (d.strategy == name) return &d;
    }
    return nullptr;
  };
  const StrategyDiagnostics* ssdp = find("ssdp");
  const StrategyDiagnostics* no_merge = find("parallel_no_merge");
  if (ssdp && no_merge && no_merge->mean_explored > 0.0) {
    report.exploration_reduction =
        1.0 - ssdp->mean_explored / no_merge->mean_explored;
  }

  std::vector<std::vector<std::string>> table;
  for (const StrategyDiagnostics& d : report.per_strategy) {
    table.push_back({d.strategy, std::to_string(d.runs),
                     format_double(d.mean_generated),
                     format_double(d.mean_explored),
                     format_double(d.mean_merged)});
  }
  std::string text = render_table({"strategy", "runs", "mean_generated",
                                   "mean_explored", "mean_merged"},
                                  table);
  if (report.exploration_reduction) {
    const double pct =
        std::round(*report.exploration_reduction * 1000.0) / 10.0;
    text += "exploration reduction (ssdp vs parallel_no_merge): " +
            format_double(pct) + "%\n";
  }
  report.text = std::move(text);
  return report;
}

}  // namespace ssdp
