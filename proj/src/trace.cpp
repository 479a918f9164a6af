#include "ssdp/trace.hpp"

#include <fstream>
#include <sstream>

namespace ssdp {

using nlohmann::ordered_json;

TraceLog::TraceLog(const std::string& run_id, const std::string& strategy,
                   std::uint64_t seed, const std::string& clock_mode,
                   ordered_json config, ordered_json problem) {
  ordered_json h;
  h["schema"] = kTraceSchema;
  h["version"] = kTraceVersion;
  h["run_id"] = run_id;
  h["strategy"] = strategy;
  h["seed"] = seed;
  h["clock_mode"] = clock_mode;
  h["config"] = std::move(config);
  h["problem"] = std::move(problem);
  lines_.push_back(h.dump());
}

ordered_json TraceLog::event(int iteration, double t, const char* kind) {
  ordered_json j;
  j["i"] = seq_;
  j["it"] = iteration;
  j["t"] = t;
  j["ev"] = kind;
  return j;
}

void TraceLog::push(ordered_json j) {
  lines_.push_back(j.dump());
  seq_ += 1;
}

void TraceLog::node_created(int iteration, double t, NodeId id,
                            std::optional<NodeId> parent, int depth,
                            const std::string& text, double phi, bool terminal,
                            std::optional<int> group) {
  ordered_json j = event(iteration, t, "NodeCreated");
  j["node"] = id;
  if (parent) j["parent"] = *parent;
  j["depth"] = depth;
  j["text"] = text;
  j["phi"] = phi;
  j["terminal"] = terminal;
  if (group) j["group"] = *group;
  push(std::move(j));
}

void TraceLog::node_scored(int iteration, double t, NodeId id, double phi,
                           double cost) {
  ordered_json j = event(iteration, t, "NodeScored");
  j["node"] = id;
  j["phi"] = phi;
  j["cost"] = cost;
  push(std::move(j));
}

void TraceLog::node_embedded(int iteration, double t, NodeId id, double cost,
                             const Embedding& embedding) {
  ordered_json j = event(iteration, t, "NodeEmbedded");
  j["node"] = id;
  j["cost"] = cost;
  j["embedding"] = embedding;
  push(std::move(j));
}

void TraceLog::cluster_formed(int iteration, double t, NodeId parent,
                              const std::vector<NodeId>& members,
                              NodeId representative, double tau) {
  ordered_json j = event(iteration, t, "ClusterFormed");
  j["parent"] = parent;
  j["members"] = members;
  j["representative"] = representative;
  j["tau"] = tau;
  push(std::move(j));
}

void TraceLog::node_merged(int iteration, double t, NodeId id, NodeId into) {
  ordered_json j = event(iteration, t, "NodeMerged");
  j["node"] = id;
  j["into"] = into;
  push(std::move(j));
}

void TraceLog::node_pruned(int iteration, double t, NodeId id,
                           const std::string& reason) {
  ordered_json j = event(iteration, t, "NodePruned");
  j["node"] = id;
  j["reason"] = reason;
  push(std::move(j));
}

void TraceLog::node_expanded(int iteration, double t, NodeId id, double cost) {
  ordered_json j = event(iteration, t, "NodeExpanded");
  j["node"] = id;
  j["cost"] = cost;
  push(std::move(j));
}

void TraceLog::backprop(int iteration, double t, NodeId leaf, double reward) {
  ordered_json j = event(iteration, t, "Backprop");
  j["leaf"] = leaf;
  j["reward"] = reward;
  push(std::move(j));
}

void TraceLog::solution(int iteration, double t, NodeId id, double phi) {
  ordered_json j = event(iteration, t, "Solution");
  j["node"] = id;
  j["phi"] = phi;
  push(std::move(j));
}

void TraceLog::halt(int iteration, double t, const std::string& reason,
                    const RunMetrics& metrics) {
  ordered_json j = event(iteration, t, "Halt");
  j["reason"] = reason;
  j["rollouts"] = metrics.rollouts_completed;
  j["wall_time_s"] = metrics.wall_time_s;
  j["nodes_generated"] = metrics.nodes_generated;
  j["nodes_explored"] = metrics.nodes_explored;
  j["nodes_merged"] = metrics.nodes_merged;
  j["solutions"] = metrics.solutions.size();
  if (metrics.answer) {
    j["answer"] = *metrics.answer;
  } else {
    j["answer"] = nullptr;
  }
  j["answer_phi"] = metrics.answer_phi;
  push(std::move(j));
}

std::string TraceLog::str() const {
  std::string out;
  for (const std::string& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

void TraceLog::write_file(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open trace file for writing: " + path);
  f << str();
  if (!f) throw IoError("failed writing trace file: " + path);
}

TraceDoc parse_trace(const std::string& text) {
  TraceDoc doc;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    line_no += 1;
    if (line.empty()) continue;
    ordered_json j;
    try {
      j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("trace line " + std::to_string(line_no) + ": " +
                       e.what());
    }
    if (line_no == 1) {
      if (!j.is_object() || j.value("schema", "") != kTraceSchema) {
        throw ParseError("trace line 1: missing or unknown schema header");
      }
      if (j.value("version", -1) != kTraceVersion) {
        throw ParseError("trace line 1: unsupported trace version");
      }
      doc.header = std::move(j);
      continue;
    }
    if (!j.is_object() || !j.contains("ev") || !j.contains("i")) {
      throw ParseError("trace line " + std::to_string(line_no) +
                       ": not an event object");
    }
    doc.events.push_back({line_no, std::move(j)});
  }
  if (line_no == 0) throw ParseError("trace is empty");
  return doc;
}

TraceDoc parse_trace_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open trace file: " + path);
  std::ostringstream buf;
  buf << f.rdbuf();
  return parse_trace(buf.str());
}

}  // namespace ssdp
