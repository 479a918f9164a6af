#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssdp/metrics.hpp"
#include "ssdp/tree.hpp"

namespace ssdp {

// JSONL run trace. Line 1 is a header object
//   {"schema":"ssdp-trace","version":1,"run_id":...,"strategy":...,
//    "seed":...,"clock_mode":...,"config":{...},"problem":{...}}
// and every following line is one event object
//   {"i":<seq>,"it":<iteration>,"t":<seconds>,"ev":"<kind>", ...payload}
// Event kinds: NodeCreated, NodeScored, NodeEmbedded, ClusterFormed,
// NodeMerged, NodePruned, NodeExpanded, Backprop, Solution, Halt.
// Replaying the events reconstructs the final tree exactly (embeddings
// included); the Halt payload freezes the run's final counters.
inline constexpr const char* kTraceSchema = "ssdp-trace";
inline constexpr int kTraceVersion = 1;

class TraceLog {
 public:
  TraceLog(const std::string& run_id, const std::string& strategy,
           std::uint64_t seed, const std::string& clock_mode,
           nlohmann::ordered_json config, nlohmann::ordered_json problem);

  void node_created(int iteration, double t, NodeId id,
                    std::optional<NodeId> parent, int depth,
                    const std::string& text, double phi, bool terminal,
                    std::optional<int> group);
  void node_scored(int iteration, double t, NodeId id, double phi, double cost);
  void node_embedded(int iteration, double t, NodeId id, double cost,
                     const Embedding& embedding);
  void cluster_formed(int iteration, double t, NodeId parent,
                      const std::vector<NodeId>& members, NodeId representative,
                      double tau);
  void node_merged(int iteration, double t, NodeId id, NodeId into);
  void node_pruned(int iteration, double t, NodeId id,
                   const std::string& reason);
  void node_expanded(int iteration, double t, NodeId id, double cost);
  void backprop(int iteration, double t, NodeId leaf, double reward);
  void solution(int iteration, double t, NodeId id, double phi);
  void halt(int iteration, double t, const std::string& reason,
            const RunMetrics& metrics);

  const std::vector<std::string>& lines() const { return lines_; }
  std::string str() const;                 // all lines, '\n'-terminated
  void write_file(const std::string& path) const;  // throws IoError

 private:
  nlohmann::ordered_json event(int iteration, double t, const char* kind);
  void push(nlohmann::ordered_json j);

  std::vector<std::string> lines_;
  std::int64_t seq_ = 0;
};

// One parsed trace line (header excluded), with its 1-based line number for
// error reporting.
struct TraceLine {
  size_t line_no;
  nlohmann::ordered_json json;
};

struct TraceDoc {
  nlohmann::ordered_json header;
  std::vector<TraceLine> events;
};

// Parses JSONL text. Throws ParseError (malformed JSON, bad header, missing
// event fields) with the offending line number in the message.
TraceDoc parse_trace(const std::string& text);
TraceDoc parse_trace_file(const std::string& path);  // + IoError

}  // namespace ssdp
