#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ssdp/corpus.hpp"

namespace ssdp {

/// Undirected view of the head links of one sentence.
class DepGraph {
 public:
  explicit DepGraph(const Instance& inst);

  int size() const { return static_cast<int>(neighbors_.size()); }
  /// Ascending neighbor indices.
  const std::vector<int>& neighbors(int node) const { return neighbors_[node]; }
  bool adjacent(int a, int b) const;
  /// Dependency label of the edge a-b (the child's deprel); empty if absent.
  const std::string& label(int a, int b) const;
  std::size_t edge_count() const;
  /// Connected-component id per node, numbered in order of lowest member.
  std::vector<int> components() const;

 private:
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> heads_;
  std::vector<std::string> deprels_;
};

class NoPathError : public std::runtime_error {
 public:
  NoPathError(int source, int target, int source_component, int target_component)
      : std::runtime_error("no dependency path between tokens " + std::to_string(source) +
                           " (component " + std::to_string(source_component) + ") and " +
                           std::to_string(target) + " (component " +
                           std::to_string(target_component) + ")"),
        source_component(source_component),
        target_component(target_component) {}
  int source_component;
  int target_component;
};

struct SdpResult {
  std::vector<int> path;       // from the subject anchor to the object anchor
  std::vector<int> token_set;  // sorted, unique
  bool connected = true;       // false when the endpoint fallback was used
};

/// Span token whose parent lies outside the span (ROOT counts as outside);
/// lowest such index if several, lowest span index if none.
int entity_head(const Instance& inst, const Span& span);

/// Shortest path by BFS on the undirected graph. Among equal-length paths
/// the lexicographically smallest index sequence wins. Throws NoPathError
/// when s and o lie in different components.
SdpResult extract_sdp(const DepGraph& graph, int s, int o);

/// Anchors both entities and extracts their SDP. Disconnected pairs keep
/// just the two anchors, with connected = false.
SdpResult instance_sdp(const Instance& inst);

}  // namespace ssdp
