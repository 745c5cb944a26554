#include "ssdp/syntax.hpp"

#include <algorithm>
#include <deque>

namespace ssdp {

DepGraph::DepGraph(const Instance& inst)
    : neighbors_(inst.tokens.size()), heads_(inst.tokens.size()), deprels_(inst.tokens.size()) {
  const int n = inst.size();
  for (int i = 0; i < n; ++i) {
    const int h = inst.tokens[i].head;
    heads_[i] = h;
    deprels_[i] = inst.tokens[i].deprel;
    if (h == kRoot || h == i || h < 0 || h >= n) continue;
    if (!adjacent(i, h)) {
      neighbors_[i].push_back(h);
      neighbors_[h].push_back(i);
    }
  }
  for (auto& list : neighbors_) std::sort(list.begin(), list.end());
}

bool DepGraph::adjacent(int a, int b) const {
  const auto& list = neighbors_[a];
  return std::find(list.begin(), list.end(), b) != list.end();
}

const std::string& DepGraph::label(int a, int b) const {
  static const std::string empty;
  if (heads_[a] == b) return deprels_[a];
  if (heads_[b] == a) return deprels_[b];
  return empty;
}

std::size_t DepGraph::edge_count() const {
  std::size_t degree = 0;
  for (const auto& list : neighbors_) degree += list.size();
  return degree / 2;
}

std::vector<int> DepGraph::components() const {
  std::vector<int> comp(neighbors_.size(), -1);
  int next = 0;
  for (int start = 0; start < size(); ++start) {
    if (comp[start] >= 0) continue;
    std::deque<int> queue{start};
    comp[start] = next;
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int v : neighbors_[u]) {
        if (comp[v] < 0) {
          comp[v] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return comp;
}

int entity_head(const Instance& inst, const Span& span) {
  for (int i = span.lo; i <= span.hi; ++i) {
    if (!span.contains(inst.tokens[i].head)) return i;
  }
  return span.lo;
}

SdpResult extract_sdp(const DepGraph& graph, int s, int o) {
  // Distances to o; walking from s along strictly decreasing distance and
  // always taking the smallest neighbor index yields the lexicographically
  // smallest shortest path.
  std::vector<int> dist(graph.size(), -1);
  std::deque<int> queue{o};
  dist[o] = 0;
  while (!queue.empty() && dist[s] < 0) {
    const int u = queue.front();
    queue.pop_front();
    for (int v : graph.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  if (dist[s] < 0) {
    const auto comp = graph.components();
    throw NoPathError(s, o, comp[s], comp[o]);
  }
  SdpResult result;
  int cur = s;
  result.path.push_back(cur);
  while (cur != o) {
    for (int v : graph.neighbors(cur)) {
      if (dist[v] == dist[cur] - 1) {
        cur = v;
        break;
      }
    }
    result.path.push_back(cur);
  }
  result.token_set = result.path;
  std::sort(result.token_set.begin(), result.token_set.end());
  return result;
}

SdpResult instance_sdp(const Instance& inst) {
  const DepGraph graph(inst);
  const int s = entity_head(inst, inst.subj);
  const int o = entity_head(inst, inst.obj);
  try {
    return extract_sdp(graph, s, o);
  } catch (const NoPathError&) {
    SdpResult fallback;
    fallback.path = {s, o};
    fallback.token_set = {std::min(s, o), std::max(s, o)};
    fallback.connected = false;
    return fallback;
  }
}

}  // namespace ssdp
