#pragma once

#include <algorithm>
#include <deque>
#include <numeric>
#include <string>
#include <vector>

#include "ssdp/corpus.hpp"
#include "ssdp/rng.hpp"

namespace ssdp::testing {

/// Instance from parallel head/word lists (heads use kRoot).
inline Instance make_instance(const std::vector<std::string>& words, const std::vector<int>& heads,
                              Span subj, Span obj, std::string relation = "r",
                              std::string id = "t") {
  Instance inst;
  inst.id = std::move(id);
  for (std::size_t i = 0; i < words.size(); ++i) {
    inst.tokens.push_back({static_cast<int>(i), words[i], heads[i], heads[i] == kRoot ? "root" : "dep"});
  }
  inst.subj = subj;
  inst.obj = obj;
  inst.relation = std::move(relation);
  inst.fragmented = is_fragmented(inst.tokens);
  return inst;
}

/// Random rooted tree over n nodes: each node after the first attaches to an
/// earlier node, then node labels are permuted.
inline std::vector<int> random_tree_heads(Rng& rng, int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(std::span<int>(order));
  std::vector<int> heads(n, kRoot);
  for (int k = 1; k < n; ++k) {
    heads[order[k]] = order[rng.below(k)];
  }
  return heads;
}

inline Instance random_tree_instance(Rng& rng, int n) {
  std::vector<std::string> words;
  for (int i = 0; i < n; ++i) words.push_back("w" + std::to_string(i));
  const auto heads = random_tree_heads(rng, n);
  const int s = static_cast<int>(rng.below(n));
  const int o = static_cast<int>(rng.below(n));
  return make_instance(words, heads, {s, s}, {o, o});
}

inline std::vector<std::vector<int>> adjacency_from_heads(const std::vector<int>& heads) {
  std::vector<std::vector<int>> adj(heads.size());
  for (std::size_t i = 0; i < heads.size(); ++i) {
    if (heads[i] != kRoot) {
      adj[i].push_back(heads[i]);
      adj[heads[i]].push_back(static_cast<int>(i));
    }
  }
  return adj;
}

/// Plain BFS distance, -1 when unreachable.
inline int bfs_distance(const std::vector<std::vector<int>>& adj, int s, int o) {
  std::vector<int> dist(adj.size(), -1);
  std::deque<int> q{s};
  dist[s] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop_front();
    for (int v : adj[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push_back(v);
      }
    }
  }
  return dist[o];
}

/// Path through the lowest common ancestor, using parent pointers only.
inline std::vector<int> lca_path(const std::vector<int>& heads, int s, int o) {
  auto chain = [&](int x) {
    std::vector<int> c{x};
    while (heads[c.back()] != kRoot) c.push_back(heads[c.back()]);
    return c;
  };
  const auto cs = chain(s), co = chain(o);
  int lca = -1;
  for (int x : cs) {
    if (std::find(co.begin(), co.end(), x) != co.end()) {
      lca = x;
      break;
    }
  }
  std::vector<int> path;
  for (int x : cs) {
    path.push_back(x);
    if (x == lca) break;
  }
  std::vector<int> tail;
  for (int x : co) {
    if (x == lca) break;
    tail.push_back(x);
  }
  path.insert(path.end(), tail.rbegin(), tail.rend());
  return path;
}

/// Every simple path from s to o (small graphs only).
inline void all_simple_paths(const std::vector<std::vector<int>>& adj, int at, int o,
                             std::vector<int>& cur, std::vector<bool>& seen,
                             std::vector<std::vector<int>>& out) {
  if (at == o) {
    out.push_back(cur);
    return;
  }
  for (int v : adj[at]) {
    if (seen[v]) continue;
    seen[v] = true;
    cur.push_back(v);
    all_simple_paths(adj, v, o, cur, seen, out);
    cur.pop_back();
    seen[v] = false;
  }
}

inline std::vector<double> random_simplex(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = rng.uniform(0.01, 1.0);
    s += x;
  }
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace ssdp::testing
