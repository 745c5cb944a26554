#include <algorithm>

#include "doctest.h"
#include "ssdp/syntax.hpp"
#include "ssdp/synth.hpp"
#include "support.hpp"

using namespace ssdp;
using namespace ssdp::testing;

namespace {

Instance chain() {
  return make_instance({"a", "b", "c", "d", "e"}, {1, 2, kRoot, 2, 3}, {0, 0}, {4, 4});
}

}  // namespace

TEST_SUITE("syntax") {
  TEST_CASE("graph construction") {
    const DepGraph g(chain());
    CHECK(g.size() == 5);
    CHECK(g.edge_count() == 4);
    for (auto [a, b] : std::vector<std::pair<int, int>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}}) {
      CHECK(g.adjacent(a, b));
      CHECK(g.adjacent(b, a));
    }
    CHECK_FALSE(g.adjacent(0, 2));
    CHECK(g.label(0, 1) == "dep");

    const DepGraph single(make_instance({"x"}, {kRoot}, {0, 0}, {0, 0}));
    CHECK(single.edge_count() == 0);

    const DepGraph frag(make_instance({"a", "b", "c"}, {1, kRoot, kRoot}, {0, 0}, {2, 2}));
    CHECK(frag.edge_count() == 1);
    const auto comp = frag.components();
    CHECK(comp[0] == comp[1]);
    CHECK(comp[0] != comp[2]);
  }

  TEST_CASE("entity head selection") {
    const auto a = make_instance({"a", "b", "c"}, {1, 2, kRoot}, {0, 1}, {2, 2});
    CHECK(entity_head(a, {0, 1}) == 1);
    const auto b = chain();
    CHECK(entity_head(b, {4, 4}) == 4);
    const auto frag = make_instance({"a", "b", "c", "d", "e"}, {1, kRoot, 0, 4, kRoot}, {0, 0}, {2, 3});
    CHECK(entity_head(frag, {2, 3}) == 2);
  }

  TEST_CASE("path examples") {
    const DepGraph g(chain());
    const auto r = extract_sdp(g, 0, 4);
    CHECK(r.path == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(r.token_set == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(extract_sdp(g, 2, 3).path == std::vector<int>{2, 3});
    const auto self = extract_sdp(g, 2, 2);
    CHECK(self.path == std::vector<int>{2});
    CHECK(self.token_set == std::vector<int>{2});
  }

  TEST_CASE("chain path matches exhaustive enumeration") {
    const auto heads = std::vector<int>{1, 2, kRoot, 2, 3};
    const auto adj = adjacency_from_heads(heads);
    std::vector<std::vector<int>> paths;
    std::vector<int> cur{0};
    std::vector<bool> seen(5, false);
    seen[0] = true;
    all_simple_paths(adj, 0, 4, cur, seen, paths);
    REQUIRE(paths.size() == 1);
    CHECK(extract_sdp(DepGraph(chain()), 0, 4).path == paths[0]);
  }

  TEST_CASE("disconnected endpoints raise NoPathError with component ids") {
    const auto inst = make_instance({"a", "b", "c"}, {1, kRoot, kRoot}, {0, 0}, {2, 2});
    const DepGraph g(inst);
    try {
      extract_sdp(g, 0, 2);
      FAIL("expected NoPathError");
    } catch (const NoPathError& e) {
      CHECK(e.source_component == 0);
      CHECK(e.target_component == 1);
    }
    const auto fallback = instance_sdp(inst);
    CHECK_FALSE(fallback.connected);
    CHECK(fallback.token_set == std::vector<int>{0, 2});
  }

  TEST_CASE("random trees: BFS length, LCA path and endpoint symmetry") {
    Rng rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
      const int n = 1 + static_cast<int>(rng.below(40));
      const auto inst = random_tree_instance(rng, n);
      std::vector<int> heads;
      for (const auto& t : inst.tokens) heads.push_back(t.head);
      const DepGraph g(inst);
      const int s = inst.subj.lo, o = inst.obj.lo;
      const auto r = extract_sdp(g, s, o);
      CHECK(static_cast<int>(r.path.size()) - 1 == bfs_distance(adjacency_from_heads(heads), s, o));
      CHECK(r.path == lca_path(heads, s, o));
      CHECK(r.token_set == extract_sdp(g, o, s).token_set);
      for (std::size_t i = 1; i < r.path.size(); ++i) CHECK(g.adjacent(r.path[i - 1], r.path[i]));
    }
  }

  TEST_CASE("random cyclic graphs: minimal length and lexicographic tie-break") {
    Rng rng(77);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = 2 + static_cast<int>(rng.below(8));
      std::vector<int> heads(n);
      for (int i = 0; i < n; ++i) {
        int h = static_cast<int>(rng.below(n + 1)) - 1;
        heads[i] = h == i ? kRoot : h;
      }
      std::vector<std::string> words(n, "w");
      const auto inst = make_instance(words, heads, {0, 0}, {n - 1, n - 1});
      const auto adj = adjacency_from_heads(heads);
      const int dist = bfs_distance(adj, 0, n - 1);
      const DepGraph g(inst);
      if (dist < 0) {
        CHECK_THROWS_AS(extract_sdp(g, 0, n - 1), NoPathError);
        continue;
      }
      std::vector<std::vector<int>> paths;
      std::vector<int> cur{0};
      std::vector<bool> seen(n, false);
      seen[0] = true;
      // heads may duplicate an edge (i->j and j->i); dedupe neighbors first
      auto uniq = adj;
      for (auto& v : uniq) {
        std::sort(v.begin(), v.end());
        v.erase(std::unique(v.begin(), v.end()), v.end());
      }
      all_simple_paths(uniq, 0, n - 1, cur, seen, paths);
      std::vector<int> best;
      for (const auto& p : paths) {
        if (static_cast<int>(p.size()) - 1 != dist) continue;
        if (best.empty() || p < best) best = p;
      }
      CHECK(extract_sdp(g, 0, n - 1).path == best);
    }
  }

  TEST_CASE("profit-rose-up-from template isolates the key terms") {
    // "in the third quarter , Acme 's profit sharply rose up from $ 5m ."
    const std::vector<std::string> w{"in", "the", "third", "quarter", ",", "Acme", "'s", "profit",
                                     "sharply", "rose", "up", "from", "$", "5m", "."};
    const std::vector<int> h{3, 3, 3, 9, 9, 7, 5, 9, 9, kRoot, 9, 13, 13, 9, 9};
    const auto inst = make_instance(w, h, {5, 5}, {12, 13}, "profit_of");
    const auto r = instance_sdp(inst);
    auto has = [&](int i) { return std::binary_search(r.token_set.begin(), r.token_set.end(), i); };
    CHECK(has(5));   // Acme
    CHECK(has(7));   // profit
    CHECK(has(9));   // rose
    CHECK(has(13));  // object head
    for (int filler : {0, 1, 2, 3, 4, 6, 8, 14}) CHECK_FALSE(has(filler));
  }

  TEST_CASE("synthetic money template SDP contains the relation word") {
    const auto m = default_manifest(3, 200, 0, 0);
    for (const auto& inst : synthesize_corpus(m, 0.9).at("train")) {
      if (inst.relation != "profit_of" && inst.relation != "loss_of") continue;
      const auto r = instance_sdp(inst);
      CHECK(r.connected);
      CHECK(r.path.front() == entity_head(inst, inst.subj));
      CHECK(r.path.back() == entity_head(inst, inst.obj));
      bool verb = false;
      for (int p : r.path) verb |= inst.tokens[p].head == kRoot;
      CHECK(verb);
    }
  }
}
