#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "ssdp/error.hpp"
#include "ssdp/synth.hpp"
#include "support.hpp"

using namespace ssdp;
namespace fs = std::filesystem;

namespace {

const char* kFive =
    "# sent_id = s1\n"
    "1\tAcme\t_\tPROPN\t_\t_\t2\tnsubj\t_\t_\n"
    "2\tprofit\t_\tNOUN\t_\t_\t3\tnsubj\t_\t_\n"
    "3\trose\t_\tVERB\t_\t_\t0\troot\t_\t_\n"
    "4\tfrom\t_\tADP\t_\t_\t5\tcase\t_\t_\n"
    "5\t$5m\t_\tNUM\t_\t_\t3\tobl\t_\t_\n"
    "\n";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ssdp-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Union-find: n nodes, n-1 edges, one component.
bool is_tree(const std::vector<Token>& tokens) {
  const std::size_t n = tokens.size();
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t edges = 0;
  for (const auto& t : tokens) {
    if (t.head == kRoot) continue;
    ++edges;
    const auto a = find(t.index), b = find(static_cast<std::size_t>(t.head));
    if (a == b) return false;
    parent[a] = b;
  }
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) roots += find(i) == i;
  return edges == n - 1 && roots == 1;
}

}  // namespace

TEST_SUITE("corpus") {
  TEST_CASE("five-token sentence with a key=value sidecar") {
    std::istringstream conllu(kFive), sidecar("subj=0..0 obj=4..4 rel=profit_of\n");
    const auto out = read_conllu(conllu, sidecar);
    REQUIRE(out.size() == 1);
    CHECK(out[0].id == "s1");
    CHECK(out[0].size() == 5);
    CHECK(out[0].subj == Span{0, 0});
    CHECK(out[0].obj == Span{4, 4});
    CHECK(out[0].relation == "profit_of");
    CHECK(out[0].tokens[2].head == kRoot);
    CHECK(out[0].tokens[0].head == 1);
    CHECK_FALSE(out[0].fragmented);
  }

  TEST_CASE("JSON sidecar rows and positional ids") {
    std::string text = kFive;
    text.erase(0, text.find('\n') + 1);
    std::istringstream conllu(text + text);
    std::istringstream sidecar(
        "{\"subj\":[0,0],\"obj\":[4,4],\"relation\":\"profit_of\",\"sentiment\":\"positive\"}\n"
        "{\"subj\":[0,1],\"obj\":[4,4],\"relation\":\"loss_of\"}\n");
    const auto out = read_conllu(conllu, sidecar);
    REQUIRE(out.size() == 2);
    CHECK(out[0].gold_sentiment == Sentiment::positive);
    CHECK_FALSE(out[1].gold_sentiment.has_value());
    CHECK(out[1].subj == Span{0, 1});
    CHECK(out[0].id != out[1].id);
  }

  TEST_CASE("empty file gives an empty list") {
    std::istringstream conllu(""), sidecar("");
    CHECK(read_conllu(conllu, sidecar).empty());
  }

  TEST_CASE("span out of bounds names the sentence") {
    std::istringstream conllu(kFive), sidecar("subj=9..9 obj=4..4 rel=profit_of\n");
    try {
      read_conllu(conllu, sidecar);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("s1") != std::string::npos);
    }
  }

  TEST_CASE("malformed line reports its line number") {
    std::istringstream conllu("1\tAcme\t_\n"), sidecar("subj=0..0 obj=0..0 rel=x\n");
    try {
      read_conllu(conllu, sidecar);
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
    }
  }

  TEST_CASE("sidecar row count must match") {
    std::istringstream conllu(kFive), sidecar("");
    CHECK_THROWS_AS(read_conllu(conllu, sidecar), ValidationError);
  }

  TEST_CASE("multi-root input is flagged fragmented, not rejected") {
    const auto inst = testing::make_instance({"a", "b", "c"}, {1, kRoot, kRoot}, {0, 0}, {2, 2});
    CHECK(inst.fragmented);
    CHECK_NOTHROW(validate(inst));
  }

  TEST_CASE("instance invariants") {
    auto inst = testing::make_instance({"a", "b", "c"}, {1, kRoot, 1}, {0, 0}, {2, 2});
    CHECK_NOTHROW(validate(inst, {"r"}));
    CHECK_THROWS_AS(validate(inst, {"other"}), ValidationError);
    auto overlap = inst;
    overlap.obj = {0, 1};
    CHECK_THROWS_AS(validate(overlap), ValidationError);
    auto self = inst;
    self.tokens[0].head = 0;
    CHECK_THROWS_AS(validate(self), ValidationError);
    auto empty = inst;
    empty.subj = {2, 1};
    CHECK_THROWS_AS(validate(empty), ValidationError);
  }

  TEST_CASE("CoNLL-U and JSONL round trips") {
    const auto splits = synthesize_corpus(default_manifest(4, 60, 0, 0), 0.9);
    const auto& train = splits.at("train");
    std::stringstream c, s, j;
    write_conllu(c, train);
    write_sidecar(s, train);
    write_jsonl(j, train);
    CHECK(read_conllu(c, s) == train);
    CHECK(read_jsonl(j) == train);
  }

  TEST_CASE("manifest validation and round trip") {
    auto m = default_manifest(3);
    CHECK_NOTHROW(m.validate());
    const auto dir = temp_dir("manifest");
    write_manifest(dir / "m.json", m);
    CHECK(read_manifest(dir / "m.json") == m);
    auto dup = m;
    dup.relations.push_back(dup.relations.back());
    CHECK_THROWS(dup.validate());
  }
}

TEST_SUITE("synth") {
  TEST_CASE("generated structures are projective trees") {
    const auto splits = synthesize_corpus(default_manifest(21, 500, 50, 50), 0.9);
    for (const auto& [name, list] : splits) {
      for (const auto& inst : list) {
        CHECK(is_tree(inst.tokens));
        CHECK(is_projective_tree(inst.tokens));
        CHECK_NOTHROW(validate(inst, default_manifest(21).labels()));
      }
    }
  }

  TEST_CASE("coupling 1.0 forces the relation's polarity") {
    const auto m = default_manifest(8, 800, 0, 0);
    const auto splits = synthesize_corpus(m, 1.0);
    for (const auto& inst : splits.at("train")) {
      const auto* spec = m.find(inst.relation);
      REQUIRE(spec);
      if (spec->polarity) CHECK(inst.gold_sentiment == spec->polarity);
    }
  }

  TEST_CASE("coupling 0.0 leaves sentiment independent of the relation") {
    const auto m = default_manifest(17, 2000, 0, 0);
    const auto splits = synthesize_corpus(m, 0.0);
    const auto labels = m.labels();
    std::map<std::string, std::array<double, 2>> table;
    for (const auto& inst : splits.at("train")) {
      table[inst.relation][*inst.gold_sentiment == Sentiment::positive ? 0 : 1] += 1.0;
    }
    double n = 0, col[2] = {0, 0};
    for (const auto& [r, row] : table) {
      col[0] += row[0];
      col[1] += row[1];
      n += row[0] + row[1];
    }
    double chi2 = 0.0;
    for (const auto& [r, row] : table) {
      for (int c = 0; c < 2; ++c) {
        const double expected = (row[0] + row[1]) * col[c] / n;
        chi2 += (row[c] - expected) * (row[c] - expected) / expected;
      }
    }
    // df = 7; the 0.001 critical value is 24.32
    CHECK(table.size() == labels.size());
    CHECK(chi2 < 24.32);
  }

  TEST_CASE("coupled corpus is far from independent") {
    const auto m = default_manifest(17, 2000, 0, 0);
    const auto splits = synthesize_corpus(m, 0.9);
    std::size_t agree = 0, polar = 0;
    for (const auto& inst : splits.at("train")) {
      const auto* spec = m.find(inst.relation);
      if (!spec->polarity) continue;
      ++polar;
      agree += inst.gold_sentiment == spec->polarity;
    }
    const double rate = static_cast<double>(agree) / static_cast<double>(polar);
    CHECK(rate > 0.9);
    CHECK(rate < 0.99);
  }

  TEST_CASE("same seed writes identical bytes") {
    const auto m = default_manifest(5, 40, 10, 10);
    const auto a = temp_dir("synth-a"), b = temp_dir("synth-b");
    write_corpus(a, m, synthesize_corpus(m, 0.9));
    write_corpus(b, m, synthesize_corpus(m, 0.9));
    for (const auto& entry : fs::directory_iterator(a)) {
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
    const Corpus loaded = load_corpus(a);
    CHECK(loaded.manifest == m);
    CHECK(loaded.splits.at("dev") == synthesize_corpus(m, 0.9).at("dev"));
  }

  TEST_CASE("configuration errors") {
    const auto m = default_manifest(1, 10, 0, 0);
    CHECK_THROWS_AS(synthesize_corpus(m, 1.5), ConfigError);
    CHECK_THROWS_AS(synthesize_corpus(m, -0.1), ConfigError);
    auto one = m;
    one.relations.resize(1);
    CHECK_THROWS_AS(synthesize_corpus(one, 0.5), ConfigError);
  }
}
