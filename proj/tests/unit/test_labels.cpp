#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "ssdp/error.hpp"
#include "ssdp/labels.hpp"
#include "ssdp/synth.hpp"
#include "support.hpp"

using namespace ssdp;
using namespace ssdp::testing;

namespace {

bool subset(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

}  // namespace

TEST_SUITE("labels") {
  TEST_CASE("variant names") {
    CHECK(parse_variant("EPL") == IslVariant::epl);
    CHECK(parse_variant("SPL") == IslVariant::spl);
    CHECK(parse_variant("ISL") == IslVariant::isl);
    CHECK(to_string(IslVariant::spl) == "SPL");
    CHECK_THROWS(parse_variant("XYZ"));
  }

  TEST_CASE("signals for a small sentence") {
    // Acme profit rose sharply from $5m ; subj Acme, obj $5m
    const auto inst = make_instance({"Acme", "profit", "rose", "sharply", "from", "$5m"},
                                    {1, 2, kRoot, 2, 5, 2}, {0, 0}, {5, 5});
    const auto& lex = SentimentLexicon::financial();
    const auto epl = annotate(inst, lex, IslVariant::epl).signal;
    const auto spl = annotate(inst, lex, IslVariant::spl).signal;
    const auto isl = annotate(inst, lex, IslVariant::isl).signal;
    CHECK(epl.positions() == std::vector<int>{1, 6});
    CHECK(spl.positions() == std::vector<int>{1, 2, 3, 6});
    CHECK(isl.positions() == std::vector<int>{0, 1, 2, 3, 6});
    for (double v : isl.dist) CHECK((v == 0.0 || v == doctest::Approx(0.2)));
  }

  TEST_CASE("multi-token entities mark the whole span") {
    const auto inst = make_instance({"Big", "Corp", "sued", "Small", "Inc"}, {1, 2, kRoot, 4, 2}, {0, 1}, {3, 4});
    const auto sig = annotate(inst, SentimentLexicon::financial(), IslVariant::epl).signal;
    CHECK(sig.positions() == std::vector<int>{1, 2, 4, 5});
  }

  TEST_CASE("empty mask is rejected") {
    CHECK_THROWS_AS(signal_from_mask(IslVariant::isl, {0, 0, 0}), ValidationError);
  }

  TEST_CASE("hierarchy and normalization over a synthetic corpus") {
    const auto splits = synthesize_corpus(default_manifest(31, 2000, 0, 0), 0.9);
    const auto& lex = SentimentLexicon::financial();
    for (const auto& inst : splits.at("train")) {
      const auto e = annotate(inst, lex, IslVariant::epl).signal;
      const auto s = annotate(inst, lex, IslVariant::spl).signal;
      const auto i = annotate(inst, lex, IslVariant::isl).signal;
      CHECK(subset(e.positions(), s.positions()));
      CHECK(subset(s.positions(), i.positions()));
      CHECK(i.mask[0] == 1);
      CHECK(s.mask[0] == 0);
      for (const auto* sig : {&e, &s, &i}) {
        double sum = 0.0;
        for (double v : sig->dist) sum += v;
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(sig->size() == inst.tokens.size() + 1);
      }
    }
  }

  TEST_CASE("cached JSON field") {
    const auto inst = make_instance({"a", "b", "c"}, {1, kRoot, 1}, {0, 0}, {2, 2});
    const auto sig = annotate(inst, SentimentLexicon::financial(), IslVariant::spl).signal;
    const auto j = nlohmann::json::parse(to_json_line(inst, sig));
    CHECK(j["isl"]["variant"] == "SPL");
    CHECK(j["isl"]["Q"] == std::vector<int>{0, 1, 1, 1});
    CHECK(j["id"] == "t");
  }
}
