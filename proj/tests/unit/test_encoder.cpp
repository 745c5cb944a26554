#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ssdp/encoder.hpp"
#include "ssdp/error.hpp"
#include "ssdp/kernels.hpp"
#include "ssdp/synth.hpp"
#include "support.hpp"

using namespace ssdp;

namespace {

ModelState small_state(std::uint64_t seed, int layers = 3, int heads = 2, int d = 8) {
  const auto splits = synthesize_corpus(default_manifest(seed, 30, 0, 0), 0.9);
  ModelConfig c;
  c.encoder.layers = layers;
  c.encoder.heads = heads;
  c.encoder.d_model = d;
  c.encoder.d_ff = 2 * d;
  c.encoder.max_len = 48;
  return ModelState::initialize(c, Vocabulary::build(splits.at("train")), default_manifest(seed).labels(), seed);
}

std::vector<int> random_ids(Rng& rng, const ModelState& s, std::size_t n) {
  std::vector<int> ids(n);
  for (auto& v : ids) v = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.vocab().size())));
  return ids;
}

}  // namespace

TEST_SUITE("encoder") {
  TEST_CASE("vocabulary fixes the special ids") {
    const Vocabulary v = Vocabulary::build({});
    CHECK(v.id("<unk>") == Vocabulary::kUnk);
    CHECK(v.id("positive") == Vocabulary::kPositive);
    CHECK(v.id("negative") == Vocabulary::kNegative);
    CHECK(v.id("never-seen") == Vocabulary::kUnk);
  }

  TEST_CASE("config validation") {
    ModelConfig c;
    c.encoder.vocab_size = 10;
    CHECK_NOTHROW(c.validate());
    auto bad = c;
    bad.encoder.d_model = 10;
    bad.encoder.heads = 4;
    CHECK_THROWS(bad.validate());
    auto nosen = c;
    nosen.sentiment_token = false;
    CHECK_THROWS(nosen.validate());
    c.encoder.layers = 2;
    c.last_k = 3;
    CHECK(c.effective_last_k() == 2);
    CHECK(parse_attn_axis("given") == AttnAxis::given);
  }

  TEST_CASE("initialization ranges") {
    const ModelState s = small_state(3);
    for (std::size_t b = 0; b < s.blocks().size(); ++b) {
      const auto& blk = s.blocks()[b];
      const auto v = s.block(b).flat();
      if (blk.name.ends_with(".gain")) {
        for (double x : v) CHECK(x == 1.0);
      } else if (blk.name == "embed") {
        for (double x : v) CHECK(std::abs(x) <= 1.0);
      } else if (blk.rows == 1 && blk.name != "saib.weight") {
        for (double x : v) CHECK(x == 0.0);
      } else {
        const double fan_in = blk.name == "saib.weight" ? blk.cols : blk.rows;
        for (double x : v) CHECK(std::abs(x) <= 1.0 / std::sqrt(fan_in));
      }
    }
    CHECK(s.all_finite());
    CHECK(s == small_state(3));
    CHECK_FALSE(s == small_state(4));
  }

  TEST_CASE("attention is row-stochastic and alpha_avg is a distribution") {
    const ModelState s = small_state(5);
    Rng rng(1);
    for (int t = 0; t < 10; ++t) {
      const auto ids = random_ids(rng, s, 1 + rng.below(20));
      const auto out = encode(s, ids);
      CHECK(out.r_base.rows() == ids.size());
      REQUIRE(out.attention.size() == 3);
      for (const auto& layer : out.attention) {
        REQUIRE(layer.size() == 2);
        for (const auto& a : layer) {
          for (std::size_t i = 0; i < a.rows(); ++i) {
            double sum = 0.0;
            for (double x : a.row(i)) sum += x;
            CHECK(std::abs(sum - 1.0) <= 1e-12);
          }
        }
      }
      for (auto axis : {AttnAxis::received, AttnAxis::given}) {
        for (int k : {1, 3, 7}) {
          const auto avg = average_attention(out.attention, k, axis);
          double sum = 0.0;
          for (double x : avg) sum += x;
          CHECK(std::abs(sum - 1.0) <= 1e-6);
        }
      }
    }
  }

  TEST_CASE("alpha_avg matches a direct column mean") {
    const ModelState s = small_state(6);
    Rng rng(2);
    const auto ids = random_ids(rng, s, 7);
    const auto out = encode(s, ids);
    const auto avg = average_attention(out.attention, 2, AttnAxis::received);
    for (std::size_t j = 0; j < 7; ++j) {
      double m = 0.0;
      for (int l = 1; l < 3; ++l) {
        for (const auto& a : out.attention[l]) {
          for (std::size_t i = 0; i < 7; ++i) m += a(i, j);
        }
      }
      CHECK(avg[j] == doctest::Approx(m / (2 * 2 * 7)).epsilon(1e-14));
    }
    const auto given = average_attention(out.attention, 3, AttnAxis::given);
    double g0 = 0.0;
    for (const auto& layer : out.attention) g0 += layer[0](0, 3) + layer[1](0, 3);
    CHECK(given[3] == doctest::Approx(g0 / 6).epsilon(1e-14));
  }

  TEST_CASE("input validation") {
    const ModelState s = small_state(7);
    CHECK_THROWS_AS(encode(s, std::vector<int>{}), ValidationError);
    CHECK_THROWS_AS(encode(s, std::vector<int>{s.vocab().size()}), ValidationError);
    CHECK_THROWS_AS(encode(s, std::vector<int>(49, 1)), ValidationError);
  }

  TEST_CASE("scalar and avx2 encoders agree") {
    if (!kernels::available(kernels::Backend::avx2)) return;
    const ModelState s = small_state(8, 2, 2, 16);
    Rng rng(3);
    const auto ids = random_ids(rng, s, 15);
    EncoderOutput a, b;
    {
      kernels::ScopedBackend scope(kernels::Backend::scalar);
      a = encode(s, ids);
    }
    {
      kernels::ScopedBackend scope(kernels::Backend::avx2);
      b = encode(s, ids);
    }
    for (std::size_t i = 0; i < a.r_base.flat().size(); ++i) {
      CHECK(std::abs(a.r_base.flat()[i] - b.r_base.flat()[i]) <= 1e-12);
    }
  }

  TEST_CASE("checkpoint round trip is bit-exact") {
    const ModelState s = small_state(9);
    const auto path = std::filesystem::temp_directory_path() / "ssdp-ckpt.json";
    save_checkpoint(path, s);
    const ModelState back = load_checkpoint(path);
    CHECK(back == s);
    CHECK(back.config() == s.config());
    CHECK(back.vocab() == s.vocab());
    CHECK(back.relations() == s.relations());
    for (std::size_t i = 0; i < s.values().size(); ++i) {
      CHECK(std::memcmp(&back.values()[i], &s.values()[i], sizeof(double)) == 0);
    }
    CHECK(checkpoint_json(back) == checkpoint_json(s));
  }

  TEST_CASE("corrupt checkpoints are rejected") {
    const auto path = std::filesystem::temp_directory_path() / "ssdp-bad.json";
    std::ofstream(path) << "{\"format\": \"other\"}";
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
    std::ofstream(path) << "not json";
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
}
