// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion
// numbers as arguments to run a subset.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ssdp/evalkit.hpp"
#include "ssdp/gradcheck.hpp"
#include "ssdp/labels.hpp"
#include "ssdp/objectives.hpp"
#include "ssdp/syntax.hpp"
#include "ssdp/trainer.hpp"
#include "support.hpp"

using namespace ssdp;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Corpus coupled_corpus(std::uint64_t seed) {
  const auto m = default_manifest(seed);
  return {m, synthesize_corpus(m, 0.9)};
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (double x : v) out += (out.empty() ? "" : " ") + fmt("%.4f", x);
  return out;
}

double test_f1(const TrainConfig& cfg, const Corpus& corpus) {
  const auto res = train(cfg, corpus);
  return evaluate(res.final, corpus.splits.at("test"), corpus.manifest, SentimentLexicon::financial(),
                  cfg.isl_variant)
      .micro_f1;
}

Outcome sdp_oracle() {
  const auto t0 = Clock::now();
  Rng rng(500);
  int bfs_ok = 0, lca_ok = 0;
  const int trials = 500;
  for (int t = 0; t < trials; ++t) {
    const int n = 1 + static_cast<int>(rng.below(40));
    const Instance inst = testing::random_tree_instance(rng, n);
    std::vector<int> heads;
    for (const auto& tok : inst.tokens) heads.push_back(tok.head);
    const int s = static_cast<int>(rng.below(n)), o = static_cast<int>(rng.below(n));
    const auto r = extract_sdp(DepGraph(inst), s, o);
    bfs_ok += static_cast<int>(r.path.size()) - 1 == testing::bfs_distance(testing::adjacency_from_heads(heads), s, o);
    lca_ok += r.path == testing::lca_path(heads, s, o);
  }
  const double secs = seconds_since(t0);
  return {bfs_ok == trials && lca_ok == trials && secs < 5.0,
          fmt("BFS %d/%d, LCA %d/%d, %.3fs", bfs_ok, trials, lca_ok, trials, secs)};
}

Outcome label_hierarchy() {
  const auto splits = synthesize_corpus(default_manifest(2, 2000, 0, 0), 0.9);
  const auto& lex = SentimentLexicon::financial();
  std::size_t nested = 0, n = 0;
  double worst = 0.0;
  auto subset = [](const std::vector<int>& a, const std::vector<int>& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
  };
  for (const auto& inst : splits.at("train")) {
    const auto e = annotate(inst, lex, IslVariant::epl).signal;
    const auto s = annotate(inst, lex, IslVariant::spl).signal;
    const auto i = annotate(inst, lex, IslVariant::isl).signal;
    nested += subset(e.positions(), s.positions()) && subset(s.positions(), i.positions());
    for (const auto* sig : {&e, &s, &i}) {
      worst = std::max(worst, std::abs(std::accumulate(sig->dist.begin(), sig->dist.end(), 0.0) - 1.0));
    }
    ++n;
  }
  return {n == 2000 && nested == n && worst <= 1e-12,
          fmt("nested %zu/%zu, max |sum q - 1| = %.2e", nested, n, worst)};
}

Outcome gradient_suite() {
  const auto t0 = Clock::now();
  const auto m = default_manifest(3, 20, 0, 0);
  const auto train_split = synthesize_corpus(m, 0.9).at("train");
  const Vocabulary vocab = Vocabulary::build(train_split);
  ModelState state = ModelState::initialize(gradcheck_model_config(vocab.size(), m.labels().size()), vocab,
                                            m.labels(), 3);
  const auto examples = prepare_examples(train_split, state, SentimentLexicon::financial(), IslVariant::isl);
  const GradcheckReport rep = gradcheck(state, examples);
  double re = 0, asp = 0, ib = 0, total = 0;
  for (const auto& e : rep.entries) {
    double& slot = e.term == "re" ? re : e.term == "asp" ? asp : e.term == "ib" ? ib : total;
    slot = std::max(slot, e.max_rel_error);
  }
  const double secs = seconds_since(t0);
  return {rep.passed() && examples.size() >= 20 && secs < 120.0,
          fmt("%zu instances, max rel err re %.1e asp %.1e ib %.1e total %.1e, %.1fs", examples.size(), re, asp,
              ib, total, secs)};
}

Outcome closed_forms() {
  Rng rng(4);
  double kl = 0, ent_uniform = 0, ent_onehot = 0, shift = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(30);
    const auto p = testing::random_simplex(rng, n);
    kl = std::max(kl, std::abs(kl_divergence(p, p)));
    const std::vector<double> u(n, 1.0 / static_cast<double>(n));
    ent_uniform = std::max(ent_uniform, std::abs(saib_entropy_loss(u).loss - std::log(static_cast<double>(n))));
    std::vector<double> one(n, 0.0);
    one[rng.below(n)] = 1.0;
    ent_onehot = std::max(ent_onehot, std::abs(saib_entropy_loss(one).loss));
    std::vector<double> x(n), y(n);
    const double c = rng.uniform(-50, 50);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-10, 10);
      y[i] = x[i] + c;
    }
    const auto a = softmax(x), b = softmax(y);
    for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, std::abs(a[i] - b[i]));
  }
  return {kl <= 1e-10 && ent_uniform <= 1e-10 && ent_onehot == 0.0 && shift <= 1e-10,
          fmt("KLD(p||p) %.1e, H(uniform)-log n %.1e, H(one-hot) %.1e, softmax shift %.1e", kl, ent_uniform,
              ent_onehot, shift)};
}

Outcome saib_sparsification() {
  const auto m = default_manifest(5, 64, 0, 0);
  const auto train_split = synthesize_corpus(m, 0.9).at("train");
  const Vocabulary vocab = Vocabulary::build(train_split);
  int decreasing = 0, monotone = 0;
  std::vector<double> drops;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    TrainConfig cfg;
    cfg.mode = Mode::saib;
    cfg.seed = seed;
    ModelState state = ModelState::initialize(cfg.model_config(vocab.size(), m.labels().size()), vocab,
                                              m.labels(), seed);
    const auto examples = prepare_examples(train_split, state, SentimentLexicon::financial(), cfg.isl_variant);
    const Terms ib_only{false, false, true};
    auto entropy = [&] {
      double h = 0.0;
      for (const auto& ex : examples) h += saib_entropy_loss(run_example(state, ex, ib_only, AspConfig{}).alpha_ib).loss;
      return h / static_cast<double>(examples.size());
    };
    Optimizer opt(cfg, state.values().size());
    std::vector<double> grads(state.values().size());
    double prev = entropy();
    const double start = prev;
    bool strict = true;
    for (int step = 1; step <= 50; ++step) {
      std::fill(grads.begin(), grads.end(), 0.0);
      batch_gradient(state, examples, ib_only, AspConfig{}, AspReduction::mean, grads, step);
      opt.step(state.values(), grads);
      const double h = entropy();
      strict = strict && h < prev;
      prev = h;
    }
    decreasing += prev < start;
    monotone += strict;
    drops.push_back(start - prev);
  }
  return {decreasing >= 19,
          fmt("%d/20 seeds end below start (%d/20 decrease at every step), mean entropy drop %.4f", decreasing,
              monotone, mean(drops))};
}

Outcome asp_attention_shift() {
  int shifted = 0;
  std::vector<double> gains;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Corpus corpus = coupled_corpus(seed);
    TrainConfig cfg;
    cfg.mode = Mode::asp;
    cfg.seed = seed;
    std::vector<Example> dev;
    double first = 0.0, last = 0.0;
    train(cfg, corpus, {}, [&](int epoch, const ModelState& state) {
      if (dev.empty()) dev = prepare_examples(corpus.splits.at("dev"), state, SentimentLexicon::financial(), IslVariant::isl);
      const auto p = predict(state, dev);
      (epoch == 0 ? first : last) = mean(p.isl_mass);
    });
    gains.push_back(last - first);
    shifted += last - first >= 0.05;
  }
  return {shifted >= 4, fmt("%d/5 seeds gain >= 0.05; gains %s", shifted, join(gains).c_str())};
}

Outcome directional_gain() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::vector<double> gains;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Corpus corpus = coupled_corpus(seed);
    TrainConfig base, full;
    base.mode = Mode::baseline;
    full.mode = Mode::asp_saib;
    base.seed = full.seed = seed;
    const double b = test_f1(base, corpus), f = test_f1(full, corpus);
    wins += f >= b;
    gains.push_back(f - b);
  }
  const double secs = seconds_since(t0);
  return {wins >= 4 && mean(gains) > 0.0 && secs < 600.0,
          fmt("%d/5 wins, mean gain %+.4f; gains %s; %.0fs", wins, mean(gains), join(gains).c_str(), secs)};
}

Outcome ablation_ordering() {
  std::vector<double> isl, spl, epl;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Corpus corpus = coupled_corpus(seed);
    for (auto [variant, out] : {std::pair{IslVariant::isl, &isl}, {IslVariant::spl, &spl}, {IslVariant::epl, &epl}}) {
      TrainConfig cfg;
      cfg.seed = seed;
      cfg.isl_variant = variant;
      out->push_back(test_f1(cfg, corpus));
    }
  }
  return {mean(isl) >= mean(spl) && mean(isl) >= mean(epl),
          fmt("mean F1 ISL %.4f SPL %.4f EPL %.4f", mean(isl), mean(spl), mean(epl))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto m = default_manifest(9, 400, 80, 80);
  const Corpus corpus{m, synthesize_corpus(m, 0.9)};
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 9;
  const fs::path root = fs::temp_directory_path() / "ssdp-acceptance-determinism";
  fs::remove_all(root);
  train(cfg, corpus, root / "a");
  train(cfg, corpus, root / "b");
  int same = 0;
  const char* files[] = {"metrics.csv", "checkpoints/initial.json", "checkpoints/final.json"};
  for (const char* f : files) {
    const std::string a = slurp(root / "a" / f);
    same += !a.empty() && a == slurp(root / "b" / f);
  }
  fs::remove_all(root);
  return {same == 3, fmt("%d/3 artifacts byte-identical", same)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"SDP oracle", sdp_oracle},
      {"label hierarchy", label_hierarchy},
      {"gradient suite", gradient_suite},
      {"closed-form losses", closed_forms},
      {"SAIB sparsification", saib_sparsification},
      {"ASP attention shift", asp_attention_shift},
      {"directional gain", directional_gain},
      {"ablation ordering", ablation_ordering},
      {"determinism", determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
