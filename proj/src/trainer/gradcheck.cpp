#include "ssdp/gradcheck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "json.hpp"

namespace ssdp {

namespace {

constexpr std::array<const char*, 4> kTermNames{"re", "asp", "ib", "total"};

Terms term_set(std::size_t t) {
  switch (t) {
    case 0: return {true, false, false};
    case 1: return {false, true, false};
    case 2: return {false, false, true};
    default: return {true, true, true};
  }
}

double term_value(const LossBreakdown& b, std::size_t t) {
  switch (t) {
    case 0: return b.l_re;
    case 1: return b.l_asp;
    case 2: return b.l_ib;
    default: return b.total;
  }
}

bool selected(const std::string& name, const std::vector<std::string>& prefixes) {
  if (prefixes.empty()) return true;
  return std::any_of(prefixes.begin(), prefixes.end(),
                     [&](const std::string& p) { return name.rfind(p, 0) == 0; });
}

}  // namespace

GradientFn backprop_gradient() {
  return [](const ModelState& s, const Example& ex, const Terms& terms, const AspConfig& asp,
            std::span<double> grads) { run_example(s, ex, terms, asp, grads); };
}

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

bool GradcheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.pass; });
}

double GradcheckReport::max_rel_error() const {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

std::vector<GradcheckEntry> GradcheckReport::failures() const {
  std::vector<GradcheckEntry> out;
  for (const auto& e : entries) {
    if (!e.pass) out.push_back(e);
  }
  return out;
}

std::string GradcheckReport::to_text() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "gradcheck: %zu examples, step %.1e, threshold %.1e\n",
                examples, step, threshold);
  out += line;
  for (const auto& e : entries) {
    std::snprintf(line, sizeof line, "%-5s %-28s n=%-6zu rel=%.3e abs=%.3e %s\n", e.term.c_str(),
                  e.block.c_str(), e.coordinates, e.max_rel_error, e.max_abs_error,
                  e.pass ? "ok" : "FAIL");
    out += line;
  }
  out += passed() ? "result: pass\n" : "result: FAIL\n";
  return out;
}

std::string GradcheckReport::to_json() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["threshold"] = threshold;
  j["examples"] = examples;
  j["passed"] = passed();
  j["max_rel_error"] = max_rel_error();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : entries) {
    arr.push_back({{"term", e.term},
                   {"block", e.block},
                   {"coordinates", e.coordinates},
                   {"max_rel_error", e.max_rel_error},
                   {"max_abs_error", e.max_abs_error},
                   {"pass", e.pass}});
  }
  j["entries"] = arr;
  return j.dump(2);
}

GradcheckReport gradcheck(ModelState& state, const std::vector<Example>& examples,
                          const GradcheckOptions& options) {
  GradcheckReport report;
  report.step = options.step;
  report.threshold = options.threshold;
  report.examples = examples.size();
  const GradientFn analytic = options.analytic ? options.analytic : backprop_gradient();
  const auto& blocks = state.blocks();

  std::vector<std::size_t> chosen;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (selected(blocks[b].name, options.blocks)) chosen.push_back(b);
  }
  // entries indexed [term][chosen block]
  std::vector<std::vector<GradcheckEntry>> acc(kTermNames.size());
  for (std::size_t t = 0; t < kTermNames.size(); ++t) {
    for (std::size_t b : chosen) acc[t].push_back({kTermNames[t], blocks[b].name, 0, 0.0, 0.0, true});
  }

  auto values = state.values();
  const double h = options.step;
  for (const auto& ex : examples) {
    std::array<std::vector<double>, kTermNames.size()> grads;
    for (std::size_t t = 0; t < kTermNames.size(); ++t) {
      grads[t].assign(values.size(), 0.0);
      analytic(state, ex, term_set(t), options.asp, grads[t]);
    }
    const std::set<int> used(ex.ids.begin(), ex.ids.end());
    const Terms all{true, true, true};
    for (std::size_t c = 0; c < chosen.size(); ++c) {
      const ParamBlock& blk = blocks[chosen[c]];
      for (std::size_t r = 0; r < blk.rows; ++r) {
        if (chosen[c] == state.embed_block() && !used.count(static_cast<int>(r))) continue;
        for (std::size_t col = 0; col < blk.cols; ++col) {
          const std::size_t i = blk.offset + r * blk.cols + col;
          const double orig = values[i];
          values[i] = orig + h;
          const LossBreakdown plus = run_example(state, ex, all, options.asp).loss;
          values[i] = orig - h;
          const LossBreakdown minus = run_example(state, ex, all, options.asp).loss;
          values[i] = orig;
          for (std::size_t t = 0; t < kTermNames.size(); ++t) {
            const double numeric = (term_value(plus, t) - term_value(minus, t)) / (2.0 * h);
            auto& e = acc[t][c];
            ++e.coordinates;
            e.max_abs_error = std::max(e.max_abs_error, std::abs(grads[t][i] - numeric));
            e.max_rel_error =
                std::max(e.max_rel_error, relative_error(grads[t][i], numeric, options.floor));
          }
        }
      }
    }
  }
  for (auto& per_term : acc) {
    for (auto& e : per_term) {
      e.pass = e.max_rel_error <= options.threshold;
      report.entries.push_back(e);
    }
  }
  return report;
}

ModelConfig gradcheck_model_config(int vocab_size, int num_relations) {
  ModelConfig c;
  c.encoder.layers = 4;
  c.encoder.heads = 2;
  c.encoder.d_model = 16;
  c.encoder.d_ff = 32;
  c.encoder.max_len = 64;
  c.encoder.vocab_size = vocab_size;
  c.num_relations = num_relations;
  c.sentiment_token = true;
  c.saib = true;
  c.last_k = 3;
  return c;
}

}  // namespace ssdp
