#pragma once

#include <span>
#include <string>
#include <vector>

#include "ssdp/corpus.hpp"
#include "ssdp/encoder.hpp"
#include "ssdp/labels.hpp"
#include "ssdp/objectives.hpp"
#include "ssdp/sentiment.hpp"

namespace ssdp {

/// One instance lowered to model input: token ids plus cached label signals
/// expressed over those same positions.
struct Example {
  std::string id;
  std::string relation;
  int gold = 0;
  std::vector<int> ids;
  IslSignal signal;                   // ASP target for the configured variant
  std::vector<std::uint8_t> isl_mask;  // full ISL positions, for attention-mass reporting
  Sentiment sentiment = Sentiment::positive;
  bool sdp_connected = true;
  bool sentiment_defaulted = false;
};

/// With `sentiment_token` the sentiment word is prepended and every signal
/// is re-based; without it the sentiment position is simply absent, so the
/// ISL variant degenerates to SPL.
Example prepare_example(const Instance& inst, const Vocabulary& vocab,
                        const std::vector<std::string>& relations, const SentimentLexicon& lexicon,
                        IslVariant variant, bool sentiment_token);

std::vector<Example> prepare_examples(const std::vector<Instance>& instances,
                                      const ModelState& state, const SentimentLexicon& lexicon,
                                      IslVariant variant);

/// Which loss terms contribute to the reported total and to the gradient.
struct Terms {
  bool re = true;
  bool asp = false;
  bool ib = false;
};

struct ExampleOutput {
  LossBreakdown loss;
  std::vector<double> probs;
  int predicted = 0;
  std::vector<double> alpha_avg;
  std::vector<double> alpha_ib;  // uniform when SAIB pooling is off
  bool asp_fallback = false;
};

/// Forward pass through encoder, pooling, classifier and the enabled loss
/// terms. When `grads` is non-empty, accumulates `weight` times the
/// gradient of the reported total into it. `asp_scale` multiplies only the
/// ASP term's gradient contribution (batch reduction choice).
ExampleOutput run_example(const ModelState& state, const Example& ex, const Terms& terms,
                          const AspConfig& asp, std::span<double> grads = {}, double weight = 1.0,
                          double asp_scale = 1.0);

/// Sum over ISL positions of alpha_avg.
double isl_mass(const Example& ex, std::span<const double> alpha_avg);

}  // namespace ssdp
