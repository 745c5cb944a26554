#include "ssdp/model.hpp"

#include <algorithm>

#include "ssdp/error.hpp"

namespace ssdp {

Example prepare_example(const Instance& inst, const Vocabulary& vocab,
                        const std::vector<std::string>& relations, const SentimentLexicon& lexicon,
                        IslVariant variant, bool sentiment_token) {
  Example ex;
  ex.id = inst.id;
  ex.relation = inst.relation;
  const auto it = std::find(relations.begin(), relations.end(), inst.relation);
  if (it == relations.end()) {
    throw ValidationError("sentence " + inst.id + ": relation '" + inst.relation + "' unknown to model");
  }
  ex.gold = static_cast<int>(it - relations.begin());

  const Annotation a = annotate(inst, lexicon, variant);
  const IslSignal full = build_signal(a.augmented, a.sdp_augmented, IslVariant::isl);
  ex.sentiment = a.tag.value;
  ex.sentiment_defaulted = a.tag.defaulted;
  ex.sdp_connected = a.sdp.connected;

  if (sentiment_token) {
    for (const auto& w : a.augmented.tokens) ex.ids.push_back(vocab.id(lowercase(w)));
    ex.signal = a.signal;
    ex.isl_mask = full.mask;
  } else {
    for (const auto& t : inst.tokens) ex.ids.push_back(vocab.id(lowercase(t.surface)));
    ex.signal = signal_from_mask(variant, {a.signal.mask.begin() + 1, a.signal.mask.end()});
    ex.isl_mask.assign(full.mask.begin() + 1, full.mask.end());
  }
  return ex;
}

std::vector<Example> prepare_examples(const std::vector<Instance>& instances,
                                      const ModelState& state, const SentimentLexicon& lexicon,
                                      IslVariant variant) {
  std::vector<Example> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    out.push_back(prepare_example(inst, state.vocab(), state.relations(), lexicon, variant,
                                  state.config().sentiment_token));
  }
  return out;
}

double isl_mass(const Example& ex, std::span<const double> alpha_avg) {
  double mass = 0.0;
  for (std::size_t i = 0; i < alpha_avg.size(); ++i) {
    if (ex.isl_mask[i]) mass += alpha_avg[i];
  }
  return mass;
}

ExampleOutput run_example(const ModelState& state, const Example& ex, const Terms& terms,
                          const AspConfig& asp, std::span<double> grads, double weight,
                          double asp_scale) {
  const ModelConfig& cfg = state.config();
  ForwardCache cache;
  const EncoderOutput enc = encode(state, ex.ids, grads.empty() ? nullptr : &cache);
  const std::size_t n = ex.ids.size();
  const auto d = static_cast<std::size_t>(cfg.encoder.d_model);

  ExampleOutput out;
  out.alpha_avg = average_attention(enc.attention, cfg.effective_last_k(), cfg.attn_axis);

  const auto saib_w = state.block(state.saib_weight_block()).row(0);
  const double saib_b = state.block(state.saib_bias_block())(0, 0);
  if (cfg.saib) {
    out.alpha_ib = saib_attention(enc.r_base, enc.r_sen(), saib_w, saib_b);
  } else {
    out.alpha_ib.assign(n, 1.0 / static_cast<double>(n));
  }
  const auto pooled = pool(enc.r_base, out.alpha_ib);
  const ReResult re = re_loss(pooled, state.block(state.classifier_weight_block()),
                              state.block(state.classifier_bias_block()).row(0), ex.gold);
  out.probs = re.probs;
  out.predicted = static_cast<int>(std::max_element(re.probs.begin(), re.probs.end()) - re.probs.begin());

  AspResult asp_result;
  if (terms.asp) {
    asp_result = asp_loss(out.alpha_avg, ex.signal, asp);
    out.asp_fallback = asp_result.fallback;
  }
  EntropyResult entropy;
  const bool use_ib = terms.ib && cfg.saib;
  if (use_ib) entropy = saib_entropy_loss(out.alpha_ib);

  out.loss = total_loss(terms.re ? re.loss : 0.0, terms.asp ? asp_result.loss : 0.0,
                        use_ib ? entropy.loss : 0.0);
  if (grads.empty()) return out;

  Matrix d_features(n, d);
  std::vector<double> d_alpha(n, 0.0);
  bool alpha_touched = false;
  if (terms.re) {
    auto g = [&](std::size_t idx) { return state.view(grads, idx); };
    kernels::axpy(weight, re.grad_weight.flat(), g(state.classifier_weight_block()).flat());
    kernels::axpy(weight, re.grad_bias, g(state.classifier_bias_block()).row(0));
    for (std::size_t i = 0; i < n; ++i) {
      kernels::axpy(weight * out.alpha_ib[i], re.grad_pooled, d_features.row(i));
      d_alpha[i] += weight * kernels::dot(enc.r_base.row(i), re.grad_pooled);
    }
    alpha_touched = cfg.saib;
  }
  if (use_ib) {
    kernels::axpy(weight, entropy.grad, d_alpha);
    alpha_touched = true;
  }
  if (alpha_touched) {
    const auto ds = softmax_backward(out.alpha_ib, d_alpha);
    double ds_sum = 0.0;
    const auto gw = state.view(grads, state.saib_weight_block()).row(0);
    for (std::size_t i = 0; i < n; ++i) {
      ds_sum += ds[i];
      kernels::axpy(ds[i], enc.r_base.row(i), gw.first(d));
      kernels::axpy(ds[i], saib_w.first(d), d_features.row(i));
    }
    kernels::axpy(ds_sum, enc.r_sen(), gw.subspan(d, d));
    state.view(grads, state.saib_bias_block())(0, 0) += ds_sum;
    kernels::axpy(ds_sum, saib_w.subspan(d, d), d_features.row(0));
  }

  AttentionRecord d_attention;
  if (terms.asp && !asp_result.fallback) {
    std::vector<double> g = asp_result.grad;
    for (auto& v : g) v *= weight * asp_scale;
    average_attention_backward(g, static_cast<std::size_t>(cfg.encoder.layers),
                               static_cast<std::size_t>(cfg.encoder.heads), cfg.effective_last_k(),
                               cfg.attn_axis, d_attention);
  }
  encode_backward(state, cache, d_features, d_attention, grads);
  return out;
}

}  // namespace ssdp
