#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssdp/tensor.hpp"
#include "ssdp/vocab.hpp"

namespace ssdp {

/// Which side of the attention matrix is averaged per token: the column
/// (attention a token receives from all queries) or the row of position 0
/// (the distribution the first token, i.e. the sentiment token, gives out).
enum class AttnAxis { received, given };

std::string_view to_string(AttnAxis a);
AttnAxis parse_attn_axis(std::string_view s);

struct EncoderConfig {
  int layers = 4;
  int heads = 4;
  int d_model = 64;
  int d_ff = 128;
  int max_len = 64;
  int vocab_size = 0;

  int head_dim() const { return d_model / heads; }
  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

struct ModelConfig {
  EncoderConfig encoder;
  int num_relations = 2;
  bool sentiment_token = true;  // input carries the prepended sentiment word
  bool saib = true;             // SAIB pooling; mean pooling otherwise
  int last_k = 3;               // layers averaged for alpha_avg, clamped to L
  AttnAxis attn_axis = AttnAxis::received;

  int effective_last_k() const;
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const ParamBlock&) const = default;
};

/// All learnable parameters in one flat buffer, addressed by named blocks.
/// Gradients and optimizer moments use the same layout.
class ModelState {
 public:
  struct LayerBlocks {
    std::size_t ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo;
    std::size_t ln2_g, ln2_b, w1, b1, w2, b2;
  };

  ModelState() = default;

  /// Weights uniform in +-1/sqrt(fan_in), embeddings uniform in +-1, layer
  /// norm gains 1, biases 0.
  static ModelState initialize(ModelConfig config, Vocabulary vocab,
                               std::vector<std::string> relations, std::uint64_t seed);
  /// Rebuilds from stored values (checkpoint load). Throws on size mismatch.
  static ModelState from_values(ModelConfig config, Vocabulary vocab,
                                std::vector<std::string> relations, std::uint64_t seed,
                                std::vector<double> values);

  const ModelConfig& config() const { return config_; }
  const Vocabulary& vocab() const { return vocab_; }
  const std::vector<std::string>& relations() const { return relations_; }
  std::uint64_t seed() const { return seed_; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::size_t parameter_count() const { return values_.size(); }

  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::size_t find(std::string_view name) const;

  MatView block(std::size_t idx) { return view(std::span<double>(values_), idx); }
  ConstMatView block(std::size_t idx) const { return view(std::span<const double>(values_), idx); }
  MatView view(std::span<double> buffer, std::size_t idx) const;
  ConstMatView view(std::span<const double> buffer, std::size_t idx) const;

  const LayerBlocks& layer(int l) const { return layers_[l]; }
  std::size_t embed_block() const { return embed_; }
  std::size_t final_gain_block() const { return lnf_g_; }
  std::size_t final_bias_block() const { return lnf_b_; }
  std::size_t saib_weight_block() const { return saib_w_; }
  std::size_t saib_bias_block() const { return saib_b_; }
  std::size_t classifier_weight_block() const { return cls_w_; }
  std::size_t classifier_bias_block() const { return cls_b_; }

  const Matrix& positional() const { return positional_; }

  bool all_finite() const;
  bool operator==(const ModelState& o) const;

 private:
  void layout();

  ModelConfig config_;
  Vocabulary vocab_;
  std::vector<std::string> relations_;
  std::uint64_t seed_ = 0;
  std::vector<double> values_;
  std::vector<ParamBlock> blocks_;
  std::vector<LayerBlocks> layers_;
  std::size_t embed_ = 0, lnf_g_ = 0, lnf_b_ = 0, saib_w_ = 0, saib_b_ = 0, cls_w_ = 0, cls_b_ = 0;
  Matrix positional_;
};

/// [layer][head] -> n x n row-stochastic attention matrix.
using AttentionRecord = std::vector<std::vector<Matrix>>;

/// Per-layer intermediates kept for the backward pass.
struct LayerCache {
  Matrix input;  // residual stream entering the layer
  Matrix ln1;
  std::vector<double> ln1_mean, ln1_rstd;
  Matrix q, k, v;
  std::vector<Matrix> attn;  // per head
  Matrix context;
  Matrix mid;  // residual stream after attention
  Matrix ln2;
  std::vector<double> ln2_mean, ln2_rstd;
  Matrix ff_pre;
  Matrix ff_act;
};

struct ForwardCache {
  std::vector<int> ids;
  std::vector<LayerCache> layers;
  Matrix final_input;
  std::vector<double> lnf_mean, lnf_rstd;
};

struct EncoderOutput {
  Matrix r_base;  // n x d final token features
  AttentionRecord attention;

  /// Feature of the sentiment token (position 0).
  std::span<const double> r_sen() const { return r_base.row(0); }
};

/// Pre-LN transformer encoder with sinusoidal positions. Throws
/// ValidationError for an unknown token id or an over-long input.
EncoderOutput encode(const ModelState& state, std::span<const int> ids,
                     ForwardCache* cache = nullptr);

/// Accumulates parameter gradients into `grads` (same layout as the state)
/// given upstream gradients for the final features and, optionally, for the
/// attention matrices (same shape as the record; empty = none).
void encode_backward(const ModelState& state, const ForwardCache& cache,
                     ConstMatView grad_features, const AttentionRecord& grad_attention,
                     std::span<double> grads);

/// alpha_avg over the last min(last_k, L) layers and all heads. For
/// `received`, entry j is the mean of column j over every query row.
std::vector<double> average_attention(const AttentionRecord& record, int last_k,
                                      AttnAxis axis = AttnAxis::received);

/// Adds d loss / d record into `grad_record` (allocated on demand) given
/// d loss / d alpha_avg.
void average_attention_backward(std::span<const double> grad_avg, std::size_t layers,
                                std::size_t heads, int last_k, AttnAxis axis,
                                AttentionRecord& grad_record);

/// JSON checkpoint with a config header. Doubles are written in shortest
/// round-trip form, so save/load is bit-exact.
void save_checkpoint(const std::filesystem::path& path, const ModelState& state);
ModelState load_checkpoint(const std::filesystem::path& path);
std::string checkpoint_json(const ModelState& state);

}  // namespace ssdp
