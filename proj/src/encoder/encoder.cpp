#include "ssdp/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "ssdp/error.hpp"
#include "ssdp/rng.hpp"

namespace ssdp {

std::string_view to_string(AttnAxis a) { return a == AttnAxis::given ? "given" : "received"; }

AttnAxis parse_attn_axis(std::string_view s) {
  if (s == "received") return AttnAxis::received;
  if (s == "given") return AttnAxis::given;
  throw ConfigError("attn_axis must be 'received' or 'given', got '" + std::string(s) + "'");
}

void EncoderConfig::validate() const {
  if (layers < 1 || heads < 1 || d_model < 1 || d_ff < 1 || max_len < 1 || vocab_size < 1) {
    throw ConfigError("encoder dimensions must all be >= 1");
  }
  if (d_model % heads != 0) throw ConfigError("d_model must be divisible by heads");
}

int ModelConfig::effective_last_k() const { return std::min(last_k, encoder.layers); }

void ModelConfig::validate() const {
  encoder.validate();
  if (num_relations < 1) throw ConfigError("need at least one relation");
  if (last_k < 1) throw ConfigError("last_k must be >= 1");
  if (saib && !sentiment_token) throw ConfigError("SAIB pooling needs the sentiment token");
}

// ---- parameters ---------------------------------------------------------

void ModelState::layout() {
  const auto d = static_cast<std::size_t>(config_.encoder.d_model);
  const auto ff = static_cast<std::size_t>(config_.encoder.d_ff);
  const auto vocab = static_cast<std::size_t>(config_.encoder.vocab_size);
  const auto classes = static_cast<std::size_t>(config_.num_relations);
  blocks_.clear();
  layers_.clear();
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    blocks_.push_back({std::move(name), rows, cols, offset});
    offset += rows * cols;
    return blocks_.size() - 1;
  };
  embed_ = add("embed", vocab, d);
  for (int l = 0; l < config_.encoder.layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerBlocks lb{};
    lb.ln1_g = add(p + "ln1.gain", 1, d);
    lb.ln1_b = add(p + "ln1.bias", 1, d);
    lb.wq = add(p + "attn.wq", d, d);
    lb.bq = add(p + "attn.bq", 1, d);
    lb.wk = add(p + "attn.wk", d, d);
    lb.bk = add(p + "attn.bk", 1, d);
    lb.wv = add(p + "attn.wv", d, d);
    lb.bv = add(p + "attn.bv", 1, d);
    lb.wo = add(p + "attn.wo", d, d);
    lb.bo = add(p + "attn.bo", 1, d);
    lb.ln2_g = add(p + "ln2.gain", 1, d);
    lb.ln2_b = add(p + "ln2.bias", 1, d);
    lb.w1 = add(p + "ffn.w1", d, ff);
    lb.b1 = add(p + "ffn.b1", 1, ff);
    lb.w2 = add(p + "ffn.w2", ff, d);
    lb.b2 = add(p + "ffn.b2", 1, d);
    layers_.push_back(lb);
  }
  lnf_g_ = add("final_ln.gain", 1, d);
  lnf_b_ = add("final_ln.bias", 1, d);
  saib_w_ = add("saib.weight", 1, 2 * d);
  saib_b_ = add("saib.bias", 1, 1);
  cls_w_ = add("classifier.weight", d, classes);
  cls_b_ = add("classifier.bias", 1, classes);
  values_.resize(offset);

  const auto len = static_cast<std::size_t>(config_.encoder.max_len);
  positional_ = Matrix(len, d);
  for (std::size_t pos = 0; pos < len; ++pos) {
    for (std::size_t i = 0; i < d; i += 2) {
      const double angle =
          static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
      positional_(pos, i) = std::sin(angle);
      if (i + 1 < d) positional_(pos, i + 1) = std::cos(angle);
    }
  }
}

ModelState ModelState::initialize(ModelConfig config, Vocabulary vocab,
                                  std::vector<std::string> relations, std::uint64_t seed) {
  config.encoder.vocab_size = vocab.size();
  config.num_relations = static_cast<int>(relations.size());
  config.validate();
  ModelState s;
  s.config_ = config;
  s.vocab_ = std::move(vocab);
  s.relations_ = std::move(relations);
  s.seed_ = seed;
  s.layout();

  Rng rng(seed);
  for (const auto& b : s.blocks_) {
    auto data = std::span<double>(s.values_).subspan(b.offset, b.size());
    const bool gain = b.name.ends_with(".gain");
    const bool bias = b.rows == 1 && !gain && b.name != "saib.weight";
    if (gain) {
      std::fill(data.begin(), data.end(), 1.0);
    } else if (bias) {
      std::fill(data.begin(), data.end(), 0.0);
    } else {
      const double fan_in = b.name == "embed" ? 1.0 : static_cast<double>(b.name == "saib.weight" ? b.cols : b.rows);
      const double limit = 1.0 / std::sqrt(fan_in);
      for (auto& v : data) v = rng.uniform(-limit, limit);
    }
  }
  return s;
}

ModelState ModelState::from_values(ModelConfig config, Vocabulary vocab,
                                   std::vector<std::string> relations, std::uint64_t seed,
                                   std::vector<double> values) {
  config.encoder.vocab_size = vocab.size();
  config.num_relations = static_cast<int>(relations.size());
  config.validate();
  ModelState s;
  s.config_ = config;
  s.vocab_ = std::move(vocab);
  s.relations_ = std::move(relations);
  s.seed_ = seed;
  s.layout();
  if (values.size() != s.values_.size()) {
    throw ValidationError("parameter count " + std::to_string(values.size()) + " does not match " +
                          std::to_string(s.values_.size()) + " implied by the config");
  }
  s.values_ = std::move(values);
  return s;
}

std::size_t ModelState::find(std::string_view name) const {
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].name == name) return i;
  }
  throw ValidationError("no parameter block named '" + std::string(name) + "'");
}

MatView ModelState::view(std::span<double> buffer, std::size_t idx) const {
  const auto& b = blocks_[idx];
  return {buffer.data() + b.offset, b.rows, b.cols};
}

ConstMatView ModelState::view(std::span<const double> buffer, std::size_t idx) const {
  const auto& b = blocks_[idx];
  return {buffer.data() + b.offset, b.rows, b.cols};
}

bool ModelState::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool ModelState::operator==(const ModelState& o) const {
  return config_ == o.config_ && vocab_ == o.vocab_ && relations_ == o.relations_ &&
         seed_ == o.seed_ && values_ == o.values_;
}

// ---- forward / backward --------------------------------------------------

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)
constexpr double kGeluA = 0.044715;

void layer_norm(ConstMatView x, std::span<const double> gain, std::span<const double> bias,
                Matrix& out, std::vector<double>& mean, std::vector<double>& rstd) {
  const std::size_t n = x.rows, d = x.cols;
  out = Matrix(n, d);
  mean.assign(n, 0.0);
  rstd.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = x.row(i);
    double mu = 0.0;
    for (double v : row) mu += v;
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (double v : row) var += (v - mu) * (v - mu);
    var /= static_cast<double>(d);
    const double r = 1.0 / std::sqrt(var + kLnEps);
    mean[i] = mu;
    rstd[i] = r;
    for (std::size_t j = 0; j < d; ++j) out(i, j) = (row[j] - mu) * r * gain[j] + bias[j];
  }
}

// dx += LN'(dy); dgain/dbias accumulate.
void layer_norm_backward(ConstMatView x, const std::vector<double>& mean,
                         const std::vector<double>& rstd, std::span<const double> gain,
                         ConstMatView dy, MatView dx, std::span<double> dgain,
                         std::span<double> dbias) {
  const std::size_t n = x.rows, d = x.cols;
  std::vector<double> xhat(d), dxhat(d);
  for (std::size_t i = 0; i < n; ++i) {
    double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      xhat[j] = (x(i, j) - mean[i]) * rstd[i];
      dxhat[j] = dy(i, j) * gain[j];
      dgain[j] += dy(i, j) * xhat[j];
      dbias[j] += dy(i, j);
      sum_dxhat += dxhat[j];
      sum_dxhat_xhat += dxhat[j] * xhat[j];
    }
    const double scale = rstd[i] / static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      dx(i, j) += scale * (static_cast<double>(d) * dxhat[j] - sum_dxhat - xhat[j] * sum_dxhat_xhat);
    }
  }
}

void add_row_bias(Matrix& m, std::span<const double> bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) kernels::axpy(1.0, bias, m.row(i));
}

void add_col_sums(ConstMatView m, std::span<double> out) {
  for (std::size_t i = 0; i < m.rows; ++i) kernels::axpy(1.0, m.row(i), out);
}

// x * W + b
Matrix affine(ConstMatView x, ConstMatView w, std::span<const double> b) {
  Matrix out(x.rows, w.cols);
  gemm_acc(out, x, w);
  add_row_bias(out, b);
  return out;
}

double gelu(double x) {
  return 0.5 * x * (1.0 + std::tanh(kGeluC * (x + kGeluA * x * x * x)));
}

double gelu_grad(double x) {
  const double t = std::tanh(kGeluC * (x + kGeluA * x * x * x));
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

}  // namespace

EncoderOutput encode(const ModelState& state, std::span<const int> ids, ForwardCache* cache) {
  const auto& cfg = state.config().encoder;
  const std::size_t n = ids.size();
  const auto d = static_cast<std::size_t>(cfg.d_model);
  const auto heads = static_cast<std::size_t>(cfg.heads);
  const auto dk = static_cast<std::size_t>(cfg.head_dim());
  if (n == 0) throw ValidationError("empty input sequence");
  if (n > static_cast<std::size_t>(cfg.max_len)) {
    throw ValidationError("sequence length " + std::to_string(n) + " exceeds max_len " +
                          std::to_string(cfg.max_len));
  }
  for (int id : ids) {
    if (id < 0 || id >= cfg.vocab_size) throw ValidationError("unknown token id " + std::to_string(id));
  }

  ForwardCache local;
  ForwardCache& c = cache ? *cache : local;
  c.ids.assign(ids.begin(), ids.end());
  c.layers.assign(cfg.layers, LayerCache{});

  const auto embed = state.block(state.embed_block());
  Matrix x(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = x.row(i);
    kernels::axpy(1.0, embed.row(ids[i]), row);
    kernels::axpy(1.0, state.positional().row(i), row);
  }

  EncoderOutput out;
  out.attention.resize(cfg.layers);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<double> scores(n);

  for (int l = 0; l < cfg.layers; ++l) {
    const auto& lb = state.layer(l);
    LayerCache& lc = c.layers[l];
    lc.input = x;
    layer_norm(x, state.block(lb.ln1_g).row(0), state.block(lb.ln1_b).row(0), lc.ln1, lc.ln1_mean,
               lc.ln1_rstd);
    lc.q = affine(lc.ln1, state.block(lb.wq), state.block(lb.bq).row(0));
    lc.k = affine(lc.ln1, state.block(lb.wk), state.block(lb.bk).row(0));
    lc.v = affine(lc.ln1, state.block(lb.wv), state.block(lb.bv).row(0));
    lc.context = Matrix(n, d);
    lc.attn.assign(heads, Matrix(n, n));
    for (std::size_t h = 0; h < heads; ++h) {
      Matrix& a = lc.attn[h];
      for (std::size_t i = 0; i < n; ++i) {
        const auto qi = lc.q.row(i).subspan(h * dk, dk);
        double top = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
          scores[j] = kernels::dot(qi, lc.k.row(j).subspan(h * dk, dk)) * scale;
          top = std::max(top, scores[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          a(i, j) = std::exp(scores[j] - top);
          sum += a(i, j);
        }
        const auto ctx = lc.context.row(i).subspan(h * dk, dk);
        for (std::size_t j = 0; j < n; ++j) {
          a(i, j) /= sum;
          kernels::axpy(a(i, j), lc.v.row(j).subspan(h * dk, dk), ctx);
        }
      }
    }
    out.attention[l] = lc.attn;

    lc.mid = affine(lc.context, state.block(lb.wo), state.block(lb.bo).row(0));
    kernels::axpy(1.0, x.flat(), lc.mid.flat());
    layer_norm(lc.mid, state.block(lb.ln2_g).row(0), state.block(lb.ln2_b).row(0), lc.ln2,
               lc.ln2_mean, lc.ln2_rstd);
    lc.ff_pre = affine(lc.ln2, state.block(lb.w1), state.block(lb.b1).row(0));
    lc.ff_act = Matrix(n, lc.ff_pre.cols());
    for (std::size_t i = 0; i < lc.ff_pre.size(); ++i) lc.ff_act.flat()[i] = gelu(lc.ff_pre.flat()[i]);
    x = affine(lc.ff_act, state.block(lb.w2), state.block(lb.b2).row(0));
    kernels::axpy(1.0, lc.mid.flat(), x.flat());
  }

  c.final_input = x;
  layer_norm(x, state.block(state.final_gain_block()).row(0),
             state.block(state.final_bias_block()).row(0), out.r_base, c.lnf_mean, c.lnf_rstd);
  return out;
}

void encode_backward(const ModelState& state, const ForwardCache& c, ConstMatView grad_features,
                     const AttentionRecord& grad_attention, std::span<double> grads) {
  const auto& cfg = state.config().encoder;
  const std::size_t n = c.ids.size();
  const auto d = static_cast<std::size_t>(cfg.d_model);
  const auto heads = static_cast<std::size_t>(cfg.heads);
  const auto dk = static_cast<std::size_t>(cfg.head_dim());
  const double scale = 1.0 / std::sqrt(static_cast<double>(dk));
  auto g = [&](std::size_t idx) { return state.view(grads, idx); };

  Matrix dx(n, d);
  layer_norm_backward(c.final_input, c.lnf_mean, c.lnf_rstd,
                      state.block(state.final_gain_block()).row(0), grad_features, dx,
                      g(state.final_gain_block()).row(0), g(state.final_bias_block()).row(0));

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const auto& lb = state.layer(l);
    const LayerCache& lc = c.layers[l];

    // Feed-forward sublayer: x_out = mid + gelu(ln2 W1 + b1) W2 + b2.
    gemm_at_acc(g(lb.w2), lc.ff_act, dx);
    add_col_sums(dx, g(lb.b2).row(0));
    Matrix dpre(n, lc.ff_pre.cols());
    gemm_bt_acc(dpre, dx, state.block(lb.w2));
    for (std::size_t i = 0; i < dpre.size(); ++i) dpre.flat()[i] *= gelu_grad(lc.ff_pre.flat()[i]);
    gemm_at_acc(g(lb.w1), lc.ln2, dpre);
    add_col_sums(dpre, g(lb.b1).row(0));
    Matrix dln2(n, d);
    gemm_bt_acc(dln2, dpre, state.block(lb.w1));
    Matrix dmid = dx;
    layer_norm_backward(lc.mid, lc.ln2_mean, lc.ln2_rstd, state.block(lb.ln2_g).row(0), dln2, dmid,
                        g(lb.ln2_g).row(0), g(lb.ln2_b).row(0));

    // Attention sublayer: mid = input + context Wo + bo.
    gemm_at_acc(g(lb.wo), lc.context, dmid);
    add_col_sums(dmid, g(lb.bo).row(0));
    Matrix dctx(n, d);
    gemm_bt_acc(dctx, dmid, state.block(lb.wo));

    Matrix dq(n, d), dk_m(n, d), dv(n, d);
    std::vector<double> da(n);
    const bool external = !grad_attention.empty() && !grad_attention[l].empty();
    for (std::size_t h = 0; h < heads; ++h) {
      const Matrix& a = lc.attn[h];
      for (std::size_t i = 0; i < n; ++i) {
        const auto dctx_i = dctx.row(i).subspan(h * dk, dk);
        double inner = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          da[j] = kernels::dot(dctx_i, lc.v.row(j).subspan(h * dk, dk));
          if (external) da[j] += grad_attention[l][h](i, j);
          inner += da[j] * a(i, j);
          kernels::axpy(a(i, j), dctx_i, dv.row(j).subspan(h * dk, dk));
        }
        const auto q_i = lc.q.row(i).subspan(h * dk, dk);
        const auto dq_i = dq.row(i).subspan(h * dk, dk);
        for (std::size_t j = 0; j < n; ++j) {
          const double ds = a(i, j) * (da[j] - inner) * scale;
          if (ds == 0.0) continue;
          kernels::axpy(ds, lc.k.row(j).subspan(h * dk, dk), dq_i);
          kernels::axpy(ds, q_i, dk_m.row(j).subspan(h * dk, dk));
        }
      }
    }

    Matrix dln1(n, d);
    gemm_at_acc(g(lb.wq), lc.ln1, dq);
    add_col_sums(dq, g(lb.bq).row(0));
    gemm_bt_acc(dln1, dq, state.block(lb.wq));
    gemm_at_acc(g(lb.wk), lc.ln1, dk_m);
    add_col_sums(dk_m, g(lb.bk).row(0));
    gemm_bt_acc(dln1, dk_m, state.block(lb.wk));
    gemm_at_acc(g(lb.wv), lc.ln1, dv);
    add_col_sums(dv, g(lb.bv).row(0));
    gemm_bt_acc(dln1, dv, state.block(lb.wv));

    dx = dmid;
    layer_norm_backward(lc.input, lc.ln1_mean, lc.ln1_rstd, state.block(lb.ln1_g).row(0), dln1, dx,
                        g(lb.ln1_g).row(0), g(lb.ln1_b).row(0));
  }

  const auto dembed = g(state.embed_block());
  for (std::size_t i = 0; i < n; ++i) kernels::axpy(1.0, dx.row(i), dembed.row(c.ids[i]));
}

// ---- attention averaging -------------------------------------------------

std::vector<double> average_attention(const AttentionRecord& record, int last_k, AttnAxis axis) {
  if (record.empty() || record.back().empty()) return {};
  const std::size_t layers = record.size();
  const std::size_t k = std::min<std::size_t>(std::max(last_k, 1), layers);
  const std::size_t n = record.back().front().rows();
  std::vector<double> avg(n, 0.0);
  std::size_t count = 0;
  for (std::size_t l = layers - k; l < layers; ++l) {
    for (const Matrix& a : record[l]) {
      if (axis == AttnAxis::received) {
        for (std::size_t i = 0; i < n; ++i) kernels::axpy(1.0, a.row(i), avg);
        count += n;
      } else {
        kernels::axpy(1.0, a.row(0), avg);
        count += 1;
      }
    }
  }
  for (auto& v : avg) v /= static_cast<double>(count);
  return avg;
}

void average_attention_backward(std::span<const double> grad_avg, std::size_t layers,
                                std::size_t heads, int last_k, AttnAxis axis,
                                AttentionRecord& grad_record) {
  const std::size_t n = grad_avg.size();
  const std::size_t k = std::min<std::size_t>(std::max(last_k, 1), layers);
  if (grad_record.size() != layers) grad_record.assign(layers, {});
  const double count = static_cast<double>(k * heads * (axis == AttnAxis::received ? n : 1));
  for (std::size_t l = layers - k; l < layers; ++l) {
    if (grad_record[l].size() != heads) grad_record[l].assign(heads, Matrix(n, n));
    for (Matrix& ga : grad_record[l]) {
      const std::size_t rows = axis == AttnAxis::received ? n : 1;
      for (std::size_t i = 0; i < rows; ++i) kernels::axpy(1.0 / count, grad_avg, ga.row(i));
    }
  }
}

}  // namespace ssdp
