#include "ssdp/objectives.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "ssdp/error.hpp"

namespace ssdp {

std::string_view to_string(AspDivergence d) {
  return d == AspDivergence::renormalized ? "renormalized" : "generalized";
}

AspDivergence parse_asp_divergence(std::string_view s) {
  if (s == "renormalized") return AspDivergence::renormalized;
  if (s == "generalized") return AspDivergence::generalized;
  throw ConfigError("unknown asp divergence '" + std::string(s) + "'");
}

LossBreakdown total_loss(double l_re, double l_asp, double l_ib, long step) {
  const std::pair<const char*, double> parts[] = {{"l_re", l_re}, {"l_asp", l_asp}, {"l_ib", l_ib}};
  for (const auto& [name, value] : parts) {
    if (!std::isfinite(value)) {
      throw TrainingError(std::string("non-finite loss term ") + name +
                              (step >= 0 ? " at step " + std::to_string(step) : std::string()),
                          step, name);
    }
  }
  LossBreakdown out{l_re, l_asp, l_ib, 0.0};
  out.total = l_re;
  out.total += l_asp;
  out.total += l_ib;
  return out;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  assert(p.size() == q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

AspResult asp_loss(std::span<const double> alpha_avg, const IslSignal& signal,
                   const AspConfig& cfg) {
  const std::size_t n = alpha_avg.size();
  if (signal.size() != n) throw ValidationError("attention and label lengths differ");
  const double eps = cfg.epsilon;
  const double smooth = static_cast<double>(n) * eps;

  std::vector<double> masked(n);
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    masked[i] = signal.mask[i] ? alpha_avg[i] : 0.0;
    mass += masked[i];
  }
  AspResult r;
  r.grad.assign(n, 0.0);
  if (!(mass > 0.0)) {
    // Uniform over marked positions is q itself: zero loss, no gradient.
    r.fallback = true;
    masked.assign(signal.dist.begin(), signal.dist.end());
    mass = 1.0;
  }

  if (cfg.divergence == AspDivergence::generalized) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = masked[i] + eps;
      const double t = signal.dist[i] + eps;
      r.loss += a * std::log(a / t) - a + t;
      if (signal.mask[i] && !r.fallback) r.grad[i] = cfg.lambda_asp * std::log(a / t);
    }
    r.loss *= cfg.lambda_asp;
    r.predicted = masked;
    return r;
  }

  const double z = mass + smooth;
  std::vector<double> target(n);
  r.predicted.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.predicted[i] = (masked[i] + eps) / z;
    target[i] = (signal.dist[i] + eps) / (1.0 + smooth);
  }
  r.loss = cfg.lambda_asp * kl_divergence(r.predicted, target);
  if (r.fallback) return r;

  // d/dp_i = lambda (log(p_i / t_i) + 1); through p = (m + eps) / z:
  // d/dm_j = (g_j - sum_i g_i p_i) / z.
  std::vector<double> g(n);
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = cfg.lambda_asp * (std::log(r.predicted[i] / target[i]) + 1.0);
    weighted += g[i] * r.predicted[i];
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (signal.mask[j]) r.grad[j] = (g[j] - weighted) / z;
  }
  return r;
}

std::vector<double> softmax(std::span<const double> scores) {
  std::vector<double> out(scores.size());
  if (scores.empty()) return out;
  const double top = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - top);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> grad_probs) {
  double inner = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) inner += probs[i] * grad_probs[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = probs[i] * (grad_probs[i] - inner);
  return out;
}

std::vector<double> saib_scores(ConstMatView r_base, std::span<const double> r_sen,
                                std::span<const double> weight, double bias) {
  const std::size_t d = r_base.cols;
  assert(weight.size() == 2 * d && r_sen.size() == d);
  const double shared = kernels::dot(weight.subspan(d, d), r_sen) + bias;
  std::vector<double> scores(r_base.rows);
  for (std::size_t i = 0; i < r_base.rows; ++i) {
    scores[i] = kernels::dot(weight.first(d), r_base.row(i)) + shared;
  }
  return scores;
}

std::vector<double> saib_attention(ConstMatView r_base, std::span<const double> r_sen,
                                   std::span<const double> weight, double bias) {
  return softmax(saib_scores(r_base, r_sen, weight, bias));
}

EntropyResult saib_entropy_loss(std::span<const double> alpha) {
  EntropyResult r;
  r.grad.resize(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 0.0) {
      const double log_a = std::log(alpha[i]);
      r.loss -= alpha[i] * log_a;
      r.grad[i] = -(log_a + 1.0);
    }
  }
  return r;
}

std::vector<double> pool(ConstMatView r_base, std::span<const double> alpha) {
  std::vector<double> out(r_base.cols, 0.0);
  for (std::size_t i = 0; i < r_base.rows; ++i) kernels::axpy(alpha[i], r_base.row(i), out);
  return out;
}

ReResult re_loss(std::span<const double> pooled, ConstMatView weight,
                 std::span<const double> bias, int gold) {
  const std::size_t classes = weight.cols;
  if (gold < 0 || static_cast<std::size_t>(gold) >= classes) {
    throw ValidationError("gold relation index out of range");
  }
  std::vector<double> logits(bias.begin(), bias.end());
  for (std::size_t k = 0; k < pooled.size(); ++k) kernels::axpy(pooled[k], weight.row(k), logits);

  ReResult r;
  r.probs = softmax(logits);
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double l : logits) sum += std::exp(l - top);
  r.loss = top + std::log(sum) - logits[gold];
  std::vector<double> dlogits = r.probs;
  dlogits[gold] -= 1.0;
  r.grad_bias = dlogits;
  r.grad_weight = Matrix(pooled.size(), classes);
  r.grad_pooled.resize(pooled.size());
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    kernels::axpy(pooled[k], dlogits, r.grad_weight.row(k));
    r.grad_pooled[k] = kernels::dot(weight.row(k), dlogits);
  }
  return r;
}

}  // namespace ssdp
