#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssdp/labels.hpp"
#include "ssdp/tensor.hpp"

namespace ssdp {

struct LossBreakdown {
  double l_re = 0.0;
  double l_asp = 0.0;
  double l_ib = 0.0;
  double total = 0.0;
};

/// total = l_re + l_asp + l_ib, summed in that order. A non-finite part
/// raises TrainingError naming the term (and `step`, when known).
LossBreakdown total_loss(double l_re, double l_asp, double l_ib, long step = -1);

/// `renormalized` compares the masked attention rescaled to a distribution;
/// `generalized` keeps it unnormalized and uses sum a log(a / q) - a + q,
/// which also penalizes missing mass on the marked positions.
enum class AspDivergence { renormalized, generalized };

std::string_view to_string(AspDivergence d);
AspDivergence parse_asp_divergence(std::string_view s);

struct AspConfig {
  double lambda_asp = 1.0;
  double epsilon = 1e-8;
  AspDivergence divergence = AspDivergence::renormalized;
};

struct AspResult {
  double loss = 0.0;
  std::vector<double> grad;       // d loss / d alpha_avg
  std::vector<double> predicted;  // masked, renormalized, smoothed alpha^ISL
  bool fallback = false;          // masked attention summed to zero
};

/// lambda * KL(alpha^ISL || q). alpha^ISL is alpha_avg masked by Q and
/// renormalized with epsilon smoothing, (m + eps) / (sum m + n eps); q is
/// smoothed the same way.
AspResult asp_loss(std::span<const double> alpha_avg, const IslSignal& signal,
                   const AspConfig& cfg);

/// Plain KL(p || q) = sum p log(p / q) over entries with p > 0.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> scores);
/// Pulls a gradient w.r.t. softmax outputs back to the scores.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> grad_probs);

/// Per-token score W[:d] . r_i + W[d:] . r_sen + b.
std::vector<double> saib_scores(ConstMatView r_base, std::span<const double> r_sen,
                                std::span<const double> weight, double bias);
std::vector<double> saib_attention(ConstMatView r_base, std::span<const double> r_sen,
                                   std::span<const double> weight, double bias);

struct EntropyResult {
  double loss = 0.0;
  std::vector<double> grad;  // d loss / d alpha
};

/// -sum alpha log alpha with 0 log 0 = 0.
EntropyResult saib_entropy_loss(std::span<const double> alpha);

/// sum_i alpha_i r_base[i]
std::vector<double> pool(ConstMatView r_base, std::span<const double> alpha);

struct ReResult {
  double loss = 0.0;
  std::vector<double> probs;
  std::vector<double> grad_pooled;
  Matrix grad_weight;  // d x R
  std::vector<double> grad_bias;
};

/// Softmax cross-entropy of a linear classifier over the pooled feature.
ReResult re_loss(std::span<const double> pooled, ConstMatView weight,
                 std::span<const double> bias, int gold);

}  // namespace ssdp
