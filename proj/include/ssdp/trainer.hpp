#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssdp/model.hpp"
#include "ssdp/synth.hpp"

namespace ssdp {

enum class Mode { baseline, asp, saib, asp_saib };
enum class OptimizerKind { sgd, adam };
enum class Schedule { joint, alternate };
enum class AspReduction { mean, sum };

std::string_view to_string(Mode m);
std::string_view to_string(OptimizerKind o);
std::string_view to_string(Schedule s);
std::string_view to_string(AspReduction r);
Mode parse_mode(std::string_view s);
OptimizerKind parse_optimizer(std::string_view s);
Schedule parse_schedule(std::string_view s);
AspReduction parse_asp_reduction(std::string_view s);

/// Training configuration, read from a `key = value` file (`#` comments).
/// Unknown keys and bad values raise ConfigError.
struct TrainConfig {
  std::string data;     // corpus directory written by `synth`
  std::string lexicon;  // TSV path; empty = built-in financial lexicon

  int layers = 2;
  int heads = 4;
  int d_model = 32;
  int d_ff = 64;
  int max_len = 64;
  int last_k = 3;
  AttnAxis attn_axis = AttnAxis::received;

  int epochs = 10;
  int batch_size = 16;
  double learning_rate = 1e-3;
  OptimizerKind optimizer = OptimizerKind::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;

  Mode mode = Mode::asp_saib;
  IslVariant isl_variant = IslVariant::isl;
  double lambda_asp = 1.0;
  double asp_epsilon = 1e-8;
  Schedule schedule = Schedule::joint;
  AspReduction asp_reduction = AspReduction::mean;
  AspDivergence asp_divergence = AspDivergence::renormalized;

  static TrainConfig parse(std::string_view text);
  static TrainConfig load(const std::filesystem::path& path);
  /// Canonical key = value rendering; parse(to_text()) reproduces the config.
  std::string to_text() const;
  void validate() const;

  bool uses_asp() const { return mode == Mode::asp || mode == Mode::asp_saib; }
  bool uses_saib() const { return mode == Mode::saib || mode == Mode::asp_saib; }
  ModelConfig model_config(int vocab_size, int num_relations) const;
  Terms terms() const { return {true, uses_asp(), uses_saib()}; }
  AspConfig asp_config() const { return {lambda_asp, asp_epsilon, asp_divergence}; }

  bool operator==(const TrainConfig&) const = default;
};

struct EpochRecord {
  int epoch = 0;
  int steps = 0;
  LossBreakdown mean_loss;  // mean of per-step batch losses
};

struct StepRecord {
  long step = 0;
  LossBreakdown loss;  // batch loss, computed before the update
};

struct RunRecord {
  TrainConfig config;
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;
  std::size_t asp_fallbacks = 0;  // instances whose masked attention summed to zero
  std::string final_checkpoint;   // empty when nothing was written
  double wall_seconds = 0.0;

  std::string metrics_csv() const;
  std::string to_json() const;
};

/// Plain optimizer over the flat parameter buffer.
class Optimizer {
 public:
  explicit Optimizer(const TrainConfig& config, std::size_t size);
  void step(std::span<double> params, std::span<const double> grads);
  long steps_taken() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_, b1_, b2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

/// Called with epoch 0 before any update and after every epoch.
using EpochCallback = std::function<void(int epoch, const ModelState& state)>;

struct TrainResult {
  RunRecord record;
  ModelState initial;
  ModelState final;
};

/// Builds the vocabulary from the training split, initializes a model from
/// `config.seed`, and runs fixed-epoch minibatch training. When `out_dir`
/// is non-empty, writes config.txt, metrics.csv, run.json, train.log and
/// checkpoints/{initial,final}.json there. Throws TrainingError on a
/// non-finite loss.
TrainResult train(const TrainConfig& config, const Corpus& corpus,
                  const std::filesystem::path& out_dir = {}, const EpochCallback& on_epoch = {});

/// Instance order for one epoch (1-based): a seeded shuffle of 0..n-1.
std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n);

/// Lexicon named by the config, or the built-in one.
SentimentLexicon config_lexicon(const TrainConfig& config);

struct BatchResult {
  LossBreakdown loss;
  std::size_t asp_fallbacks = 0;
};

/// One optimizer-free pass of a batch: mean loss and summed gradient,
/// deterministic regardless of worker count.
BatchResult batch_gradient(const ModelState& state, std::span<const Example> batch,
                             const Terms& terms, const AspConfig& asp, AspReduction reduction,
                             std::span<double> grads, long step = -1);

}  // namespace ssdp
