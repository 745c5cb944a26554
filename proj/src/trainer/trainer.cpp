#include "ssdp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "ssdp/error.hpp"
#include "ssdp/parallel.hpp"
#include "ssdp/rng.hpp"

namespace ssdp {

namespace {

constexpr std::uint64_t kShuffleStream = 0x9e3779b97f4a7c15ULL;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

nlohmann::ordered_json loss_json(const LossBreakdown& b) {
  return {{"l_re", b.l_re}, {"l_asp", b.l_asp}, {"l_ib", b.l_ib}, {"total", b.total}};
}

}  // namespace

std::string RunRecord::metrics_csv() const {
  std::string out = "step,l_re,l_asp,l_ib,total\n";
  for (const auto& s : steps) {
    out += std::to_string(s.step) + "," + fixed6(s.loss.l_re) + "," + fixed6(s.loss.l_asp) + "," +
           fixed6(s.loss.l_ib) + "," + fixed6(s.loss.total) + "\n";
  }
  return out;
}

std::string RunRecord::to_json() const {
  nlohmann::ordered_json j;
  j["config"] = config.to_text();
  auto eps = nlohmann::ordered_json::array();
  for (const auto& e : epochs) {
    eps.push_back({{"epoch", e.epoch}, {"steps", e.steps}, {"mean_loss", loss_json(e.mean_loss)}});
  }
  j["epochs"] = eps;
  j["asp_fallbacks"] = asp_fallbacks;
  j["final_checkpoint"] = final_checkpoint;
  j["wall_seconds"] = wall_seconds;
  return j.dump(2);
}

Optimizer::Optimizer(const TrainConfig& c, std::size_t size)
    : kind_(c.optimizer), lr_(c.learning_rate), b1_(c.beta1), b2_(c.beta2), eps_(c.adam_epsilon) {
  if (kind_ == OptimizerKind::adam) {
    m_.assign(size, 0.0);
    v_.assign(size, 0.0);
  }
}

void Optimizer::step(std::span<double> params, std::span<const double> grads) {
  ++t_;
  if (kind_ == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr_ * grads[i];
    return;
  }
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
    v_[i] = b2_ * v_[i] + (1.0 - b2_) * g * g;
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

std::vector<std::size_t> epoch_order(std::uint64_t seed, int epoch, std::size_t n) {
  Rng rng(seed ^ (kShuffleStream * static_cast<std::uint64_t>(epoch)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

SentimentLexicon config_lexicon(const TrainConfig& config) {
  return config.lexicon.empty() ? SentimentLexicon::financial()
                                : SentimentLexicon::load(config.lexicon);
}

BatchResult batch_gradient(const ModelState& state, std::span<const Example> batch,
                             const Terms& terms, const AspConfig& asp, AspReduction reduction,
                             std::span<double> grads, long step) {
  const std::size_t b = batch.size();
  const double w = 1.0 / static_cast<double>(b);
  const double asp_scale = reduction == AspReduction::sum ? static_cast<double>(b) : 1.0;
  std::vector<std::vector<double>> local(b);
  std::vector<LossBreakdown> losses(b);
  std::vector<std::uint8_t> fallback(b, 0);
  try {
    parallel_for(b, [&](std::size_t i) {
      local[i].assign(grads.size(), 0.0);
      const ExampleOutput out = run_example(state, batch[i], terms, asp, local[i], w, asp_scale);
      losses[i] = out.loss;
      fallback[i] = out.asp_fallback;
    });
  } catch (const TrainingError& e) {
    if (e.step() >= 0 || step < 0) throw;
    throw TrainingError(std::string(e.what()) + " at step " + std::to_string(step), step, e.term());
  }
  BatchResult result;
  double re = 0.0, as = 0.0, ib = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    kernels::axpy(1.0, local[i], grads);
    re += losses[i].l_re;
    as += losses[i].l_asp;
    ib += losses[i].l_ib;
    result.asp_fallbacks += fallback[i];
  }
  result.loss = total_loss(re * w, reduction == AspReduction::sum ? as : as * w, ib * w, step);
  return result;
}

TrainResult train(const TrainConfig& config, const Corpus& corpus,
                  const std::filesystem::path& out_dir, const EpochCallback& on_epoch) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const auto train_it = corpus.splits.find("train");
  if (train_it == corpus.splits.end() || train_it->second.empty()) {
    throw ConfigError("corpus has no training instances");
  }
  const auto& train_split = train_it->second;
  const auto labels = corpus.manifest.labels();
  Vocabulary vocab = Vocabulary::build(train_split);
  const ModelConfig mc = config.model_config(vocab.size(), static_cast<int>(labels.size()));

  TrainResult result;
  ModelState state = ModelState::initialize(mc, std::move(vocab), labels, config.seed);
  result.initial = state;
  const SentimentLexicon lexicon = config_lexicon(config);
  const std::vector<Example> examples =
      prepare_examples(train_split, state, lexicon, config.isl_variant);

  const bool writing = !out_dir.empty();
  std::ofstream log;
  if (writing) {
    std::filesystem::create_directories(out_dir / "checkpoints");
    write_text(out_dir / "config.txt", config.to_text());
    save_checkpoint(out_dir / "checkpoints" / "initial.json", state);
    log.open(out_dir / "train.log", std::ios::binary);
    log << "mode " << to_string(config.mode) << " variant " << to_string(config.isl_variant)
        << " seed " << config.seed << " params " << state.parameter_count() << " instances "
        << examples.size() << "\n";
  }

  if (on_epoch) on_epoch(0, state);

  RunRecord& rec = result.record;
  rec.config = config;
  Optimizer opt(config, state.parameter_count());
  std::vector<Example> batch;
  std::vector<double> grads(state.parameter_count());
  const Terms full = config.terms();
  const AspConfig asp = config.asp_config();
  long step = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const std::vector<std::size_t> order = epoch_order(config.seed, epoch, examples.size());
    EpochRecord er;
    er.epoch = epoch;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      ++step;
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(examples[order[i]]);
      Terms terms = full;
      if (config.schedule == Schedule::alternate && full.asp) {
        terms = (step % 2 == 1) ? Terms{true, false, full.ib} : Terms{false, true, false};
      }
      std::fill(grads.begin(), grads.end(), 0.0);
      const BatchResult br =
          batch_gradient(state, batch, terms, asp, config.asp_reduction, grads, step);
      const LossBreakdown& loss = br.loss;
      rec.asp_fallbacks += br.asp_fallbacks;
      opt.step(state.values(), grads);
      if (!state.all_finite()) {
        throw TrainingError("non-finite parameters after update", step, "parameters");
      }
      rec.steps.push_back({step, loss});
      ++er.steps;
      er.mean_loss.l_re += loss.l_re;
      er.mean_loss.l_asp += loss.l_asp;
      er.mean_loss.l_ib += loss.l_ib;
      er.mean_loss.total += loss.total;
    }
    const double inv = 1.0 / er.steps;
    er.mean_loss.l_re *= inv;
    er.mean_loss.l_asp *= inv;
    er.mean_loss.l_ib *= inv;
    er.mean_loss.total *= inv;
    rec.epochs.push_back(er);
    if (writing) {
      log << "epoch " << epoch << " steps " << er.steps << " l_re " << fixed6(er.mean_loss.l_re)
          << " l_asp " << fixed6(er.mean_loss.l_asp) << " l_ib " << fixed6(er.mean_loss.l_ib)
          << " total " << fixed6(er.mean_loss.total) << "\n";
      log.flush();
    }
    if (on_epoch) on_epoch(epoch, state);
  }

  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (writing) {
    if (rec.asp_fallbacks > 0) {
      log << "warning: " << rec.asp_fallbacks << " ASP fallbacks (zero masked attention)\n";
    }
    const auto final_path = out_dir / "checkpoints" / "final.json";
    save_checkpoint(final_path, state);
    rec.final_checkpoint = final_path.string();
    write_text(out_dir / "metrics.csv", rec.metrics_csv());
    write_text(out_dir / "run.json", rec.to_json());
  }
  result.final = std::move(state);
  return result;
}

}  // namespace ssdp
