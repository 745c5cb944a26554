#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ssdp/model.hpp"
#include "ssdp/synth.hpp"
#include "ssdp/trainer.hpp"

namespace ssdp {

struct RelationRow {
  std::string relation;
  std::size_t support = 0;  // gold count
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct BucketRow {
  std::string bucket;  // "SUBJ:OBJ"
  std::size_t instances = 0;
  std::size_t tp = 0, fp = 0, fn = 0;
  double f1 = 0.0;
};

struct EvalReport {
  std::vector<std::string> labels;
  std::string no_relation;
  std::size_t instances = 0;
  double accuracy = 0.0;
  double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::vector<RelationRow> per_relation;
  std::vector<BucketRow> buckets;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][predicted]
  double mean_isl_mass = 0.0;    // mean of sum_{j in ISL} alpha_avg[j]
  double mean_ib_entropy = 0.0;  // mean entropy of alpha^IB

  std::string to_text() const;
  std::string to_json() const;
  std::string confusion_csv() const;
  std::string per_relation_csv() const;
};

/// Metrics from label indices. Micro P/R/F1 treat `no_relation` as the
/// negative class; macro F1 averages over positive relations that occur in
/// gold or predictions. A zero denominator yields 0.
EvalReport score(const std::vector<std::string>& labels, const std::string& no_relation,
                 const std::vector<int>& gold, const std::vector<int>& predicted);

/// Groups instances by the entity-type pair of their gold relation (for a
/// gold no_relation instance, of the predicted relation; if both are
/// no_relation the instance carries no positive evidence and is skipped).
/// Empty buckets are omitted.
std::vector<BucketRow> bucket_by_entity_pair(const CorpusManifest& manifest,
                                             const std::vector<std::string>& labels,
                                             const std::vector<int>& gold,
                                             const std::vector<int>& predicted);

struct Predictions {
  std::vector<int> gold;
  std::vector<int> predicted;
  std::vector<double> isl_mass;
  std::vector<double> ib_entropy;
};

/// Forward passes over prepared examples, parallel with per-index slots.
Predictions predict(const ModelState& state, const std::vector<Example>& examples);

EvalReport evaluate(const ModelState& state, const std::vector<Instance>& split,
                    const CorpusManifest& manifest, const SentimentLexicon& lexicon,
                    IslVariant variant = IslVariant::isl);

/// One grid cell: config, test-split report and dev-split attention mass.
struct AblationRow {
  TrainConfig config;
  EvalReport test;
  double dev_isl_mass = 0.0;
};

/// Expands a grid file: ordinary config keys set the base, and
/// `grid.mode`, `grid.isl_variant`, `grid.seed`, `grid.lambda_asp`
/// list comma-separated values to cross.
std::vector<TrainConfig> parse_grid(std::string_view text);

std::vector<AblationRow> ablation_grid(const std::vector<TrainConfig>& configs,
                                       const Corpus& corpus,
                                       const std::filesystem::path& out_dir = {});
std::string ablation_csv(const std::vector<AblationRow>& rows);

struct AttentionExport {
  std::vector<std::string> tokens;
  std::vector<double> alpha_avg;
  std::vector<double> alpha_ib;
  std::vector<std::uint8_t> isl;
};

AttentionExport attention_of(const ModelState& state, const Example& ex,
                             const std::vector<std::string>& tokens);
/// CSV with columns position,token,alpha_avg,alpha_ib,isl; values printed
/// with 17 significant digits so re-reading reproduces them exactly.
std::string attention_csv(const AttentionExport& a);
AttentionExport read_attention_csv(const std::string& text);
std::string attention_svg(const AttentionExport& a, const std::string& title);
/// Writes <stem>.csv and <stem>.svg into `dir`.
void export_attention(const ModelState& state, const Instance& inst, const SentimentLexicon& lexicon,
                      IslVariant variant, const std::filesystem::path& dir, const std::string& stem);

}  // namespace ssdp
