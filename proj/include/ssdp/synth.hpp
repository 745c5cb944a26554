#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ssdp/corpus.hpp"

namespace ssdp {

using Splits = std::map<std::string, std::vector<Instance>>;

/// The eight-relation catalog the generator knows templates for, with the
/// given split sizes. Relations declare their entity-type pair and implied
/// polarity; no_relation has neither.
CorpusManifest default_manifest(std::uint64_t seed, std::size_t train = 2000,
                                std::size_t dev = 400, std::size_t test = 400,
                                double coupling = 0.9);

/// Generates projective dependency-annotated sentences per split. With
/// probability `coupling` an instance's gold sentiment is the polarity its
/// relation implies; otherwise it is a fair coin. Sentiment cue words are
/// planted so the lexicon majority vote always equals the gold sentiment.
/// Integer-only RNG path: identical output for a fixed seed everywhere.
Splits synthesize_corpus(const CorpusManifest& manifest, double coupling);

/// Every cue word the generator may plant, with its polarity.
const std::vector<std::pair<std::string, Sentiment>>& synth_cue_words();

/// Writes manifest.json and, per split, <split>.jsonl, <split>.conllu and
/// <split>.sidecar.jsonl. Output bytes depend only on the inputs.
void write_corpus(const std::filesystem::path& dir, const CorpusManifest& manifest,
                  const Splits& splits);

struct Corpus {
  CorpusManifest manifest;
  Splits splits;
};

/// Reads a directory written by write_corpus (JSONL files). Split sizes must
/// match the manifest and every relation must be declared.
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace ssdp
