#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "ssdp/corpus.hpp"

namespace ssdp {

class SentimentLexicon {
 public:
  /// Throws ValidationError when a set is empty or the sets intersect.
  SentimentLexicon(std::set<std::string> positive, std::set<std::string> negative);

  /// `word<TAB>polarity` per line; blank lines and `#` comments skipped.
  static SentimentLexicon load(const std::filesystem::path& path);
  /// The financial lexicon shipped in data/financial_lexicon.tsv.
  static const SentimentLexicon& financial();

  const std::set<std::string>& positive() const { return positive_; }
  const std::set<std::string>& negative() const { return negative_; }
  std::size_t size() const { return positive_.size() + negative_.size(); }

  /// Lexicon file text, sorted by polarity then word.
  std::string to_tsv() const;

 private:
  std::set<std::string> positive_;
  std::set<std::string> negative_;
};

struct SentimentTag {
  enum class Source { gold, lexicon };
  Sentiment value = Sentiment::positive;
  Source source = Source::lexicon;
  bool defaulted = false;  // lexicon tie or no hits
};

/// Gold sentiment when present; otherwise the majority of lexicon hits over
/// lowercased surfaces, with ties (including zero hits) going to positive.
SentimentTag classify(const Instance& inst, const SentimentLexicon& lexicon);

/// Token sequence with the sentiment word prepended at position 0.
struct AugmentedInstance {
  std::vector<std::string> tokens;
  Span subj;
  Span obj;
  int sentiment_position = 0;
  Sentiment sentiment = Sentiment::positive;
};

AugmentedInstance insert_sentiment_token(const Instance& inst, const SentimentTag& tag);

/// Re-bases original positions onto the augmented sequence and back.
std::vector<int> shift_positions(const std::vector<int>& positions);
std::vector<int> unshift_positions(const std::vector<int>& positions);
inline Span shift_span(const Span& s) { return {s.lo + 1, s.hi + 1}; }
inline Span unshift_span(const Span& s) { return {s.lo - 1, s.hi - 1}; }

std::string lowercase(std::string s);

}  // namespace ssdp
