#include "ssdp/sentiment.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ssdp/error.hpp"

namespace ssdp {

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

SentimentLexicon::SentimentLexicon(std::set<std::string> positive, std::set<std::string> negative)
    : positive_(std::move(positive)), negative_(std::move(negative)) {
  if (positive_.empty() || negative_.empty()) {
    throw ValidationError("sentiment lexicon needs both positive and negative cues");
  }
  for (const auto& w : positive_) {
    if (negative_.contains(w)) throw ValidationError("lexicon word '" + w + "' has both polarities");
  }
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::set<std::string> pos, neg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("lexicon: expected word<TAB>polarity", lineno);
    const std::string word = lowercase(line.substr(0, tab));
    const std::string polarity = line.substr(tab + 1);
    if (polarity == "positive") {
      pos.insert(word);
    } else if (polarity == "negative") {
      neg.insert(word);
    } else {
      throw ParseError("lexicon: unknown polarity '" + polarity + "'", lineno);
    }
  }
  return SentimentLexicon(std::move(pos), std::move(neg));
}

const SentimentLexicon& SentimentLexicon::financial() {
  static const SentimentLexicon lexicon(
      {
      "beat", "boom", "boost", "bullish", "climbed", "comfortably", "demand", "exceeded",
      "expansion", "favorable", "gains", "grew", "growth", "healthy", "impressively",
      "improved", "increased", "jumped", "momentum", "optimism", "outperformed",
      "profitable", "rally", "rebound", "record", "recovery", "robust", "rose",
      "smoothly", "soared", "solid", "steadily", "stellar", "strong", "success", "surged",
      "thriving", "up", "upbeat", "upgrade",
      },
      {
      "badly", "bankruptcy", "bearish", "bleak", "collapse", "concerns", "crisis",
      "decline", "declined", "decreased", "default", "disappointing", "disappointingly",
      "dismal", "down", "downgrade", "downturn", "dropped", "fell", "fraud", "grim",
      "headwinds", "layoffs", "losses", "missed", "plunged", "poor", "poorly", "pressure",
      "recession", "slowdown", "sluggish", "slump", "slumped", "soft", "volatile",
      "warning", "weak", "weakly", "weakness",
      });
  return lexicon;
}

std::string SentimentLexicon::to_tsv() const {
  std::ostringstream out;
  out << "# Financial sentiment lexicon: word<TAB>polarity\n";
  for (const auto& w : negative_) out << w << "\tnegative\n";
  for (const auto& w : positive_) out << w << "\tpositive\n";
  return out.str();
}

SentimentTag classify(const Instance& inst, const SentimentLexicon& lexicon) {
  if (inst.gold_sentiment) return {*inst.gold_sentiment, SentimentTag::Source::gold, false};
  int pos = 0, neg = 0;
  for (const auto& t : inst.tokens) {
    const auto word = lowercase(t.surface);
    if (lexicon.positive().contains(word)) ++pos;
    if (lexicon.negative().contains(word)) ++neg;
  }
  if (pos == neg) return {Sentiment::positive, SentimentTag::Source::lexicon, true};
  return {pos > neg ? Sentiment::positive : Sentiment::negative, SentimentTag::Source::lexicon,
          false};
}

AugmentedInstance insert_sentiment_token(const Instance& inst, const SentimentTag& tag) {
  AugmentedInstance out;
  out.tokens.reserve(inst.tokens.size() + 1);
  out.tokens.emplace_back(to_string(tag.value));
  for (const auto& t : inst.tokens) out.tokens.push_back(t.surface);
  out.subj = shift_span(inst.subj);
  out.obj = shift_span(inst.obj);
  out.sentiment_position = 0;
  out.sentiment = tag.value;
  return out;
}

std::vector<int> shift_positions(const std::vector<int>& positions) {
  std::vector<int> out(positions);
  for (auto& p : out) ++p;
  return out;
}

std::vector<int> unshift_positions(const std::vector<int>& positions) {
  std::vector<int> out(positions);
  for (auto& p : out) --p;
  return out;
}

}  // namespace ssdp
