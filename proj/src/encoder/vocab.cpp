#include "ssdp/vocab.hpp"

#include <algorithm>
#include <set>

#include "ssdp/error.hpp"
#include "ssdp/sentiment.hpp"

namespace ssdp {

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{"<unk>", "positive", "negative"}) {}

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  if (words_.size() < 3 || words_[kUnk] != "<unk>" || words_[kPositive] != "positive" ||
      words_[kNegative] != "negative") {
    throw ValidationError("vocabulary must start with <unk>, positive, negative");
  }
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate vocabulary word '" + words_[i] + "'");
    }
  }
}

Vocabulary Vocabulary::build(const std::vector<Instance>& instances) {
  std::set<std::string> seen;
  for (const auto& inst : instances) {
    for (const auto& t : inst.tokens) seen.insert(lowercase(t.surface));
  }
  std::vector<std::string> words{"<unk>", "positive", "negative"};
  for (const auto& w : seen) {
    if (w != "<unk>" && w != "positive" && w != "negative") words.push_back(w);
  }
  return Vocabulary(std::move(words));
}

int Vocabulary::id(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnk : it->second;
}

}  // namespace ssdp
