#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ssdp/corpus.hpp"

namespace ssdp {

/// Lowercased word list. Ids 0..2 are fixed: <unk>, positive, negative, so
/// the inserted sentiment token shares the embedding table with text words.
class Vocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr int kPositive = 1;
  static constexpr int kNegative = 2;

  Vocabulary();
  explicit Vocabulary(std::vector<std::string> words);

  /// Specials plus every distinct lowercased surface, sorted.
  static Vocabulary build(const std::vector<Instance>& instances);

  int id(std::string_view word) const;
  const std::string& word(int id) const { return words_.at(id); }
  int size() const { return static_cast<int>(words_.size()); }
  const std::vector<std::string>& words() const { return words_; }

  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace ssdp
