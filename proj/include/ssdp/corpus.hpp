#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ssdp {

inline constexpr int kRoot = -1;

enum class Sentiment { positive, negative };

std::string_view to_string(Sentiment s);
/// Accepts "positive" / "negative"; throws ParseError otherwise.
Sentiment parse_sentiment(std::string_view s);

struct Token {
  int index = 0;
  std::string surface;
  int head = kRoot;  // parent index or kRoot
  std::string deprel;

  bool operator==(const Token&) const = default;
};

/// Inclusive token range.
struct Span {
  int lo = 0;
  int hi = 0;

  int size() const { return hi - lo + 1; }
  bool contains(int i) const { return lo <= i && i <= hi; }
  bool overlaps(const Span& o) const { return lo <= o.hi && o.lo <= hi; }
  bool operator==(const Span&) const = default;
};

struct Instance {
  std::string id;
  std::vector<Token> tokens;
  Span subj;
  Span obj;
  std::string relation;
  std::optional<Sentiment> gold_sentiment;
  // Multi-root, rootless, cyclic or non-projective head structure.
  bool fragmented = false;

  int size() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Instance&) const = default;
};

/// True unless the heads form a single-rooted projective tree.
bool is_fragmented(const std::vector<Token>& tokens);
bool is_projective_tree(const std::vector<Token>& tokens);

/// Throws ValidationError naming the instance id. When `labels` is non-empty
/// the relation must be one of them.
void validate(const Instance& inst, const std::vector<std::string>& labels = {});

struct RelationSpec {
  std::string name;
  std::string subj_type;
  std::string obj_type;
  std::optional<Sentiment> polarity;  // sentiment implied under coupling

  bool operator==(const RelationSpec&) const = default;
};

struct CorpusManifest {
  std::vector<RelationSpec> relations;
  std::string no_relation = "no_relation";
  std::map<std::string, std::size_t> split_sizes;  // train / dev / test
  std::uint64_t seed = 0;
  double coupling = 0.0;

  std::vector<std::string> labels() const;
  const RelationSpec* find(std::string_view relation) const;
  /// Duplicate-free labels, no_relation declared, known split names.
  void validate() const;
  bool operator==(const CorpusManifest&) const = default;
};

// ---- CoNLL-U + sidecar -------------------------------------------------

/// Reads a CoNLL-U file and its span/relation sidecar (one row per
/// sentence, either JSON `{"id", "subj":[lo,hi], "obj":[lo,hi],
/// "relation", "sentiment"?}` or `subj=LO..HI obj=LO..HI rel=NAME
/// [sentiment=S] [id=ID]`). An empty CoNLL-U file yields an empty list.
std::vector<Instance> read_conllu(const std::filesystem::path& conllu,
                                  const std::filesystem::path& sidecar);
std::vector<Instance> read_conllu(std::istream& conllu, std::istream& sidecar);

void write_conllu(std::ostream& out, const std::vector<Instance>& instances);
void write_sidecar(std::ostream& out, const std::vector<Instance>& instances);

// ---- instance JSONL ------------------------------------------------------

/// One JSON object per line; heads use -1 for ROOT. Extra fields (e.g. a
/// cached "isl" signal) are ignored on read.
std::vector<Instance> read_jsonl(const std::filesystem::path& path);
std::vector<Instance> read_jsonl(std::istream& in);
std::string to_json_line(const Instance& inst);
void write_jsonl(std::ostream& out, const std::vector<Instance>& instances);

CorpusManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const CorpusManifest& m);
std::string manifest_json(const CorpusManifest& m);

}  // namespace ssdp
