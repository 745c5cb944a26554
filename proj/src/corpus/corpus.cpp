#include "ssdp/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "ssdp/error.hpp"

namespace ssdp {

using Json = nlohmann::ordered_json;

std::string_view to_string(Sentiment s) {
  return s == Sentiment::positive ? "positive" : "negative";
}

Sentiment parse_sentiment(std::string_view s) {
  if (s == "positive") return Sentiment::positive;
  if (s == "negative") return Sentiment::negative;
  throw ParseError("unknown sentiment '" + std::string(s) + "'");
}

namespace {

// Follows heads from `i`; returns false on a cycle.
bool reaches_root(const std::vector<Token>& tokens, int i) {
  const int n = static_cast<int>(tokens.size());
  for (int steps = 0; steps <= n; ++steps) {
    const int h = tokens[i].head;
    if (h == kRoot) return true;
    if (h < 0 || h >= n) return false;
    i = h;
  }
  return false;
}

bool dominates(const std::vector<Token>& tokens, int ancestor, int node) {
  const int n = static_cast<int>(tokens.size());
  for (int steps = 0; steps <= n && node != kRoot; ++steps) {
    if (node == ancestor) return true;
    node = tokens[node].head;
  }
  return false;
}

}  // namespace

bool is_projective_tree(const std::vector<Token>& tokens) {
  const int n = static_cast<int>(tokens.size());
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    if (tokens[i].head == kRoot) ++roots;
    if (!reaches_root(tokens, i)) return false;
  }
  if (roots != 1) return false;
  for (int d = 0; d < n; ++d) {
    const int h = tokens[d].head;
    if (h == kRoot) continue;
    for (int k = std::min(h, d) + 1; k < std::max(h, d); ++k) {
      if (!dominates(tokens, h, k)) return false;
    }
  }
  return true;
}

bool is_fragmented(const std::vector<Token>& tokens) {
  return !tokens.empty() && !is_projective_tree(tokens);
}

void validate(const Instance& inst, const std::vector<std::string>& labels) {
  auto fail = [&](const std::string& msg) {
    throw ValidationError("sentence " + inst.id + ": " + msg);
  };
  const int n = inst.size();
  if (n == 0) fail("no tokens");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const Token& t = inst.tokens[i];
    if (t.index != i) fail("token index " + std::to_string(t.index) + " at position " + std::to_string(i));
    if (t.head == i) fail("token " + std::to_string(i) + " is its own head");
    if (t.head != kRoot && (t.head < 0 || t.head >= n)) {
      fail("token " + std::to_string(i) + " head " + std::to_string(t.head) + " out of bounds");
    }
    if (t.head == kRoot) ++roots;
  }
  if (!inst.fragmented && roots != 1) fail("expected exactly one ROOT token");
  auto check_span = [&](const Span& s, const char* which) {
    if (s.lo > s.hi) fail(std::string(which) + " span is empty");
    if (s.lo < 0 || s.hi >= n) {
      fail(std::string(which) + " span " + std::to_string(s.lo) + ".." +
           std::to_string(s.hi) + " out of bounds for " + std::to_string(n) + " tokens");
    }
  };
  check_span(inst.subj, "subj");
  check_span(inst.obj, "obj");
  if (inst.subj.overlaps(inst.obj)) fail("subj and obj spans overlap");
  if (!labels.empty() &&
      std::find(labels.begin(), labels.end(), inst.relation) == labels.end()) {
    fail("relation '" + inst.relation + "' not in label set");
  }
}

// ---- manifest ---------------------------------------------------------

std::vector<std::string> CorpusManifest::labels() const {
  std::vector<std::string> out;
  out.reserve(relations.size());
  for (const auto& r : relations) out.push_back(r.name);
  return out;
}

const RelationSpec* CorpusManifest::find(std::string_view relation) const {
  for (const auto& r : relations) {
    if (r.name == relation) return &r;
  }
  return nullptr;
}

void CorpusManifest::validate() const {
  std::set<std::string> seen;
  for (const auto& r : relations) {
    if (!seen.insert(r.name).second) {
      throw ValidationError("manifest: duplicate relation label '" + r.name + "'");
    }
  }
  if (!no_relation.empty() && !seen.contains(no_relation)) {
    throw ValidationError("manifest: no_relation label '" + no_relation + "' not declared");
  }
  for (const auto& [split, count] : split_sizes) {
    (void)count;
    if (split != "train" && split != "dev" && split != "test") {
      throw ValidationError("manifest: unknown split '" + split + "'");
    }
  }
}

std::string manifest_json(const CorpusManifest& m) {
  Json j;
  j["relations"] = Json::array();
  for (const auto& r : m.relations) {
    Json rel{{"name", r.name}, {"subj_type", r.subj_type}, {"obj_type", r.obj_type}};
    if (r.polarity) rel["polarity"] = to_string(*r.polarity);
    j["relations"].push_back(rel);
  }
  j["no_relation"] = m.no_relation;
  j["splits"] = Json::object();
  for (const char* split : {"train", "dev", "test"}) {
    if (auto it = m.split_sizes.find(split); it != m.split_sizes.end()) {
      j["splits"][split] = it->second;
    }
  }
  j["seed"] = m.seed;
  j["coupling"] = m.coupling;
  return j.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, const CorpusManifest& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << manifest_json(m);
}

CorpusManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CorpusManifest m;
  try {
    const Json j = Json::parse(in);
    for (const auto& r : j.at("relations")) {
      RelationSpec spec{r.at("name").get<std::string>(), r.value("subj_type", std::string("ANY")),
                        r.value("obj_type", std::string("ANY")), std::nullopt};
      if (r.contains("polarity")) spec.polarity = parse_sentiment(r["polarity"].get<std::string>());
      m.relations.push_back(std::move(spec));
    }
    m.no_relation = j.value("no_relation", std::string("no_relation"));
    if (j.contains("splits")) {
      for (const auto& [k, v] : j["splits"].items()) m.split_sizes[k] = v.get<std::size_t>();
    }
    m.seed = j.value("seed", std::uint64_t{0});
    m.coupling = j.value("coupling", 0.0);
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  m.validate();
  return m;
}

// ---- JSONL -------------------------------------------------------------

std::string to_json_line(const Instance& inst) {
  Json j;
  j["id"] = inst.id;
  Json tokens = Json::array(), heads = Json::array(), deprels = Json::array();
  for (const auto& t : inst.tokens) {
    tokens.push_back(t.surface);
    heads.push_back(t.head);
    deprels.push_back(t.deprel);
  }
  j["tokens"] = std::move(tokens);
  j["heads"] = std::move(heads);
  j["deprels"] = std::move(deprels);
  j["subj"] = {inst.subj.lo, inst.subj.hi};
  j["obj"] = {inst.obj.lo, inst.obj.hi};
  j["relation"] = inst.relation;
  if (inst.gold_sentiment) j["sentiment"] = to_string(*inst.gold_sentiment);
  return j.dump();
}

void write_jsonl(std::ostream& out, const std::vector<Instance>& instances) {
  for (const auto& inst : instances) out << to_json_line(inst) << '\n';
}

namespace {

Span span_from_json(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw ParseError("span must be [lo, hi]");
  return {j[0].get<int>(), j[1].get<int>()};
}

Instance instance_from_json(const Json& j) {
  Instance inst;
  inst.id = j.at("id").is_string() ? j["id"].get<std::string>() : j["id"].dump();
  const auto& tokens = j.at("tokens");
  const auto& heads = j.at("heads");
  const auto deprels = j.contains("deprels") ? j["deprels"] : Json::array();
  if (tokens.size() != heads.size() || (!deprels.empty() && deprels.size() != tokens.size())) {
    throw ParseError("tokens/heads/deprels length mismatch in " + inst.id);
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    inst.tokens.push_back({static_cast<int>(i), tokens[i].get<std::string>(), heads[i].get<int>(),
                           deprels.empty() ? std::string("_") : deprels[i].get<std::string>()});
  }
  inst.subj = span_from_json(j.at("subj"));
  inst.obj = span_from_json(j.at("obj"));
  inst.relation = j.at("relation").get<std::string>();
  if (j.contains("sentiment") && !j["sentiment"].is_null()) {
    inst.gold_sentiment = parse_sentiment(j["sentiment"].get<std::string>());
  }
  inst.fragmented = is_fragmented(inst.tokens);
  return inst;
}

}  // namespace

std::vector<Instance> read_jsonl(std::istream& in) {
  std::vector<Instance> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Instance inst;
    try {
      inst = instance_from_json(Json::parse(line));
    } catch (const Json::exception& e) {
      throw ParseError(e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), lineno);
    }
    validate(inst);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_jsonl(in);
}

// ---- CoNLL-U -------------------------------------------------------------

namespace {

struct Sentence {
  std::string id;
  std::vector<Token> tokens;
  std::vector<std::size_t> head_lines;
};

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::optional<int> parse_int(std::string_view s) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<Sentence> parse_conllu(std::istream& in) {
  std::vector<Sentence> sentences;
  Sentence current;
  bool open = false;
  std::string raw;
  std::size_t lineno = 0;

  auto close = [&]() {
    if (!open) return;
    const int n = static_cast<int>(current.tokens.size());
    for (int i = 0; i < n; ++i) {
      const int h = current.tokens[i].head;
      if (h != kRoot && h >= n) throw ParseError("head out of range", current.head_lines[i]);
    }
    if (current.id.empty()) current.id = std::to_string(sentences.size());
    if (!current.tokens.empty()) sentences.push_back(std::move(current));
    current = Sentence{};
    open = false;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) {
      close();
      continue;
    }
    open = true;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      if (body.starts_with("sent_id")) {
        const auto eq = body.find('=');
        if (eq != std::string_view::npos) current.id = std::string(trim(body.substr(eq + 1)));
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw ParseError("expected 10 tab-separated columns, found " + std::to_string(cols.size()),
                       lineno);
    }
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;  // multiword / empty node
    const auto id = parse_int(cols[0]);
    if (!id || *id != static_cast<int>(current.tokens.size()) + 1) {
      throw ParseError("bad token id '" + std::string(cols[0]) + "'", lineno);
    }
    const auto head = parse_int(cols[6]);
    if (!head || *head < 0) throw ParseError("bad head '" + std::string(cols[6]) + "'", lineno);
    if (*head == *id) throw ParseError("token is its own head", lineno);
    current.tokens.push_back({*id - 1, std::string(cols[1]), *head == 0 ? kRoot : *head - 1,
                              std::string(cols[7])});
    current.head_lines.push_back(lineno);
  }
  close();
  return sentences;
}

Span parse_range(std::string_view s, std::size_t lineno) {
  const auto dots = s.find("..");
  const auto lo = parse_int(s.substr(0, dots));
  const auto hi = dots == std::string_view::npos ? lo : parse_int(s.substr(dots + 2));
  if (!lo || !hi) throw ParseError("bad span '" + std::string(s) + "'", lineno);
  return {*lo, *hi};
}

struct SidecarRow {
  std::optional<std::string> id;
  Span subj;
  Span obj;
  std::string relation;
  std::optional<Sentiment> sentiment;
};

SidecarRow parse_sidecar_row(std::string_view line, std::size_t lineno) {
  SidecarRow row;
  if (line.front() == '{') {
    try {
      const Json j = Json::parse(line);
      if (j.contains("id")) row.id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
      row.subj = span_from_json(j.at("subj"));
      row.obj = span_from_json(j.at("obj"));
      row.relation = j.at("relation").get<std::string>();
      if (j.contains("sentiment") && !j["sentiment"].is_null()) {
        row.sentiment = parse_sentiment(j["sentiment"].get<std::string>());
      }
    } catch (const Json::exception& e) {
      throw ParseError(std::string("sidecar: ") + e.what(), lineno);
    } catch (const ParseError& e) {
      throw ParseError(std::string("sidecar: ") + e.what(), lineno);
    }
    return row;
  }
  bool has_subj = false, has_obj = false, has_rel = false;
  std::istringstream fields{std::string(line)};
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError("sidecar: expected key=value, got '" + field + "'", lineno);
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "subj") {
      row.subj = parse_range(value, lineno);
      has_subj = true;
    } else if (key == "obj") {
      row.obj = parse_range(value, lineno);
      has_obj = true;
    } else if (key == "rel" || key == "relation") {
      row.relation = value;
      has_rel = true;
    } else if (key == "sentiment" || key == "sen") {
      try {
        row.sentiment = parse_sentiment(value);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), lineno);
      }
    } else if (key == "id") {
      row.id = value;
    } else {
      throw ParseError("sidecar: unknown key '" + key + "'", lineno);
    }
  }
  if (!has_subj || !has_obj || !has_rel) throw ParseError("sidecar: row needs subj, obj and rel", lineno);
  return row;
}

}  // namespace

std::vector<Instance> read_conllu(std::istream& conllu, std::istream& sidecar) {
  auto sentences = parse_conllu(conllu);
  std::vector<SidecarRow> rows;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(sidecar, raw)) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty()) continue;
    rows.push_back(parse_sidecar_row(line, lineno));
  }
  if (rows.size() != sentences.size()) {
    throw ValidationError("sidecar has " + std::to_string(rows.size()) + " rows for " +
                          std::to_string(sentences.size()) + " sentences");
  }
  std::vector<Instance> out;
  out.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto& s = sentences[i];
    auto& row = rows[i];
    if (row.id && *row.id != s.id) {
      throw ValidationError("sidecar row " + std::to_string(i + 1) + " is for sentence " + *row.id +
                            " but sentence " + s.id + " is at that position");
    }
    Instance inst{s.id, std::move(s.tokens), row.subj, row.obj, std::move(row.relation),
                  row.sentiment, false};
    inst.fragmented = is_fragmented(inst.tokens);
    validate(inst);
    out.push_back(std::move(inst));
  }
  return out;
}

std::vector<Instance> read_conllu(const std::filesystem::path& conllu,
                                  const std::filesystem::path& sidecar) {
  std::ifstream c(conllu);
  if (!c) throw std::runtime_error("cannot open " + conllu.string());
  std::ifstream s(sidecar);
  if (!s) throw std::runtime_error("cannot open " + sidecar.string());
  return read_conllu(c, s);
}

void write_conllu(std::ostream& out, const std::vector<Instance>& instances) {
  for (const auto& inst : instances) {
    out << "# sent_id = " << inst.id << '\n';
    for (const auto& t : inst.tokens) {
      out << t.index + 1 << '\t' << t.surface << '\t' << t.surface << "\t_\t_\t_\t"
          << (t.head == kRoot ? 0 : t.head + 1) << '\t' << (t.deprel.empty() ? "_" : t.deprel)
          << "\t_\t_\n";
    }
    out << '\n';
  }
}

void write_sidecar(std::ostream& out, const std::vector<Instance>& instances) {
  for (const auto& inst : instances) {
    Json j;
    j["id"] = inst.id;
    j["subj"] = {inst.subj.lo, inst.subj.hi};
    j["obj"] = {inst.obj.lo, inst.obj.hi};
    j["relation"] = inst.relation;
    if (inst.gold_sentiment) j["sentiment"] = to_string(*inst.gold_sentiment);
    out << j.dump() << '\n';
  }
}

}  // namespace ssdp
