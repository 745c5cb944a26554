#include "ssdp/synth.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <span>

#include "ssdp/error.hpp"
#include "ssdp/rng.hpp"

namespace ssdp {

namespace {

using Words = std::span<const std::string_view>;

constexpr std::string_view kOrgs[] = {"acme",    "globex",    "initech", "umbrella", "hooli",
                                      "vandelay", "wayne",    "stark",   "tyrell",   "cyberdyne",
                                      "soylent", "wonka",     "oscorp",  "aperture", "contoso",
                                      "fabrikam", "dunder",   "northwind", "tailspin", "zenith"};
constexpr std::string_view kOrgSuffixes[] = {"corp", "inc", "holdings", "group", "bank", "partners"};
constexpr std::string_view kFirstNames[] = {"john", "mary", "david", "susan", "wei",   "carlos",
                                            "anna", "omar", "priya", "kenji", "elena", "tom"};
constexpr std::string_view kLastNames[] = {"smith", "chen", "garcia", "mueller",
                                           "tanaka", "rossi", "kumar", "novak"};
constexpr std::string_view kPlaces[] = {"china", "brazil", "germany", "india",
                                        "japan", "canada", "texas",   "ontario"};
constexpr std::array<std::array<std::string_view, 2>, 3> kTwoWordPlaces{
    {{"new", "york"}, {"hong", "kong"}, {"south", "africa"}}};
constexpr std::string_view kAmounts[] = {"5", "12", "40", "150", "3.2", "7.5", "9", "64"};
constexpr std::string_view kScales[] = {"million", "billion"};
constexpr std::string_view kCurrencies[] = {"dollars", "euros", "yuan"};

constexpr std::string_view kProfitNouns[] = {"profit", "earnings", "income"};
constexpr std::string_view kLossNouns[] = {"loss", "deficit", "shortfall"};
constexpr std::string_view kNeutralMoneyNouns[] = {"results", "figures", "margin"};
constexpr std::string_view kAcquireVerbs[] = {"acquired", "bought", "purchased"};
constexpr std::string_view kSueVerbs[] = {"sued", "accused", "blamed"};
constexpr std::string_view kNeutralOrgVerbs[] = {"approached", "contacted", "engaged"};
constexpr std::string_view kJoinVerbs[] = {"joined", "rejoined"};
constexpr std::string_view kLeaveVerbs[] = {"left", "quit", "exited"};
constexpr std::string_view kNeutralPersonVerbs[] = {"visited", "advised", "met"};
constexpr std::string_view kExpandVerbs[] = {"expanded", "moved", "ventured"};
constexpr std::string_view kPlainVerbs[] = {"announced", "signed", "discussed", "published",
                                            "finalized"};
constexpr std::string_view kPlainNouns[] = {"agreement", "plan", "report", "statement",
                                            "proposal"};
constexpr std::string_view kDays[] = {"monday", "tuesday", "friday"};
constexpr std::string_view kOrdinals[] = {"first", "second", "third", "fourth"};
constexpr std::string_view kMoneyPreps[] = {"to", "from", "by"};

constexpr std::string_view kPosAdj[] = {"strong", "robust", "solid", "healthy",
                                        "upbeat", "record", "favorable", "stellar"};
constexpr std::string_view kNegAdj[] = {"weak", "poor",  "sluggish", "dismal",
                                        "disappointing", "bleak", "soft", "grim"};
constexpr std::string_view kPosNoun[] = {"growth", "gains", "optimism", "demand", "momentum",
                                         "recovery"};
constexpr std::string_view kNegNoun[] = {"losses", "decline", "concerns", "pressure",
                                         "headwinds", "downturn"};
constexpr std::string_view kPosAdv[] = {"steadily", "impressively", "comfortably", "smoothly"};
constexpr std::string_view kNegAdv[] = {"poorly", "badly", "weakly", "disappointingly"};
constexpr std::string_view kPosVerb[] = {"rose", "climbed", "jumped", "surged", "grew", "increased"};
constexpr std::string_view kNegVerb[] = {"fell", "dropped", "declined", "slumped", "plunged",
                                         "decreased"};

std::string pick(Rng& rng, Words words) { return std::string(words[rng.below(words.size())]); }

enum class CueKind { adj, noun, adv, verb };

Words cue_list(CueKind kind, Sentiment s) {
  const bool pos = s == Sentiment::positive;
  switch (kind) {
    case CueKind::adj:
      return pos ? Words(kPosAdj) : Words(kNegAdj);
    case CueKind::noun:
      return pos ? Words(kPosNoun) : Words(kNegNoun);
    case CueKind::adv:
      return pos ? Words(kPosAdv) : Words(kNegAdv);
    case CueKind::verb:
      return pos ? Words(kPosVerb) : Words(kNegVerb);
  }
  return {};
}

Sentiment flip(Sentiment s) {
  return s == Sentiment::positive ? Sentiment::negative : Sentiment::positive;
}

struct CueSlot {
  int token;
  CueKind kind;
  int particle = -1;  // "up"/"down" riding on a verb slot; counts as a second vote
};

class Builder {
 public:
  int add(std::string_view surface) {
    const int i = static_cast<int>(tokens_.size());
    tokens_.push_back({i, std::string(surface), kRoot, "root"});
    return i;
  }
  void attach(int child, int head, std::string_view deprel) {
    tokens_[child].head = head;
    tokens_[child].deprel = std::string(deprel);
  }
  void set_surface(int i, std::string s) { tokens_[i].surface = std::move(s); }
  int size() const { return static_cast<int>(tokens_.size()); }
  std::vector<Token> take() { return std::move(tokens_); }

  void cue(int token, CueKind kind, int particle = -1) { cues_.push_back({token, kind, particle}); }
  std::vector<CueSlot>& cues() { return cues_; }

 private:
  std::vector<Token> tokens_;
  std::vector<CueSlot> cues_;
};

struct Entity {
  Span span;
  int head;
};

enum class EntityType { org, person, money, place };

EntityType parse_type(const std::string& t) {
  if (t == "ORG") return EntityType::org;
  if (t == "PER") return EntityType::person;
  if (t == "MONEY") return EntityType::money;
  if (t == "GPE") return EntityType::place;
  throw ConfigError("unknown entity type '" + t + "'");
}

// Appends the entity's tokens; its head is left unattached for the caller.
Entity add_entity(Builder& b, Rng& rng, EntityType type) {
  const int start = b.size();
  switch (type) {
    case EntityType::org: {
      const int name = b.add(pick(rng, kOrgs));
      if (rng.chance(0.4)) {
        const int suffix = b.add(pick(rng, kOrgSuffixes));
        b.attach(name, suffix, "compound");
        return {{start, suffix}, suffix};
      }
      return {{start, name}, name};
    }
    case EntityType::person: {
      const int first = b.add(pick(rng, kFirstNames));
      const int last = b.add(pick(rng, kLastNames));
      b.attach(last, first, "flat");
      return {{start, last}, first};
    }
    case EntityType::money: {
      const int amount = b.add(pick(rng, kAmounts));
      const int scale = b.add(pick(rng, kScales));
      const int currency = b.add(pick(rng, kCurrencies));
      b.attach(amount, scale, "compound");
      b.attach(scale, currency, "nummod");
      return {{start, currency}, currency};
    }
    case EntityType::place: {
      if (rng.chance(0.3)) {
        const auto& words = kTwoWordPlaces[rng.below(kTwoWordPlaces.size())];
        const int first = b.add(words[0]);
        const int second = b.add(words[1]);
        b.attach(first, second, "compound");
        return {{start, second}, second};
      }
      const int name = b.add(pick(rng, kPlaces));
      return {{start, name}, name};
    }
  }
  return {{start, start}, start};
}

// Optional sentence-initial adverbial; returns the token to attach to the
// main verb plus the comma, or -1 when nothing was added.
std::pair<int, int> add_prefix(Builder& b, Rng& rng) {
  switch (rng.below(4)) {
    case 0: {
      const int in = b.add("in");
      const int det = b.add("the");
      const int ord = b.add(pick(rng, kOrdinals));
      const int quarter = b.add("quarter");
      b.attach(in, quarter, "case");
      b.attach(det, quarter, "det");
      b.attach(ord, quarter, "amod");
      return {quarter, b.add(",")};
    }
    case 1: {
      const int in = b.add("in");
      const int det = b.add("a");
      const int adj = b.add("_");
      const int quarter = b.add("quarter");
      b.attach(in, quarter, "case");
      b.attach(det, quarter, "det");
      b.attach(adj, quarter, "amod");
      b.cue(adj, CueKind::adj);
      return {quarter, b.add(",")};
    }
    case 2: {
      const int on = b.add("on");
      const int day = b.add(pick(rng, kDays));
      b.attach(on, day, "case");
      return {day, b.add(",")};
    }
    default:
      return {-1, -1};
  }
}

// Trailing modifiers of the main verb, in random order without repeats.
void add_suffixes(Builder& b, Rng& rng, int verb) {
  std::array<int, 5> kinds{0, 1, 2, 3, 4};
  rng.shuffle(std::span<int>(kinds));
  auto count = rng.below(3);
  if (b.cues().empty()) {
    // Every sentence carries at least one sentiment cue.
    count = std::max<std::uint64_t>(count, 1);
    if (kinds[0] > 2) {
      const auto cue_kind = std::find_if(kinds.begin(), kinds.end(), [](int k) { return k <= 2; });
      std::swap(kinds[0], *cue_kind);
    }
  }
  for (std::uint64_t k = 0; k < count; ++k) {
    switch (kinds[k]) {
      case 0: {
        const int amid = b.add("amid");
        const int adj = b.add("_");
        const int noun = b.add("_");
        b.attach(amid, noun, "case");
        b.attach(adj, noun, "amod");
        b.attach(noun, verb, "obl");
        b.cue(adj, CueKind::adj);
        b.cue(noun, CueKind::noun);
        break;
      }
      case 1: {
        const int amid = b.add("amid");
        const int noun = b.add("_");
        b.attach(amid, noun, "case");
        b.attach(noun, verb, "obl");
        b.cue(noun, CueKind::noun);
        break;
      }
      case 2: {
        const int after = b.add("after");
        const int det = b.add("a");
        const int adj = b.add("_");
        const int year = b.add("year");
        b.attach(after, year, "case");
        b.attach(det, year, "det");
        b.attach(adj, year, "amod");
        b.attach(year, verb, "obl");
        b.cue(adj, CueKind::adj);
        break;
      }
      case 3: {
        const int as = b.add("as");
        const int analysts = b.add("analysts");
        const int expected = b.add("expected");
        b.attach(as, expected, "mark");
        b.attach(analysts, expected, "nsubj");
        b.attach(expected, verb, "advcl");
        break;
      }
      default: {
        const int whilst = b.add("while");
        const Entity other = add_entity(b, rng, EntityType::org);
        const int reviewed = b.add("reviewed");
        const int det = b.add("the");
        const int deal = b.add("deal");
        b.attach(whilst, reviewed, "mark");
        b.attach(other.head, reviewed, "nsubj");
        b.attach(reviewed, verb, "advcl");
        b.attach(det, deal, "det");
        b.attach(deal, reviewed, "obj");
        break;
      }
    }
  }
}

int maybe_adverb(Builder& b, Rng& rng) {
  if (!rng.chance(0.35)) return -1;
  const int adv = b.add("_");
  b.cue(adv, CueKind::adv);
  return adv;
}

void close_clause(Builder& b, int verb, std::pair<int, int> prefix, int adverb) {
  if (prefix.first >= 0) {
    b.attach(prefix.first, verb, "obl");
    b.attach(prefix.second, verb, "punct");
  }
  if (adverb >= 0) b.attach(adverb, verb, "advmod");
  b.attach(b.add("."), verb, "punct");
}

// Assigns cue polarities so the weighted majority is `gold`, then fills in
// surfaces. Every slot gets a cue word, so a sentence with at least one
// slot always carries a lexicon majority equal to the gold label.
void plant_cues(Builder& b, Rng& rng, Sentiment gold) {
  auto& cues = b.cues();
  if (cues.empty()) return;
  std::vector<Sentiment> polarity(cues.size(), gold);
  for (int attempt = 0; attempt < 64; ++attempt) {
    int margin = 0;
    for (std::size_t i = 0; i < cues.size(); ++i) {
      polarity[i] = rng.chance(0.7) ? gold : flip(gold);
      const int votes = cues[i].particle >= 0 ? 2 : 1;
      margin += polarity[i] == gold ? votes : -votes;
    }
    if (margin > 0) break;
    std::fill(polarity.begin(), polarity.end(), gold);
  }
  for (std::size_t i = 0; i < cues.size(); ++i) {
    b.set_surface(cues[i].token, pick(rng, cue_list(cues[i].kind, polarity[i])));
    if (cues[i].particle >= 0) {
      b.set_surface(cues[i].particle, polarity[i] == Sentiment::positive ? "up" : "down");
    }
  }
}

struct EntityPair {
  Span subj;
  Span obj;
};

Words relation_words(const std::string& relation, bool ambiguous) {
  if (relation == "profit_of") return ambiguous ? Words(kNeutralMoneyNouns) : Words(kProfitNouns);
  if (relation == "loss_of") return ambiguous ? Words(kNeutralMoneyNouns) : Words(kLossNouns);
  if (relation == "acquired") return ambiguous ? Words(kNeutralOrgVerbs) : Words(kAcquireVerbs);
  if (relation == "sued") return ambiguous ? Words(kNeutralOrgVerbs) : Words(kSueVerbs);
  if (relation == "hired_by") return ambiguous ? Words(kNeutralPersonVerbs) : Words(kJoinVerbs);
  if (relation == "dismissed_from") {
    return ambiguous ? Words(kNeutralPersonVerbs) : Words(kLeaveVerbs);
  }
  if (relation == "expanded_to") return Words(kExpandVerbs);
  return {};
}

// "[prefix] ORG 's NOUN [adv] VERB [up|down] PREP MONEY [suffixes] ."
EntityPair build_money(Builder& b, Rng& rng, Words nouns) {
  const auto prefix = add_prefix(b, rng);
  const Entity org = add_entity(b, rng, EntityType::org);
  const int poss = b.add("'s");
  const int noun = b.add(pick(rng, nouns));
  const int adverb = maybe_adverb(b, rng);
  const int verb = b.add("_");
  const int particle = rng.chance(0.5) ? b.add("_") : -1;
  const int prep = b.add(pick(rng, kMoneyPreps));
  const Entity money = add_entity(b, rng, EntityType::money);
  b.attach(poss, org.head, "case");
  b.attach(org.head, noun, "nmod:poss");
  b.attach(noun, verb, "nsubj");
  if (particle >= 0) b.attach(particle, verb, "compound:prt");
  b.attach(prep, money.head, "case");
  b.attach(money.head, verb, "obl");
  b.cue(verb, CueKind::verb, particle);
  add_suffixes(b, rng, verb);
  close_clause(b, verb, prefix, adverb);
  return {org.span, money.span};
}

// "[prefix] SUBJ [adv] VERB [into] OBJ [suffixes] ."
EntityPair build_transitive(Builder& b, Rng& rng, EntityType subj_type, EntityType obj_type,
                            Words verbs, bool into) {
  const auto prefix = add_prefix(b, rng);
  const Entity subj = add_entity(b, rng, subj_type);
  const int adverb = maybe_adverb(b, rng);
  const int verb = b.add(pick(rng, verbs));
  const int prep = into ? b.add("into") : -1;
  const Entity obj = add_entity(b, rng, obj_type);
  b.attach(subj.head, verb, "nsubj");
  if (prep >= 0) {
    b.attach(prep, obj.head, "case");
    b.attach(obj.head, verb, "obl");
  } else {
    b.attach(obj.head, verb, "obj");
  }
  add_suffixes(b, rng, verb);
  close_clause(b, verb, prefix, adverb);
  return {subj.span, obj.span};
}

// "[prefix] E1 and E2 [adv] VERB the NOUN [suffixes] ." -- coordinated
// mentions with no relation between them.
EntityPair build_unrelated(Builder& b, Rng& rng) {
  constexpr std::array<std::array<EntityType, 2>, 4> kPairs{{{EntityType::org, EntityType::org},
                                                             {EntityType::person, EntityType::org},
                                                             {EntityType::org, EntityType::person},
                                                             {EntityType::org, EntityType::place}}};
  const auto& pair = kPairs[rng.below(kPairs.size())];
  const auto prefix = add_prefix(b, rng);
  const Entity first = add_entity(b, rng, pair[0]);
  const int conj = b.add("and");
  const Entity second = add_entity(b, rng, pair[1]);
  const int adverb = maybe_adverb(b, rng);
  const int verb = b.add(pick(rng, kPlainVerbs));
  const int det = b.add("the");
  const int noun = b.add(pick(rng, kPlainNouns));
  b.attach(first.head, verb, "nsubj");
  b.attach(conj, second.head, "cc");
  b.attach(second.head, first.head, "conj");
  b.attach(det, noun, "det");
  b.attach(noun, verb, "obj");
  add_suffixes(b, rng, verb);
  close_clause(b, verb, prefix, adverb);
  return {first.span, second.span};
}

// Relations whose cue-free wording is shared with a partner of opposite
// polarity; for those, half the sentences use the shared wording.
bool has_partner(const std::string& relation) {
  return relation == "profit_of" || relation == "loss_of" || relation == "acquired" ||
         relation == "sued" || relation == "hired_by" || relation == "dismissed_from";
}

const std::vector<RelationSpec>& catalog() {
  static const std::vector<RelationSpec> relations{
      {"no_relation", "ANY", "ANY", std::nullopt},
      {"profit_of", "ORG", "MONEY", Sentiment::positive},
      {"loss_of", "ORG", "MONEY", Sentiment::negative},
      {"acquired", "ORG", "ORG", Sentiment::positive},
      {"sued", "ORG", "ORG", Sentiment::negative},
      {"hired_by", "PER", "ORG", Sentiment::positive},
      {"dismissed_from", "PER", "ORG", Sentiment::negative},
      {"expanded_to", "ORG", "GPE", Sentiment::positive},
  };
  return relations;
}

Instance generate(Rng& rng, const CorpusManifest& manifest, double coupling, std::string id) {
  // no_relation is drawn at a fixed 20% when declared, the rest uniformly.
  const auto& rels = manifest.relations;
  std::vector<const RelationSpec*> related;
  const RelationSpec* none = nullptr;
  for (const auto& r : rels) {
    if (r.name == manifest.no_relation) {
      none = &r;
    } else {
      related.push_back(&r);
    }
  }
  const RelationSpec& rel =
      (none && (related.empty() || rng.below(5) == 0)) ? *none : *related[rng.below(related.size())];

  Sentiment gold;
  if (rel.polarity && rng.chance(coupling)) {
    gold = *rel.polarity;
  } else {
    gold = rng.below(2) == 0 ? Sentiment::positive : Sentiment::negative;
  }
  const bool ambiguous = has_partner(rel.name) && rng.chance(0.5);

  Builder b;
  EntityPair pair;
  if (&rel == none) {
    pair = build_unrelated(b, rng);
  } else if (rel.obj_type == "MONEY") {
    pair = build_money(b, rng, relation_words(rel.name, ambiguous));
  } else {
    pair = build_transitive(b, rng, parse_type(rel.subj_type), parse_type(rel.obj_type),
                            relation_words(rel.name, ambiguous), rel.obj_type == "GPE");
  }
  plant_cues(b, rng, gold);

  Instance inst;
  inst.id = std::move(id);
  inst.tokens = b.take();
  inst.subj = pair.subj;
  inst.obj = pair.obj;
  inst.relation = rel.name;
  inst.gold_sentiment = gold;
  inst.fragmented = false;
  return inst;
}

}  // namespace

const std::vector<std::pair<std::string, Sentiment>>& synth_cue_words() {
  static const auto words = [] {
    std::vector<std::pair<std::string, Sentiment>> out;
    for (Sentiment s : {Sentiment::positive, Sentiment::negative}) {
      for (CueKind k : {CueKind::adj, CueKind::noun, CueKind::adv, CueKind::verb}) {
        for (auto w : cue_list(k, s)) out.emplace_back(std::string(w), s);
      }
    }
    out.emplace_back("up", Sentiment::positive);
    out.emplace_back("down", Sentiment::negative);
    return out;
  }();
  return words;
}

CorpusManifest default_manifest(std::uint64_t seed, std::size_t train, std::size_t dev,
                                std::size_t test, double coupling) {
  CorpusManifest m;
  m.relations = catalog();
  m.no_relation = "no_relation";
  m.split_sizes = {{"train", train}, {"dev", dev}, {"test", test}};
  m.seed = seed;
  m.coupling = coupling;
  return m;
}

Splits synthesize_corpus(const CorpusManifest& manifest, double coupling) {
  if (!(coupling >= 0.0 && coupling <= 1.0)) {
    throw ConfigError("sentiment coupling must lie in [0, 1]");
  }
  if (manifest.relations.size() < 2) throw ConfigError("need at least two relation labels");
  manifest.validate();
  for (const auto& r : manifest.relations) {
    if (r.name == manifest.no_relation) continue;
    const auto& known = catalog();
    const bool ok = std::any_of(known.begin(), known.end(), [&](const RelationSpec& k) {
      return k.name == r.name && k.subj_type == r.subj_type && k.obj_type == r.obj_type;
    });
    if (!ok) throw ConfigError("no generator template for relation '" + r.name + "'");
  }

  Rng rng(manifest.seed);
  Splits out;
  for (const char* split : {"train", "dev", "test"}) {
    const auto it = manifest.split_sizes.find(split);
    const std::size_t count = it == manifest.split_sizes.end() ? 0 : it->second;
    auto& list = out[split];
    list.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      char id[64];
      std::snprintf(id, sizeof id, "%s-%05zu", split, i);
      list.push_back(generate(rng, manifest, coupling, id));
    }
  }
  return out;
}

void write_corpus(const std::filesystem::path& dir, const CorpusManifest& manifest,
                  const Splits& splits) {
  std::filesystem::create_directories(dir);
  write_manifest(dir / "manifest.json", manifest);
  for (const auto& [split, instances] : splits) {
    auto open = [&](const std::string& name) {
      std::ofstream f(dir / name, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
      return f;
    };
    auto jsonl = open(split + ".jsonl");
    write_jsonl(jsonl, instances);
    auto conllu = open(split + ".conllu");
    write_conllu(conllu, instances);
    auto sidecar = open(split + ".sidecar.jsonl");
    write_sidecar(sidecar, instances);
  }
}

Corpus load_corpus(const std::filesystem::path& dir) {
  Corpus corpus;
  corpus.manifest = read_manifest(dir / "manifest.json");
  const auto labels = corpus.manifest.labels();
  for (const auto& [split, count] : corpus.manifest.split_sizes) {
    const auto path = dir / (split + ".jsonl");
    auto instances = std::filesystem::exists(path) ? read_jsonl(path) : std::vector<Instance>{};
    if (instances.size() != count) {
      throw ValidationError("split " + split + ": manifest declares " + std::to_string(count) +
                            " instances, file has " + std::to_string(instances.size()));
    }
    for (const auto& inst : instances) validate(inst, labels);
    corpus.splits[split] = std::move(instances);
  }
  return corpus;
}

}  // namespace ssdp
