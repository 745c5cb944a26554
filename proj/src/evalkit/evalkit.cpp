#include "ssdp/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "ssdp/error.hpp"
#include "ssdp/parallel.hpp"

namespace ssdp {

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int label_index(const std::vector<std::string>& labels, const std::string& name) {
  const auto it = std::find(labels.begin(), labels.end(), name);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

double entropy(const std::vector<double>& a) {
  double h = 0.0;
  for (double v : a) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

}  // namespace

EvalReport score(const std::vector<std::string>& labels, const std::string& no_relation,
                 const std::vector<int>& gold, const std::vector<int>& predicted) {
  if (gold.size() != predicted.size()) throw ValidationError("gold and predicted sizes differ");
  EvalReport r;
  r.labels = labels;
  r.no_relation = no_relation;
  r.instances = gold.size();
  const std::size_t k = labels.size();
  const int neg = label_index(labels, no_relation);
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    ++r.confusion[gold[i]][predicted[i]];
    if (gold[i] == predicted[i]) ++correct;
  }
  r.accuracy = ratio(static_cast<double>(correct), static_cast<double>(gold.size()));

  std::size_t tp = 0, fp = 0, fn = 0;
  double macro_sum = 0.0;
  std::size_t macro_n = 0;
  for (std::size_t c = 0; c < k; ++c) {
    RelationRow row;
    row.relation = labels[c];
    for (std::size_t o = 0; o < k; ++o) {
      row.support += r.confusion[c][o];
      if (o != c) {
        row.fn += r.confusion[c][o];
        row.fp += r.confusion[o][c];
      }
    }
    row.tp = r.confusion[c][c];
    row.precision = ratio(row.tp, row.tp + row.fp);
    row.recall = ratio(row.tp, row.tp + row.fn);
    row.f1 = f1_of(row.precision, row.recall);
    if (static_cast<int>(c) != neg) {
      tp += row.tp;
      fp += row.fp;
      fn += row.fn;
      if (row.support > 0 || row.tp + row.fp > 0) {
        macro_sum += row.f1;
        ++macro_n;
      }
    }
    r.per_relation.push_back(row);
  }
  r.micro_precision = ratio(tp, tp + fp);
  r.micro_recall = ratio(tp, tp + fn);
  r.micro_f1 = f1_of(r.micro_precision, r.micro_recall);
  r.macro_f1 = ratio(macro_sum, static_cast<double>(macro_n));
  return r;
}

std::vector<BucketRow> bucket_by_entity_pair(const CorpusManifest& manifest,
                                             const std::vector<std::string>& labels,
                                             const std::vector<int>& gold,
                                             const std::vector<int>& predicted) {
  const int neg = label_index(labels, manifest.no_relation);
  auto bucket_of = [&](int label) -> std::string {
    const RelationSpec* spec = manifest.find(labels[label]);
    if (!spec) throw ValidationError("relation '" + labels[label] + "' missing from manifest");
    return spec->subj_type + ":" + spec->obj_type;
  };
  std::map<std::string, BucketRow> rows;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i], p = predicted[i];
    if (g == neg && p == neg) continue;
    BucketRow& row = rows[bucket_of(g != neg ? g : p)];
    ++row.instances;
    if (p != neg && p == g) ++row.tp;
    if (p != neg && p != g) ++row.fp;
    if (g != neg && p != g) ++row.fn;
  }
  std::vector<BucketRow> out;
  for (auto& [name, row] : rows) {
    row.bucket = name;
    row.f1 = f1_of(ratio(row.tp, row.tp + row.fp), ratio(row.tp, row.tp + row.fn));
    out.push_back(row);
  }
  return out;
}

Predictions predict(const ModelState& state, const std::vector<Example>& examples) {
  Predictions p;
  const std::size_t n = examples.size();
  p.gold.resize(n);
  p.predicted.resize(n);
  p.isl_mass.resize(n);
  p.ib_entropy.resize(n);
  const Terms none{false, false, false};
  parallel_for(n, [&](std::size_t i) {
    const ExampleOutput out = run_example(state, examples[i], none, AspConfig{});
    p.gold[i] = examples[i].gold;
    p.predicted[i] = out.predicted;
    p.isl_mass[i] = isl_mass(examples[i], out.alpha_avg);
    p.ib_entropy[i] = entropy(out.alpha_ib);
  });
  return p;
}

EvalReport evaluate(const ModelState& state, const std::vector<Instance>& split,
                    const CorpusManifest& manifest, const SentimentLexicon& lexicon,
                    IslVariant variant) {
  if (split.empty()) throw ValidationError("cannot evaluate an empty split");
  const auto examples = prepare_examples(split, state, lexicon, variant);
  const Predictions p = predict(state, examples);
  EvalReport r = score(state.relations(), manifest.no_relation, p.gold, p.predicted);
  r.buckets = bucket_by_entity_pair(manifest, state.relations(), p.gold, p.predicted);
  double mass = 0.0, ent = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    mass += p.isl_mass[i];
    ent += p.ib_entropy[i];
  }
  r.mean_isl_mass = mass / static_cast<double>(examples.size());
  r.mean_ib_entropy = ent / static_cast<double>(examples.size());
  return r;
}

std::string EvalReport::to_text() const {
  std::ostringstream o;
  o << "instances " << instances << "\n"
    << "accuracy " << f6(accuracy) << "\n"
    << "micro_precision " << f6(micro_precision) << "\n"
    << "micro_recall " << f6(micro_recall) << "\n"
    << "micro_f1 " << f6(micro_f1) << "\n"
    << "macro_f1 " << f6(macro_f1) << "\n"
    << "mean_isl_mass " << f6(mean_isl_mass) << "\n"
    << "mean_ib_entropy " << f6(mean_ib_entropy) << "\n";
  o << "relation support tp fp fn precision recall f1\n";
  for (const auto& r : per_relation) {
    o << r.relation << " " << r.support << " " << r.tp << " " << r.fp << " " << r.fn << " "
      << f6(r.precision) << " " << f6(r.recall) << " " << f6(r.f1) << "\n";
  }
  o << "bucket instances f1\n";
  for (const auto& b : buckets) o << b.bucket << " " << b.instances << " " << f6(b.f1) << "\n";
  return o.str();
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["instances"] = instances;
  j["accuracy"] = accuracy;
  j["micro_precision"] = micro_precision;
  j["micro_recall"] = micro_recall;
  j["micro_f1"] = micro_f1;
  j["macro_f1"] = macro_f1;
  j["mean_isl_mass"] = mean_isl_mass;
  j["mean_ib_entropy"] = mean_ib_entropy;
  auto rel = nlohmann::ordered_json::array();
  for (const auto& r : per_relation) {
    rel.push_back({{"relation", r.relation}, {"support", r.support}, {"tp", r.tp}, {"fp", r.fp},
                   {"fn", r.fn}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}});
  }
  j["per_relation"] = rel;
  auto bk = nlohmann::ordered_json::array();
  for (const auto& b : buckets) {
    bk.push_back({{"bucket", b.bucket}, {"instances", b.instances}, {"tp", b.tp}, {"fp", b.fp},
                  {"fn", b.fn}, {"f1", b.f1}});
  }
  j["buckets"] = bk;
  j["labels"] = labels;
  j["confusion"] = confusion;
  return j.dump(2);
}

std::string EvalReport::confusion_csv() const {
  std::string out = "gold\\predicted";
  for (const auto& l : labels) out += "," + l;
  out += "\n";
  for (std::size_t g = 0; g < labels.size(); ++g) {
    out += labels[g];
    for (std::size_t p = 0; p < labels.size(); ++p) out += "," + std::to_string(confusion[g][p]);
    out += "\n";
  }
  return out;
}

std::string EvalReport::per_relation_csv() const {
  std::string out = "relation,support,tp,fp,fn,precision,recall,f1\n";
  for (const auto& r : per_relation) {
    out += r.relation + "," + std::to_string(r.support) + "," + std::to_string(r.tp) + "," +
           std::to_string(r.fp) + "," + std::to_string(r.fn) + "," + f6(r.precision) + "," +
           f6(r.recall) + "," + f6(r.f1) + "\n";
  }
  return out;
}

std::vector<TrainConfig> parse_grid(std::string_view text) {
  std::string base;
  std::vector<std::pair<std::string, std::vector<std::string>>> axes;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    const std::string body = line.substr(0, hash);
    const auto eq = body.find('=');
    std::string key = eq == std::string::npos ? body : body.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t\r") + 1);
    if (key.rfind("grid.", 0) != 0) {
      base += line + "\n";
      continue;
    }
    std::vector<std::string> values;
    std::stringstream vs(body.substr(eq + 1));
    std::string v;
    while (std::getline(vs, v, ',')) {
      v.erase(0, v.find_first_not_of(" \t"));
      v.erase(v.find_last_not_of(" \t\r") + 1);
      if (!v.empty()) values.push_back(v);
    }
    if (values.empty()) throw ConfigError("grid key '" + key + "' has no values");
    const std::string field = key.substr(5);
    if (field != "mode" && field != "isl_variant" && field != "seed" && field != "lambda_asp") {
      throw ConfigError("unsupported grid axis '" + key + "'");
    }
    axes.emplace_back(field, values);
  }
  std::vector<std::string> cells{""};
  for (const auto& [field, values] : axes) {
    std::vector<std::string> next;
    for (const auto& c : cells) {
      for (const auto& v : values) next.push_back(c + field + " = " + v + "\n");
    }
    cells = std::move(next);
  }
  std::vector<TrainConfig> out;
  for (const auto& c : cells) out.push_back(TrainConfig::parse(base + c));
  return out;
}

std::vector<AblationRow> ablation_grid(const std::vector<TrainConfig>& configs,
                                       const Corpus& corpus, const std::filesystem::path& out_dir) {
  std::vector<AblationRow> rows;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const TrainConfig& cfg = configs[i];
    std::filesystem::path cell;
    if (!out_dir.empty()) cell = out_dir / ("cell-" + std::to_string(i));
    const TrainResult run = train(cfg, corpus, cell);
    const SentimentLexicon lex = config_lexicon(cfg);
    AblationRow row;
    row.config = cfg;
    row.test = evaluate(run.final, corpus.splits.at("test"), corpus.manifest, lex, cfg.isl_variant);
    row.dev_isl_mass =
        evaluate(run.final, corpus.splits.at("dev"), corpus.manifest, lex, cfg.isl_variant).mean_isl_mass;
    rows.push_back(std::move(row));
  }
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir / "ablation.csv", std::ios::binary) << ablation_csv(rows);
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "mode,isl_variant,seed,lambda_asp,accuracy,micro_precision,micro_recall,micro_f1,macro_f1,dev_isl_mass\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.config.mode)) + "," + std::string(to_string(r.config.isl_variant)) +
           "," + std::to_string(r.config.seed) + "," + f6(r.config.lambda_asp) + "," +
           f6(r.test.accuracy) + "," + f6(r.test.micro_precision) + "," + f6(r.test.micro_recall) +
           "," + f6(r.test.micro_f1) + "," + f6(r.test.macro_f1) + "," + f6(r.dev_isl_mass) + "\n";
  }
  return out;
}

AttentionExport attention_of(const ModelState& state, const Example& ex,
                             const std::vector<std::string>& tokens) {
  const ExampleOutput out = run_example(state, ex, Terms{false, false, false}, AspConfig{});
  AttentionExport a;
  a.tokens = tokens;
  a.alpha_avg = out.alpha_avg;
  a.alpha_ib = out.alpha_ib;
  a.isl = ex.isl_mask;
  return a;
}

std::string attention_csv(const AttentionExport& a) {
  std::string out = "position,token,alpha_avg,alpha_ib,isl\n";
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    std::string tok = a.tokens[i];
    if (tok.find_first_of(",\"") != std::string::npos) {
      std::string q = "\"";
      for (char c : tok) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      tok = q + "\"";
    }
    out += std::to_string(i) + "," + tok + "," + g17(a.alpha_avg[i]) + "," + g17(a.alpha_ib[i]) +
           "," + std::to_string(a.isl[i]) + "\n";
  }
  return out;
}

AttentionExport read_attention_csv(const std::string& text) {
  AttentionExport a;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    if (cells.size() != 5) throw ParseError("attention csv: expected 5 columns", line_no);
    a.tokens.push_back(cells[1]);
    a.alpha_avg.push_back(std::stod(cells[2]));
    a.alpha_ib.push_back(std::stod(cells[3]));
    a.isl.push_back(static_cast<std::uint8_t>(std::stoi(cells[4])));
  }
  return a;
}

std::string attention_svg(const AttentionExport& a, const std::string& title) {
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      switch (c) {
        case '<': o += "&lt;"; break;
        case '>': o += "&gt;"; break;
        case '&': o += "&amp;"; break;
        case '"': o += "&quot;"; break;
        default: o += c;
      }
    }
    return o;
  };
  const int cell = 56, label_w = 90, top = 40;
  const int width = label_w + cell * static_cast<int>(a.tokens.size()) + 10;
  const int height = top + 2 * 30 + 60;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"monospace\" font-size=\"11\">\n";
  o << "<text x=\"4\" y=\"16\">" << esc(title) << "</text>\n";
  const std::vector<std::pair<std::string, const std::vector<double>*>> rows{
      {"alpha_avg", &a.alpha_avg}, {"alpha_ib", &a.alpha_ib}};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& vals = *rows[r].second;
    const double peak = vals.empty() ? 1.0 : std::max(1e-12, *std::max_element(vals.begin(), vals.end()));
    const int y = top + static_cast<int>(r) * 30;
    o << "<text x=\"4\" y=\"" << y + 18 << "\">" << rows[r].first << "</text>\n";
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const int shade = 255 - static_cast<int>(std::lround(200.0 * vals[i] / peak));
      o << "<rect x=\"" << label_w + cell * static_cast<int>(i) << "\" y=\"" << y << "\" width=\""
        << cell - 2 << "\" height=\"26\" fill=\"rgb(" << shade << "," << shade << ",255)\""
        << (a.isl[i] ? " stroke=\"black\"" : "") << "><title>" << esc(a.tokens[i]) << " "
        << f6(vals[i]) << "</title></rect>\n";
    }
  }
  for (std::size_t i = 0; i < a.tokens.size(); ++i) {
    const int x = label_w + cell * static_cast<int>(i) + 2;
    o << "<text x=\"" << x << "\" y=\"" << top + 78 << "\" transform=\"rotate(30 " << x << ","
      << top + 78 << ")\">" << esc(a.tokens[i]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void export_attention(const ModelState& state, const Instance& inst, const SentimentLexicon& lexicon,
                      IslVariant variant, const std::filesystem::path& dir, const std::string& stem) {
  validate(inst, state.relations());
  const Example ex = prepare_example(inst, state.vocab(), state.relations(), lexicon, variant,
                                     state.config().sentiment_token);
  std::vector<std::string> tokens;
  if (state.config().sentiment_token) tokens.emplace_back(to_string(ex.sentiment));
  for (const auto& t : inst.tokens) tokens.push_back(t.surface);
  const AttentionExport a = attention_of(state, ex, tokens);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / (stem + ".csv"), std::ios::binary) << attention_csv(a);
  std::ofstream(dir / (stem + ".svg"), std::ios::binary) << attention_svg(a, inst.id);
}

}  // namespace ssdp
