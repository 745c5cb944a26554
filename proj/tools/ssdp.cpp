#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ssdp/error.hpp"
#include "ssdp/evalkit.hpp"
#include "ssdp/gradcheck.hpp"
#include "ssdp/kernels.hpp"
#include "ssdp/rng.hpp"
#include "ssdp/syntax.hpp"
#include "ssdp/trainer.hpp"

namespace fs = std::filesystem;
using namespace ssdp;

namespace {

struct InputFlags {
  std::string conllu, sidecar, jsonl, data, split = "train";
};

void add_input_flags(CLI::App* cmd, InputFlags& f) {
  cmd->add_option("--conllu", f.conllu, "CoNLL-U file (with --sidecar)");
  cmd->add_option("--sidecar", f.sidecar, "span/relation sidecar for --conllu");
  cmd->add_option("--jsonl", f.jsonl, "instance JSONL file");
  cmd->add_option("--data", f.data, "corpus directory written by synth");
  cmd->add_option("--split", f.split, "split to read from --data")->capture_default_str();
}

std::vector<Instance> read_inputs(const InputFlags& f) {
  if (!f.conllu.empty()) {
    if (f.sidecar.empty()) throw ConfigError("--conllu needs --sidecar");
    return read_conllu(f.conllu, f.sidecar);
  }
  if (!f.jsonl.empty()) return read_jsonl(f.jsonl);
  if (!f.data.empty()) {
    Corpus c = load_corpus(f.data);
    auto it = c.splits.find(f.split);
    if (it == c.splits.end()) throw ConfigError("no split '" + f.split + "' in " + f.data);
    return it->second;
  }
  throw ConfigError("give --conllu/--sidecar, --jsonl or --data");
}

SentimentLexicon lexicon_from(const std::string& path) {
  return path.empty() ? SentimentLexicon::financial() : SentimentLexicon::load(path);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

// Data directory recorded in the run's config.txt, for a checkpoint at
// <run>/checkpoints/<name>.json.
std::optional<TrainConfig> run_config_for(const fs::path& checkpoint) {
  const fs::path cfg = checkpoint.parent_path().parent_path() / "config.txt";
  if (!fs::exists(cfg)) return std::nullopt;
  return TrainConfig::load(cfg);
}

std::string f6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

int fail(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sentiment-aware shortest-dependency-path relation extraction toolkit"};
  app.require_subcommand(1);
  app.footer("Environment: SSDP_THREADS caps worker threads (0 = auto); SSDP_KERNELS = auto|scalar|avx2.");
  std::uint64_t seed = 1;
  bool seed_given = false;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic coupled corpus");
  std::string synth_out;
  std::size_t n_train = 2000, n_dev = 400, n_test = 400;
  double coupling = 0.9;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_option("--seed", seed, "generator seed")->capture_default_str();
  synth->add_option("--train", n_train, "training instances")->capture_default_str();
  synth->add_option("--dev", n_dev, "dev instances")->capture_default_str();
  synth->add_option("--test", n_test, "test instances")->capture_default_str();
  synth->add_option("--coupling", coupling, "sentiment-relation coupling in [0,1]")->capture_default_str();

  // annotate
  auto* annot = app.add_subcommand("annotate", "Attach SDP/ISL signals to instances");
  InputFlags annot_in;
  std::string annot_out, annot_lexicon, annot_variant = "ISL";
  add_input_flags(annot, annot_in);
  annot->add_option("--variant", annot_variant, "EPL, SPL or ISL")->capture_default_str();
  annot->add_option("--lexicon", annot_lexicon, "lexicon TSV (default: built-in)");
  annot->add_option("--out", annot_out, "output directory")->required();
  annot->add_option("--seed", seed, "unused; accepted for uniformity");

  // sdp dump
  auto* sdp = app.add_subcommand("sdp", "Shortest dependency path tools");
  auto* sdp_dump = sdp->add_subcommand("dump", "Print per-instance SDP as JSON lines");
  sdp->require_subcommand(1);
  InputFlags sdp_in;
  std::string sdp_out;
  add_input_flags(sdp_dump, sdp_in);
  sdp_dump->add_option("--out", sdp_out, "write sdp.jsonl here instead of stdout");

  // train
  auto* trn = app.add_subcommand("train", "Train a model from a config file");
  std::string train_config, train_out, train_data;
  trn->add_option("--config", train_config, "key = value config file")->required();
  trn->add_option("--out", train_out, "run directory")->required();
  trn->add_option("--data", train_data, "override the config's data directory");
  trn->add_option("--seed", seed, "override the config's seed")->each([&](const std::string&) { seed_given = true; });

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  std::string eval_ckpt, eval_data, eval_split = "test", eval_out, eval_lexicon;
  ev->add_option("--checkpoint", eval_ckpt, "checkpoint JSON")->required();
  ev->add_option("--split", eval_split, "split name")->capture_default_str();
  ev->add_option("--data", eval_data, "corpus directory (default: from the run's config)");
  ev->add_option("--lexicon", eval_lexicon, "lexicon TSV (default: from the run's config)");
  ev->add_option("--out", eval_out, "report directory");
  ev->add_option("--seed", seed, "unused; accepted for uniformity");

  // ablate
  auto* abl = app.add_subcommand("ablate", "Train and evaluate every cell of a grid");
  std::string grid_file, ablate_out, ablate_data;
  abl->add_option("--grid", grid_file, "grid file (config keys plus grid.* axes)")->required();
  abl->add_option("--out", ablate_out, "output directory")->required();
  abl->add_option("--data", ablate_data, "override the grid's data directory");
  abl->add_option("--seed", seed, "unused; seeds come from the grid");

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  std::size_t gc_instances = 20;
  std::string gc_out, gc_blocks;
  double gc_floor = 1e-5;
  std::string gc_divergence = "renormalized";
  gc->add_option("--seed", seed, "model and sample seed")->capture_default_str();
  gc->add_option("--instances", gc_instances, "instances to check")->capture_default_str();
  gc->add_option("--blocks", gc_blocks, "comma-separated block-name prefixes (default: all)");
  gc->add_option("--floor", gc_floor, "relative-error denominator floor")->capture_default_str();
  gc->add_option("--asp-divergence", gc_divergence, "renormalized or generalized")->capture_default_str();
  gc->add_option("--out", gc_out, "report directory");

  // inspect
  auto* ins = app.add_subcommand("inspect", "Export attention for one instance");
  std::string ins_ckpt, ins_data, ins_split = "dev", ins_id, ins_out, ins_lexicon;
  ins->add_option("--checkpoint", ins_ckpt, "checkpoint JSON")->required();
  ins->add_option("--instance", ins_id, "instance id")->required();
  ins->add_option("--data", ins_data, "corpus directory (default: from the run's config)");
  ins->add_option("--split", ins_split, "split name")->capture_default_str();
  ins->add_option("--lexicon", ins_lexicon, "lexicon TSV (default: from the run's config)");
  ins->add_option("--out", ins_out, "output directory")->required();
  ins->add_option("--seed", seed, "unused; accepted for uniformity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* sub = nullptr;
    for (const auto* s : app.get_subcommands()) sub = s;
    std::cerr << (sub ? sub->help() : app.help());
    return 1;
  }

  try {
    if (*synth) {
      CorpusManifest m = default_manifest(seed, n_train, n_dev, n_test, coupling);
      const Splits splits = synthesize_corpus(m, coupling);
      write_corpus(synth_out, m, splits);
      std::cout << "wrote " << n_train + n_dev + n_test << " instances to " << synth_out << "\n";
    } else if (*annot) {
      const auto instances = read_inputs(annot_in);
      const SentimentLexicon lex = lexicon_from(annot_lexicon);
      const IslVariant variant = parse_variant(annot_variant);
      std::string out;
      std::size_t disconnected = 0, defaulted = 0;
      for (const auto& inst : instances) {
        validate(inst);
        const Annotation a = annotate(inst, lex, variant);
        disconnected += !a.sdp.connected;
        defaulted += a.tag.defaulted;
        out += to_json_line(inst, a.signal) + "\n";
      }
      write_file(fs::path(annot_out) / "annotated.jsonl", out);
      std::cout << "annotated " << instances.size() << " instances (" << disconnected
                << " disconnected SDP fallbacks, " << defaulted << " defaulted sentiment)\n";
    } else if (*sdp) {
      const auto instances = read_inputs(sdp_in);
      std::string out;
      for (const auto& inst : instances) {
        validate(inst);
        const SdpResult r = instance_sdp(inst);
        nlohmann::ordered_json j;
        j["id"] = inst.id;
        j["path"] = r.path;
        j["token_set"] = r.token_set;
        std::vector<std::string> words;
        for (int p : r.path) words.push_back(inst.tokens[p].surface);
        j["path_tokens"] = words;
        j["connected"] = r.connected;
        out += j.dump() + "\n";
      }
      if (sdp_out.empty()) {
        std::cout << out;
      } else {
        write_file(fs::path(sdp_out) / "sdp.jsonl", out);
      }
    } else if (*trn) {
      TrainConfig cfg = TrainConfig::load(train_config);
      if (!train_data.empty()) cfg.data = train_data;
      if (seed_given) cfg.seed = seed;
      if (cfg.data.empty()) throw ConfigError("config has no data directory");
      const Corpus corpus = load_corpus(cfg.data);
      const fs::path out = train_out;
      std::vector<Example> dev;
      const SentimentLexicon lex = config_lexicon(cfg);
      const auto dev_it = corpus.splits.find("dev");
      const TrainResult result = train(cfg, corpus, out, [&](int epoch, const ModelState& s) {
        if (dev_it == corpus.splits.end() || dev_it->second.empty()) return;
        if (dev.empty()) dev = prepare_examples(dev_it->second, s, lex, cfg.isl_variant);
        const Predictions p = predict(s, dev);
        const EvalReport r = score(s.relations(), corpus.manifest.no_relation, p.gold, p.predicted);
        double mass = 0.0;
        for (double v : p.isl_mass) mass += v;
        std::cout << "epoch " << epoch << " dev_micro_f1 " << f6(r.micro_f1) << " dev_isl_mass "
                  << f6(mass / static_cast<double>(dev.size())) << "\n";
      });
      std::cout << "final checkpoint " << result.record.final_checkpoint << "\n";
    } else if (*ev) {
      const ModelState state = load_checkpoint(eval_ckpt);
      const auto run_cfg = run_config_for(eval_ckpt);
      std::string data = eval_data;
      if (data.empty() && run_cfg) data = run_cfg->data;
      if (data.empty()) throw ConfigError("no --data and no run config next to the checkpoint");
      std::string lexicon = eval_lexicon;
      if (lexicon.empty() && run_cfg) lexicon = run_cfg->lexicon;
      const Corpus corpus = load_corpus(data);
      const auto it = corpus.splits.find(eval_split);
      if (it == corpus.splits.end()) throw ConfigError("no split '" + eval_split + "'");
      const EvalReport r = evaluate(state, it->second, corpus.manifest, lexicon_from(lexicon));
      std::cout << r.to_text();
      if (!eval_out.empty()) {
        const fs::path out = eval_out;
        write_file(out / "report.json", r.to_json() + "\n");
        write_file(out / "report.txt", r.to_text());
        write_file(out / "confusion.csv", r.confusion_csv());
        write_file(out / "per_relation.csv", r.per_relation_csv());
      }
    } else if (*abl) {
      std::ifstream in(grid_file);
      if (!in) throw ConfigError("cannot read grid " + grid_file);
      std::stringstream ss;
      ss << in.rdbuf();
      std::vector<TrainConfig> configs = parse_grid(ss.str());
      for (auto& c : configs) {
        if (!ablate_data.empty()) c.data = ablate_data;
      }
      if (configs.empty() || configs.front().data.empty()) throw ConfigError("grid has no data directory");
      for (const auto& c : configs) {
        if (c.data != configs.front().data) throw ConfigError("grid cells must share one data directory");
      }
      const Corpus corpus = load_corpus(configs.front().data);
      const auto rows = ablation_grid(configs, corpus, ablate_out);
      std::cout << ablation_csv(rows);
    } else if (*gc) {
      const CorpusManifest m = default_manifest(seed, 200, 10, 10);
      Splits splits = synthesize_corpus(m, 0.9);
      const auto& pool = splits.at("train");
      ModelConfig mc = gradcheck_model_config(Vocabulary::build(pool).size(),
                                              static_cast<int>(m.labels().size()));
      ModelState state = ModelState::initialize(mc, Vocabulary::build(pool), m.labels(), seed);
      Rng rng(seed);
      std::vector<std::size_t> idx(pool.size());
      for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      rng.shuffle(std::span<std::size_t>(idx));
      std::vector<Instance> sample;
      for (std::size_t i = 0; i < std::min(gc_instances, idx.size()); ++i) sample.push_back(pool[idx[i]]);
      const auto examples = prepare_examples(sample, state, SentimentLexicon::financial(), IslVariant::isl);
      GradcheckOptions opt;
      opt.floor = gc_floor;
      opt.asp.divergence = parse_asp_divergence(gc_divergence);
      std::stringstream bs(gc_blocks);
      for (std::string b; std::getline(bs, b, ',');) {
        if (!b.empty()) opt.blocks.push_back(b);
      }
      const GradcheckReport rep = gradcheck(state, examples, opt);
      std::cout << rep.to_text();
      if (!gc_out.empty()) {
        write_file(fs::path(gc_out) / "gradcheck.txt", rep.to_text());
        write_file(fs::path(gc_out) / "gradcheck.json", rep.to_json() + "\n");
      }
      return rep.passed() ? 0 : 2;
    } else if (*ins) {
      const ModelState state = load_checkpoint(ins_ckpt);
      const auto run_cfg = run_config_for(ins_ckpt);
      std::string data = ins_data;
      if (data.empty() && run_cfg) data = run_cfg->data;
      if (data.empty()) throw ConfigError("no --data and no run config next to the checkpoint");
      std::string lexicon = ins_lexicon;
      if (lexicon.empty() && run_cfg) lexicon = run_cfg->lexicon;
      const IslVariant variant = run_cfg ? run_cfg->isl_variant : IslVariant::isl;
      const Corpus corpus = load_corpus(data);
      const auto it = corpus.splits.find(ins_split);
      if (it == corpus.splits.end()) throw ConfigError("no split '" + ins_split + "'");
      const Instance* found = nullptr;
      for (const auto& inst : it->second) {
        if (inst.id == ins_id) found = &inst;
      }
      if (!found) throw ConfigError("no instance '" + ins_id + "' in split " + ins_split);
      const SentimentLexicon lex = lexicon_from(lexicon);
      export_attention(state, *found, lex, variant, ins_out, ins_id);
      const SdpResult r = instance_sdp(*found);
      std::cout << "instance " << ins_id << " relation " << found->relation << "\n";
      std::cout << "sdp";
      for (int p : r.path) std::cout << " " << found->tokens[p].surface;
      std::cout << "\nwrote " << (fs::path(ins_out) / (ins_id + ".csv")).string() << " and .svg\n";
    }
  } catch (const ParseError& e) {
    return fail(1, e.what());
  } catch (const ValidationError& e) {
    return fail(1, e.what());
  } catch (const ConfigError& e) {
    return fail(1, e.what());
  } catch (const NoPathError& e) {
    return fail(2, e.what());
  } catch (const std::exception& e) {
    return fail(2, e.what());
  }
  return 0;
}
