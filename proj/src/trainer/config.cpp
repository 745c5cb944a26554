#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ssdp/error.hpp"
#include "ssdp/trainer.hpp"

namespace ssdp {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "': bad number '" + v + "'");
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::baseline: return "baseline";
    case Mode::asp: return "+ASP";
    case Mode::saib: return "+SAIB";
    case Mode::asp_saib: return "+ASP+SAIB";
  }
  return "?";
}

std::string_view to_string(OptimizerKind o) { return o == OptimizerKind::sgd ? "sgd" : "adam"; }
std::string_view to_string(Schedule s) { return s == Schedule::joint ? "joint" : "alternate"; }
std::string_view to_string(AspReduction r) { return r == AspReduction::mean ? "mean" : "sum"; }

Mode parse_mode(std::string_view s) {
  if (s == "baseline") return Mode::baseline;
  if (s == "+ASP" || s == "asp") return Mode::asp;
  if (s == "+SAIB" || s == "saib") return Mode::saib;
  if (s == "+ASP+SAIB" || s == "asp+saib" || s == "asp_saib") return Mode::asp_saib;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "adam") return OptimizerKind::adam;
  throw ConfigError("unknown optimizer '" + std::string(s) + "'");
}

Schedule parse_schedule(std::string_view s) {
  if (s == "joint") return Schedule::joint;
  if (s == "alternate") return Schedule::alternate;
  throw ConfigError("unknown task schedule '" + std::string(s) + "'");
}

AspReduction parse_asp_reduction(std::string_view s) {
  if (s == "mean") return AspReduction::mean;
  if (s == "sum") return AspReduction::sum;
  throw ConfigError("unknown asp reduction '" + std::string(s) + "'");
}

TrainConfig TrainConfig::parse(std::string_view text) {
  TrainConfig c;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  std::map<std::string, int> seen;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(std::string_view(raw).substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string v = trim(std::string_view(line).substr(eq + 1));
    if (seen[key]++) throw ConfigError("config key '" + key + "' given twice");

    if (key == "data") c.data = v;
    else if (key == "lexicon") c.lexicon = v;
    else if (key == "layers") c.layers = parse_number<int>(key, v);
    else if (key == "heads") c.heads = parse_number<int>(key, v);
    else if (key == "d_model") c.d_model = parse_number<int>(key, v);
    else if (key == "d_ff") c.d_ff = parse_number<int>(key, v);
    else if (key == "max_len") c.max_len = parse_number<int>(key, v);
    else if (key == "last_k") c.last_k = parse_number<int>(key, v);
    else if (key == "attn_axis") c.attn_axis = parse_attn_axis(v);
    else if (key == "epochs") c.epochs = parse_number<int>(key, v);
    else if (key == "batch_size") c.batch_size = parse_number<int>(key, v);
    else if (key == "learning_rate") c.learning_rate = parse_number<double>(key, v);
    else if (key == "optimizer") c.optimizer = parse_optimizer(v);
    else if (key == "beta1") c.beta1 = parse_number<double>(key, v);
    else if (key == "beta2") c.beta2 = parse_number<double>(key, v);
    else if (key == "adam_epsilon") c.adam_epsilon = parse_number<double>(key, v);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
    else if (key == "mode") c.mode = parse_mode(v);
    else if (key == "isl_variant") c.isl_variant = parse_variant(v);
    else if (key == "lambda_asp") c.lambda_asp = parse_number<double>(key, v);
    else if (key == "asp_epsilon") c.asp_epsilon = parse_number<double>(key, v);
    else if (key == "task_schedule") c.schedule = parse_schedule(v);
    else if (key == "asp_reduction") c.asp_reduction = parse_asp_reduction(v);
    else if (key == "asp_divergence") c.asp_divergence = parse_asp_divergence(v);
    else throw ConfigError("unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string TrainConfig::to_text() const {
  std::ostringstream o;
  o << "data = " << data << "\n";
  if (!lexicon.empty()) o << "lexicon = " << lexicon << "\n";
  o << "layers = " << layers << "\n"
    << "heads = " << heads << "\n"
    << "d_model = " << d_model << "\n"
    << "d_ff = " << d_ff << "\n"
    << "max_len = " << max_len << "\n"
    << "last_k = " << last_k << "\n"
    << "attn_axis = " << to_string(attn_axis) << "\n"
    << "epochs = " << epochs << "\n"
    << "batch_size = " << batch_size << "\n"
    << "learning_rate = " << fmt(learning_rate) << "\n"
    << "optimizer = " << to_string(optimizer) << "\n"
    << "beta1 = " << fmt(beta1) << "\n"
    << "beta2 = " << fmt(beta2) << "\n"
    << "adam_epsilon = " << fmt(adam_epsilon) << "\n"
    << "seed = " << seed << "\n"
    << "mode = " << to_string(mode) << "\n"
    << "isl_variant = " << to_string(isl_variant) << "\n"
    << "lambda_asp = " << fmt(lambda_asp) << "\n"
    << "asp_epsilon = " << fmt(asp_epsilon) << "\n"
    << "task_schedule = " << to_string(schedule) << "\n"
    << "asp_reduction = " << to_string(asp_reduction) << "\n"
    << "asp_divergence = " << to_string(asp_divergence) << "\n";
  return o.str();
}

void TrainConfig::validate() const {
  auto positive = [](const char* name, double v) {
    if (!(v > 0.0)) throw ConfigError(std::string("config key '") + name + "' must be positive");
  };
  positive("layers", layers);
  positive("heads", heads);
  positive("d_model", d_model);
  positive("d_ff", d_ff);
  positive("max_len", max_len);
  positive("last_k", last_k);
  positive("epochs", epochs);
  positive("batch_size", batch_size);
  positive("learning_rate", learning_rate);
  positive("adam_epsilon", adam_epsilon);
  positive("asp_epsilon", asp_epsilon);
  if (!(lambda_asp >= 0.0)) throw ConfigError("config key 'lambda_asp' must be >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("config key 'beta1' must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("config key 'beta2' must be in [0, 1)");
  if (d_model % heads != 0) throw ConfigError("d_model must be divisible by heads");
}

ModelConfig TrainConfig::model_config(int vocab_size, int num_relations) const {
  ModelConfig m;
  m.encoder.layers = layers;
  m.encoder.heads = heads;
  m.encoder.d_model = d_model;
  m.encoder.d_ff = d_ff;
  m.encoder.max_len = max_len;
  m.encoder.vocab_size = vocab_size;
  m.num_relations = num_relations;
  m.sentiment_token = mode != Mode::baseline;
  m.saib = uses_saib();
  m.last_k = last_k;
  m.attn_axis = attn_axis;
  return m;
}

}  // namespace ssdp
