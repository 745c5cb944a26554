#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ssdp/encoder.hpp"
#include "ssdp/error.hpp"

namespace ssdp {

namespace {
constexpr const char* kFormat = "ssdp-checkpoint";
constexpr int kVersion = 1;
}  // namespace

std::string checkpoint_json(const ModelState& state) {
  using Json = nlohmann::ordered_json;
  const auto& cfg = state.config();
  Json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["config"] = {
      {"layers", cfg.encoder.layers},
      {"heads", cfg.encoder.heads},
      {"d_model", cfg.encoder.d_model},
      {"d_ff", cfg.encoder.d_ff},
      {"max_len", cfg.encoder.max_len},
      {"vocab_size", cfg.encoder.vocab_size},
      {"num_relations", cfg.num_relations},
      {"sentiment_token", cfg.sentiment_token},
      {"saib", cfg.saib},
      {"last_k", cfg.last_k},
      {"attn_axis", to_string(cfg.attn_axis)},
  };
  j["seed"] = state.seed();
  j["relations"] = state.relations();
  j["vocab"] = state.vocab().words();
  Json tensors = Json::array();
  for (std::size_t b = 0; b < state.blocks().size(); ++b) {
    const auto& block = state.blocks()[b];
    const auto data = state.block(b).flat();
    tensors.push_back({{"name", block.name},
                       {"shape", {block.rows, block.cols}},
                       {"data", std::vector<double>(data.begin(), data.end())}});
  }
  j["tensors"] = std::move(tensors);
  return j.dump() + "\n";
}

void save_checkpoint(const std::filesystem::path& path, const ModelState& state) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << checkpoint_json(state);
}

ModelState load_checkpoint(const std::filesystem::path& path) {
  using Json = nlohmann::json;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    const Json j = Json::parse(in);
    if (j.at("format") != kFormat) throw ParseError(path.string() + ": not a checkpoint");
    if (j.at("version") != kVersion) {
      throw ParseError(path.string() + ": unsupported checkpoint version " + j["version"].dump());
    }
    const auto& c = j.at("config");
    ModelConfig cfg;
    cfg.encoder.layers = c.at("layers");
    cfg.encoder.heads = c.at("heads");
    cfg.encoder.d_model = c.at("d_model");
    cfg.encoder.d_ff = c.at("d_ff");
    cfg.encoder.max_len = c.at("max_len");
    cfg.encoder.vocab_size = c.at("vocab_size");
    cfg.num_relations = c.at("num_relations");
    cfg.sentiment_token = c.at("sentiment_token");
    cfg.saib = c.at("saib");
    cfg.last_k = c.at("last_k");
    cfg.attn_axis = parse_attn_axis(c.at("attn_axis").get<std::string>());

    Vocabulary vocab(j.at("vocab").get<std::vector<std::string>>());
    auto relations = j.at("relations").get<std::vector<std::string>>();
    std::vector<double> values;
    for (const auto& t : j.at("tensors")) {
      const auto& data = t.at("data");
      for (const auto& v : data) values.push_back(v.get<double>());
    }
    ModelState state = ModelState::from_values(cfg, std::move(vocab), std::move(relations),
                                               j.at("seed").get<std::uint64_t>(), std::move(values));
    const auto& tensors = j.at("tensors");
    if (tensors.size() != state.blocks().size()) throw ParseError(path.string() + ": block count mismatch");
    for (std::size_t b = 0; b < tensors.size(); ++b) {
      const auto& block = state.blocks()[b];
      if (tensors[b].at("name") != block.name ||
          tensors[b].at("shape") != Json::array({block.rows, block.cols})) {
        throw ParseError(path.string() + ": tensor " + tensors[b]["name"].dump() +
                         " does not match layout block " + block.name);
      }
    }
    return state;
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace ssdp
