#include "ssdp/labels.hpp"

#include "json.hpp"
#include "ssdp/error.hpp"

namespace ssdp {

std::string_view to_string(IslVariant v) {
  switch (v) {
    case IslVariant::epl:
      return "EPL";
    case IslVariant::spl:
      return "SPL";
    case IslVariant::isl:
      return "ISL";
  }
  return "ISL";
}

IslVariant parse_variant(std::string_view s) {
  if (s == "EPL" || s == "epl") return IslVariant::epl;
  if (s == "SPL" || s == "spl") return IslVariant::spl;
  if (s == "ISL" || s == "isl") return IslVariant::isl;
  throw ConfigError("unknown label variant '" + std::string(s) + "'");
}

std::vector<int> IslSignal::positions() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

IslSignal signal_from_mask(IslVariant variant, std::vector<std::uint8_t> mask) {
  std::size_t marked = 0;
  for (auto& m : mask) {
    m = m ? 1 : 0;
    marked += m;
  }
  if (marked == 0) throw ValidationError("label signal marks no positions");
  IslSignal s;
  s.variant = variant;
  s.dist.resize(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    s.dist[i] = mask[i] ? 1.0 / static_cast<double>(marked) : 0.0;
  }
  s.mask = std::move(mask);
  return s;
}

IslSignal build_signal(const AugmentedInstance& inst, const std::vector<int>& sdp_positions,
                       IslVariant variant) {
  std::vector<std::uint8_t> mask(inst.tokens.size(), 0);
  for (const Span& span : {inst.subj, inst.obj}) {
    for (int i = span.lo; i <= span.hi; ++i) mask[i] = 1;
  }
  if (variant != IslVariant::epl) {
    for (int p : sdp_positions) mask[p] = 1;
  }
  if (variant == IslVariant::isl) mask[inst.sentiment_position] = 1;
  return signal_from_mask(variant, std::move(mask));
}

Annotation annotate(const Instance& inst, const SentimentLexicon& lexicon, IslVariant variant) {
  Annotation a;
  a.tag = classify(inst, lexicon);
  a.augmented = insert_sentiment_token(inst, a.tag);
  a.sdp = instance_sdp(inst);
  a.sdp_augmented = shift_positions(a.sdp.token_set);
  a.signal = build_signal(a.augmented, a.sdp_augmented, variant);
  return a;
}

std::string to_json_line(const Instance& inst, const IslSignal& signal) {
  auto j = nlohmann::ordered_json::parse(to_json_line(inst));
  nlohmann::ordered_json isl;
  isl["variant"] = to_string(signal.variant);
  isl["Q"] = signal.mask;
  j["isl"] = std::move(isl);
  return j.dump();
}

}  // namespace ssdp
