#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ssdp/corpus.hpp"
#include "ssdp/sentiment.hpp"
#include "ssdp/syntax.hpp"

namespace ssdp {

/// EPL: entity spans. SPL: EPL plus SDP tokens. ISL: SPL plus the sentiment token.
enum class IslVariant { epl, spl, isl };

std::string_view to_string(IslVariant v);
IslVariant parse_variant(std::string_view s);

struct IslSignal {
  IslVariant variant = IslVariant::isl;
  std::vector<std::uint8_t> mask;  // Q, binary
  std::vector<double> dist;        // q = Q / sum(Q)

  std::size_t size() const { return mask.size(); }
  std::vector<int> positions() const;
};

/// Normalizes a binary indicator. Throws ValidationError if nothing is marked.
IslSignal signal_from_mask(IslVariant variant, std::vector<std::uint8_t> mask);

/// `sdp_positions` must already be re-based onto the augmented sequence.
IslSignal build_signal(const AugmentedInstance& inst, const std::vector<int>& sdp_positions,
                       IslVariant variant);

/// Everything the ASP task needs for one instance, derived from raw syntax.
struct Annotation {
  SentimentTag tag;
  AugmentedInstance augmented;
  SdpResult sdp;                   // original positions
  std::vector<int> sdp_augmented;  // shifted by one
  IslSignal signal;
};

Annotation annotate(const Instance& inst, const SentimentLexicon& lexicon, IslVariant variant);

/// Instance JSON line with an extra `"isl": {"variant", "Q"}` field.
std::string to_json_line(const Instance& inst, const IslSignal& signal);

}  // namespace ssdp
