#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ssdp/model.hpp"

namespace ssdp {

/// Analytic gradient of `terms` for one example, accumulated into `grads`.
using GradientFn = std::function<void(const ModelState&, const Example&, const Terms&,
                                      const AspConfig&, std::span<double>)>;

/// The production backward pass.
GradientFn backprop_gradient();

struct GradcheckOptions {
  double step = 1e-5;       // central-difference step
  double threshold = 1e-4;  // max relative error to pass
  double floor = 1e-5;      // denominator floor for the relative error
  std::vector<std::string> blocks;  // block-name prefixes to check; empty = all
  AspConfig asp;
  GradientFn analytic;  // defaults to backprop_gradient()
};

/// One (term, block) comparison aggregated over the examples.
struct GradcheckEntry {
  std::string term;
  std::string block;
  std::size_t coordinates = 0;
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  bool pass = true;
};

struct GradcheckReport {
  double step = 0.0;
  double threshold = 0.0;
  std::size_t examples = 0;
  std::vector<GradcheckEntry> entries;

  bool passed() const;
  double max_rel_error() const;
  std::vector<GradcheckEntry> failures() const;
  std::string to_text() const;
  std::string to_json() const;
};

/// |a - n| / max(|a|, |n|, floor)
double relative_error(double analytic, double numeric, double floor);

/// Compares analytic against central-difference gradients for the RE, ASP
/// and IB terms and their sum, for every coordinate of every selected block
/// (embedding rows limited to the tokens each example uses). The state is
/// perturbed in place and restored.
GradcheckReport gradcheck(ModelState& state, const std::vector<Example>& examples,
                          const GradcheckOptions& options = {});

/// Small encoder used for gradient verification.
ModelConfig gradcheck_model_config(int vocab_size, int num_relations);

}  // namespace ssdp
