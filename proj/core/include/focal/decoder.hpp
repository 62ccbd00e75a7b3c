#pragma once

#include <random>

#include "focal/model.hpp"
#include "focal/selection.hpp"

namespace focal {

enum class SamplingMode { greedy, categorical };
enum class ConstraintSource { full_image, selected_image };

struct DecodeConfig {
    double alpha = 1.0;
    double beta = 0.1;
    int max_new_tokens = 20;
    SamplingMode sampling = SamplingMode::categorical;
    double temperature = 1.0;
    ConstraintSource constraint_source = ConstraintSource::full_image;
    std::uint64_t rng_seed = 0;

    void validate() const;  // throws ConfigError
};

struct DecodeStepTrace {
    LogitVector logits_full;
    LogitVector logits_selected;
    LogitVector logits_text_only;
    std::vector<double> calibrated;     // p~_t over the full vocabulary
    std::vector<TokenId> plausible;     // V_h, sorted ascending
    TokenId chosen = 0;
    SelectionResult step_selection;
};

struct GenerationResult {
    std::vector<TokenId> tokens;  // generated tokens, EOS included if emitted
    std::vector<DecodeStepTrace> trace;
};

// (1 + alpha) * cond - alpha * uncond, elementwise.
LogitVector contrastive_logits(const LogitVector& cond, const LogitVector& uncond,
                               double alpha);

// V_h = { y : p_ref[y] >= beta * max(p_ref) }, sorted ascending.
std::vector<TokenId> plausibility_set(const std::vector<double>& p_ref, double beta);

// Zeroes mass outside V_h, renormalizes, then picks greedily or draws.
TokenId constrained_sample(const std::vector<double>& calibrated,
                           const std::vector<TokenId>& plausible,
                           SamplingMode mode, std::mt19937_64& rng);

// The full decoding loop: per step, forward unmasked (reference distribution
// and scoring attention), forward under the focus mask, forward under the
// text-only mask, calibrate, truncate, sample, append. Stops at EOS or
// max_new_tokens.
GenerationResult generate(const Backend& backend, TokenSequence prompt,
                          const SelectionConfig& sel_cfg, const DecodeConfig& dec_cfg);

// Plain greedy decoding of the unmasked model; the neutrality reference.
GenerationResult generate_vanilla(const Backend& backend, TokenSequence prompt,
                                  int max_new_tokens);

}  // namespace focal
