#pragma once

#include "focal/types.hpp"

namespace focal {

struct SelectionConfig {
    double keep_ratio = 0.75;
    int score_layer = 1;      // zero-based; the "second layer"
    int mask_from_layer = 2;  // masking starts at the third layer
    bool reselect_each_step = true;

    int top_k(int num_image_tokens) const;
    void validate(int num_layers) const;  // throws ConfigError
};

struct SelectionResult {
    std::vector<double> scores;  // psi per image token, image-relative order
    std::vector<int> selected;   // absolute sequence positions, ascending
    AttentionMask mask;          // blocks unselected image keys
};

// psi[v] = head-mean attention from query t to image token v at score_layer.
std::vector<double> image_token_scores(const AttentionTensor& att,
                                       const SpanMap& spans, int t,
                                       const SelectionConfig& cfg);

// Indices of the k largest scores; ties broken toward the lower index;
// result sorted ascending.
std::vector<int> select_top_k(const std::vector<double>& psi, int k);

// Blocks every image key not in `selected` for all queries, from
// cfg.mask_from_layer onward. `selected` holds absolute positions.
AttentionMask build_focus_mask(const std::vector<int>& selected,
                               const SpanMap& spans, const SelectionConfig& cfg);

// Blocks every image key for all queries from the first layer, approximating
// the text-only (language prior) pass.
AttentionMask build_text_only_mask(const SpanMap& spans);

SelectionResult select_image_tokens(const AttentionTensor& att,
                                    const SpanMap& spans, int t,
                                    const SelectionConfig& cfg);

}  // namespace focal
