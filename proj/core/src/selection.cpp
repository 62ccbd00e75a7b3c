#include "focal/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace focal {

int SelectionConfig::top_k(int num_image_tokens) const {
    int k = static_cast<int>(std::ceil(keep_ratio * num_image_tokens));
    return std::clamp(k, 1, num_image_tokens);
}

void SelectionConfig::validate(int num_layers) const {
    if (!(keep_ratio > 0.0 && keep_ratio <= 1.0))
        throw ConfigError("keep_ratio must be in (0, 1]");
    if (score_layer < 0 || score_layer >= num_layers)
        throw ConfigError("score_layer out of range");
    if (!(score_layer < mask_from_layer && mask_from_layer <= num_layers))
        throw ConfigError("need score_layer < mask_from_layer <= num_layers");
}

std::vector<double> image_token_scores(const AttentionTensor& att,
                                       const SpanMap& spans, int t,
                                       const SelectionConfig& cfg) {
    if (spans.img.size() == 0) throw InputError("image_token_scores: empty image span");
    if (cfg.score_layer >= att.layers)
        throw InputError("image_token_scores: score_layer beyond tensor");
    if (t < 0 || t >= att.seq_len)
        throw InputError("image_token_scores: query index out of range");

    std::vector<double> psi(spans.img.size(), 0.0);
    for (int j = 0; j < spans.img.size(); ++j) {
        double acc = 0.0;
        for (int h = 0; h < att.heads; ++h)
            acc += att.at(cfg.score_layer, h, t, spans.img.begin + j);
        psi[j] = acc / att.heads;
    }
    return psi;
}

std::vector<int> select_top_k(const std::vector<double>& psi, int k) {
    const int n = static_cast<int>(psi.size());
    if (k < 1 || k > n) throw InputError("select_top_k: k out of range");
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
        if (psi[a] != psi[b]) return psi[a] > psi[b];
        return a < b;
    });
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

AttentionMask build_focus_mask(const std::vector<int>& selected,
                               const SpanMap& spans, const SelectionConfig& cfg) {
    AttentionMask mask;
    mask.active_from_layer = cfg.mask_from_layer;
    std::vector<char> keep(spans.img.size(), 0);
    for (int pos : selected) {
        if (!spans.img.contains(pos))
            throw InputError("build_focus_mask: selected index outside image span");
        keep[pos - spans.img.begin] = 1;
    }
    for (int j = 0; j < spans.img.size(); ++j)
        if (!keep[j]) mask.blocked.push_back({Span{0, -1}, spans.img.begin + j});
    return mask;
}

AttentionMask build_text_only_mask(const SpanMap& spans) {
    if (spans.img.size() == 0) throw InputError("build_text_only_mask: empty image span");
    AttentionMask mask;
    mask.active_from_layer = 0;
    for (int s = spans.img.begin; s < spans.img.end; ++s)
        mask.blocked.push_back({Span{0, -1}, s});
    return mask;
}

SelectionResult select_image_tokens(const AttentionTensor& att,
                                    const SpanMap& spans, int t,
                                    const SelectionConfig& cfg) {
    SelectionResult res;
    res.scores = image_token_scores(att, spans, t, cfg);
    auto rel = select_top_k(res.scores, cfg.top_k(spans.img.size()));
    res.selected.reserve(rel.size());
    for (int j : rel) res.selected.push_back(spans.img.begin + j);
    res.mask = build_focus_mask(res.selected, spans, cfg);
    return res;
}

}  // namespace focal
