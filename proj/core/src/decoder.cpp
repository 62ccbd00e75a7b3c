#include "focal/decoder.hpp"

#include <algorithm>
#include <cmath>

namespace focal {

void DecodeConfig::validate() const {
    if (alpha < 0.0) throw ConfigError("alpha must be >= 0");
    if (beta < 0.0 || beta > 1.0) throw ConfigError("beta must be in [0, 1]");
    if (max_new_tokens < 0) throw ConfigError("max_new_tokens must be >= 0");
    if (temperature <= 0.0) throw ConfigError("temperature must be > 0");
}

LogitVector contrastive_logits(const LogitVector& cond, const LogitVector& uncond,
                               double alpha) {
    if (cond.size() != uncond.size())
        throw InputError("contrastive_logits: length mismatch");
    LogitVector out(cond.size());
    for (size_t i = 0; i < cond.size(); ++i)
        out[i] = (1.0 + alpha) * cond[i] - alpha * uncond[i];
    return out;
}

std::vector<TokenId> plausibility_set(const std::vector<double>& p_ref, double beta) {
    double mx = 0.0;
    for (double p : p_ref) mx = std::max(mx, p);
    double threshold = beta * mx;
    std::vector<TokenId> vh;
    for (size_t i = 0; i < p_ref.size(); ++i)
        if (p_ref[i] >= threshold) vh.push_back(static_cast<TokenId>(i));
    return vh;
}

TokenId constrained_sample(const std::vector<double>& calibrated,
                           const std::vector<TokenId>& plausible,
                           SamplingMode mode, std::mt19937_64& rng) {
    if (plausible.empty())
        throw std::logic_error("constrained_sample: empty plausibility set");
    if (mode == SamplingMode::greedy) {
        TokenId best = plausible.front();
        for (TokenId id : plausible)
            if (calibrated[id] > calibrated[best]) best = id;
        return best;
    }
    double mass = 0.0;
    for (TokenId id : plausible) mass += calibrated[id];
    if (mass <= 0.0) {
        // All in-set mass underflowed; fall back to the in-set maximum.
        TokenId best = plausible.front();
        for (TokenId id : plausible)
            if (calibrated[id] > calibrated[best]) best = id;
        return best;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng) * mass;
    double acc = 0.0;
    for (TokenId id : plausible) {
        acc += calibrated[id];
        if (u <= acc) return id;
    }
    return plausible.back();
}

GenerationResult generate(const Backend& backend, TokenSequence prompt,
                          const SelectionConfig& sel_cfg, const DecodeConfig& dec_cfg) {
    const ModelConfig& mc = backend.config();
    sel_cfg.validate(mc.num_layers);
    dec_cfg.validate();
    prompt.spans.validate();

    GenerationResult res;
    std::mt19937_64 rng(dec_cfg.rng_seed);
    SelectionResult cached_selection;
    bool have_selection = false;

    for (int step = 0; step < dec_cfg.max_new_tokens; ++step) {
        ForwardResult full = backend.forward(prompt, nullptr);
        const int t = prompt.size() - 1;

        if (sel_cfg.reselect_each_step || !have_selection) {
            cached_selection =
                select_image_tokens(full.attention, prompt.spans, t, sel_cfg);
            have_selection = true;
        }
        const SelectionResult& sel = cached_selection;

        ForwardResult focused = backend.forward(prompt, &sel.mask);
        AttentionMask text_mask = build_text_only_mask(prompt.spans);
        ForwardResult text_only = backend.forward(prompt, &text_mask);

        LogitVector contrast =
            contrastive_logits(focused.logits, text_only.logits, dec_cfg.alpha);
        if (dec_cfg.sampling == SamplingMode::categorical && dec_cfg.temperature != 1.0)
            for (double& x : contrast) x /= dec_cfg.temperature;
        std::vector<double> calibrated = softmax(contrast);

        std::vector<double> p_ref =
            softmax(dec_cfg.constraint_source == ConstraintSource::full_image
                        ? full.logits
                        : focused.logits);
        std::vector<TokenId> vh = plausibility_set(p_ref, dec_cfg.beta);
        // EOS stays eligible regardless of truncation.
        if (!std::binary_search(vh.begin(), vh.end(), mc.eos_id)) {
            vh.insert(std::lower_bound(vh.begin(), vh.end(), mc.eos_id), mc.eos_id);
        }

        TokenId chosen = constrained_sample(calibrated, vh, dec_cfg.sampling, rng);

        DecodeStepTrace tr;
        tr.logits_full = std::move(full.logits);
        tr.logits_selected = std::move(focused.logits);
        tr.logits_text_only = std::move(text_only.logits);
        tr.calibrated = std::move(calibrated);
        tr.plausible = std::move(vh);
        tr.chosen = chosen;
        tr.step_selection = sel;
        res.trace.push_back(std::move(tr));

        res.tokens.push_back(chosen);
        prompt.append_output(chosen);
        if (chosen == mc.eos_id) break;
    }
    return res;
}

GenerationResult generate_vanilla(const Backend& backend, TokenSequence prompt,
                                  int max_new_tokens) {
    const ModelConfig& mc = backend.config();
    GenerationResult res;
    for (int step = 0; step < max_new_tokens; ++step) {
        ForwardResult full = backend.forward(prompt, nullptr);
        TokenId best = 0;
        for (size_t i = 1; i < full.logits.size(); ++i)
            if (full.logits[i] > full.logits[best]) best = static_cast<TokenId>(i);
        res.tokens.push_back(best);
        prompt.append_output(best);
        if (best == mc.eos_id) break;
    }
    return res;
}

}  // namespace focal
