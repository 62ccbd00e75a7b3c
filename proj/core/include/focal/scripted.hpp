#pragma once

#include <map>
#include <string>

#include "focal/model.hpp"

namespace focal {

// Replays user-supplied attention tensors and logits through the Backend
// interface, keyed by (sequence length, mask signature). Used as the oracle
// backend in tests: downstream modules must behave identically on scripted
// and real ForwardResults.
class ScriptedBackend : public Backend {
public:
    explicit ScriptedBackend(const ModelConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

    void add_entry(int seq_len, const std::string& mask_signature,
                   ForwardResult result) {
        entries_[{seq_len, mask_signature}] = std::move(result);
    }

    ForwardResult forward(const TokenSequence& seq,
                          const AttentionMask* mask = nullptr) const override {
        std::string sig = mask == nullptr ? "none" : mask->signature();
        auto it = entries_.find({seq.size(), sig});
        if (it == entries_.end())
            throw ScriptError("no script entry for seq_len=" +
                              std::to_string(seq.size()) + " mask=" + sig);
        return it->second;
    }

    const ModelConfig& config() const override { return cfg_; }

private:
    ModelConfig cfg_;
    std::map<std::pair<int, std::string>, ForwardResult> entries_;
};

// Causal uniform attention tensor: row t gives weight 1/(t+1) to every
// key <= t. Handy for scripts where allocations must equal span fractions.
AttentionTensor uniform_attention(int layers, int heads, int seq_len);

}  // namespace focal
