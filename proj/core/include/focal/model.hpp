#pragma once

#include <memory>

#include "focal/types.hpp"

namespace focal {

// Numerically stabilized softmax (max subtraction). Entries must be finite.
LogitVector softmax(const LogitVector& v);

// Common surface for the real transformer and the scripted replay backend.
// Implementations are immutable after construction; forward is a pure
// function of (weights, input, mask) and safe to call concurrently.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ForwardResult forward(const TokenSequence& seq,
                                  const AttentionMask* mask = nullptr) const = 0;
    virtual const ModelConfig& config() const = 0;
};

// Minimal decoder-only transformer: learned token embeddings, sinusoidal
// positions, pre-norm blocks (attention + tanh MLP), exposed attention
// tensors, pre-softmax additive masking. No KV cache; every call recomputes
// the full prefix.
class TransformerModel : public Backend {
public:
    explicit TransformerModel(const ModelConfig& cfg);

    ForwardResult forward(const TokenSequence& seq,
                          const AttentionMask* mask = nullptr) const override;
    const ModelConfig& config() const override { return cfg_; }

private:
    struct Layer {
        std::vector<double> wq, wk, wv, wo;  // [d][d]
        std::vector<double> w1, b1;          // [d][4d], [4d]
        std::vector<double> w2, b2;          // [4d][d], [d]
    };

    ModelConfig cfg_;
    std::vector<double> tok_emb_;  // [V][d]
    std::vector<double> unembed_;  // [d][V]
    std::vector<Layer> layers_;
};

std::unique_ptr<TransformerModel> init_model(const ModelConfig& cfg);

}  // namespace focal
