#pragma once

#include "focal/harness.hpp"
#include "focal/model.hpp"

namespace focal::testutil {

inline ModelConfig tiny_config(std::uint64_t seed = 7) {
    ModelConfig cfg;
    cfg.num_layers = 4;
    cfg.num_heads = 2;
    cfg.model_dim = 16;
    cfg.vocab_size = 24;
    cfg.num_image_tokens = 4;
    cfg.eos_id = 0;
    cfg.seed = seed;
    return cfg;
}

inline TokenSequence tiny_prompt(const ModelConfig& cfg, std::uint64_t seed = 0,
                                 int que_len = 3) {
    return make_prompt(cfg, seed, 2, que_len);
}

}  // namespace focal::testutil
