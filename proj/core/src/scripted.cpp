#include "focal/scripted.hpp"

namespace focal {

AttentionTensor uniform_attention(int layers, int heads, int seq_len) {
    AttentionTensor att(layers, heads, seq_len);
    for (int l = 0; l < layers; ++l)
        for (int h = 0; h < heads; ++h)
            for (int t = 0; t < seq_len; ++t) {
                double w = 1.0 / (t + 1);
                for (int s = 0; s <= t; ++s) att.at(l, h, t, s) = w;
            }
    return att;
}

}  // namespace focal
