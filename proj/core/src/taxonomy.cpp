#include "focal/taxonomy.hpp"

#include <algorithm>

namespace focal {

AllocationSlice partition_attention(const AttentionTensor& att,
                                    const SpanMap& spans, int t) {
    if (t < 0 || t >= att.seq_len)
        throw InputError("partition_attention: query index out of range");
    spans.validate();

    AllocationSlice slice;
    slice.query = t;
    slice.layers = att.layers;
    slice.heads = att.heads;
    slice.shares.resize(static_cast<size_t>(att.layers) * att.heads);

    auto sum_span = [&](int l, int h, const Span& sp) {
        double acc = 0.0;
        int end = std::min(sp.end, t + 1);  // causal window
        for (int s = sp.begin; s < end; ++s) acc += att.at(l, h, t, s);
        return acc;
    };
    for (int l = 0; l < att.layers; ++l)
        for (int h = 0; h < att.heads; ++h) {
            TypeShares& ts = slice.shares[static_cast<size_t>(l) * att.heads + h];
            ts.sys = sum_span(l, h, spans.sys);
            ts.img = sum_span(l, h, spans.img);
            ts.que = sum_span(l, h, spans.que);
            ts.out = sum_span(l, h, spans.out);
        }
    return slice;
}

AllocationSummary average_allocation(const std::vector<AllocationSlice>& slices) {
    if (slices.empty())
        throw InsufficientDataError(
            "average_allocation: needs at least one generated token with a prior output token");

    const int layers = slices.front().layers;
    const int heads = slices.front().heads;
    AllocationSummary sum;
    sum.num_queries = static_cast<int>(slices.size());
    sum.gamma_by_layer.assign(layers, TypeShares{});

    for (const auto& sl : slices) {
        if (sl.layers != layers || sl.heads != heads)
            throw InputError("average_allocation: inconsistent slice shapes");
        for (int l = 0; l < layers; ++l)
            for (int h = 0; h < heads; ++h) {
                const TypeShares& ts = sl.at(l, h);
                TypeShares& g = sum.gamma_by_layer[l];
                g.sys += ts.sys;
                g.img += ts.img;
                g.que += ts.que;
                g.out += ts.out;
            }
    }
    const double per_layer_n = static_cast<double>(slices.size()) * heads;
    for (auto& g : sum.gamma_by_layer) {
        g.sys /= per_layer_n;
        g.img /= per_layer_n;
        g.que /= per_layer_n;
        g.out /= per_layer_n;
        sum.gamma.sys += g.sys;
        sum.gamma.img += g.img;
        sum.gamma.que += g.que;
        sum.gamma.out += g.out;
    }
    sum.gamma.sys /= layers;
    sum.gamma.img /= layers;
    sum.gamma.que /= layers;
    sum.gamma.out /= layers;
    return sum;
}

}  // namespace focal
