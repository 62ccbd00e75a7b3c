#pragma once

#include "focal/types.hpp"

namespace focal {

// Attention mass landing on each token-type span, for one (layer, head, query).
struct TypeShares {
    double sys = 0.0, img = 0.0, que = 0.0, out = 0.0;

    double total() const { return sys + img + que + out; }
};

// Per-(layer, head) shares for a single query position.
struct AllocationSlice {
    int query = 0;
    int layers = 0;
    int heads = 0;
    std::vector<TypeShares> shares;  // indexed layer * heads + head

    const TypeShares& at(int layer, int head) const {
        return shares[static_cast<size_t>(layer) * heads + head];
    }
};

struct AllocationSummary {
    TypeShares gamma;                       // mean over (query, head, layer)
    std::vector<TypeShares> gamma_by_layer; // mean over (query, head) per layer
    int num_queries = 0;
};

// Sums attention weights over keys inside each span, per (layer, head),
// for query index t. Span boundaries are clipped to the causal window.
AllocationSlice partition_attention(const AttentionTensor& att,
                                    const SpanMap& spans, int t);

// Mean allocation over the given query slices. Callers pass the slices for
// generated tokens that have at least one prior output token (the first
// generated token is excluded from the statistic upstream).
AllocationSummary average_allocation(const std::vector<AllocationSlice>& slices);

}  // namespace focal
