#include <doctest.h>

#include "focal/model.hpp"
#include "focal/scripted.hpp"
#include "focal/selection.hpp"
#include "focal/taxonomy.hpp"
#include "test_util.hpp"

using namespace focal;
using testutil::tiny_config;
using testutil::tiny_prompt;

namespace {

SpanMap spans4(int sys, int img, int que, int out) {
    SpanMap m;
    m.sys = {0, sys};
    m.img = {sys, sys + img};
    m.que = {sys + img, sys + img + que};
    m.out = {sys + img + que, sys + img + que + out};
    return m;
}

}  // namespace

TEST_CASE("uniform attention partitions proportionally to span sizes") {
    SpanMap spans = spans4(2, 4, 2, 2);
    AttentionTensor att = uniform_attention(1, 1, spans.total());
    int t = spans.total() - 1;
    AllocationSlice slice = partition_attention(att, spans, t);
    const TypeShares& ts = slice.at(0, 0);
    CHECK(ts.sys == doctest::Approx(2.0 / 10));
    CHECK(ts.img == doctest::Approx(4.0 / 10));
    CHECK(ts.que == doctest::Approx(2.0 / 10));
    CHECK(ts.out == doctest::Approx(2.0 / 10));
}

TEST_CASE("point mass on a sys key") {
    SpanMap spans = spans4(2, 2, 2, 0);
    AttentionTensor att(1, 1, spans.total());
    int t = spans.total() - 1;
    att.at(0, 0, t, 0) = 1.0;
    AllocationSlice slice = partition_attention(att, spans, t);
    const TypeShares& ts = slice.at(0, 0);
    CHECK(ts.sys == 1.0);
    CHECK(ts.img == 0.0);
    CHECK(ts.que == 0.0);
    CHECK(ts.out == 0.0);
}

TEST_CASE("hand-summed scripted row") {
    SpanMap spans = spans4(1, 2, 1, 0);
    AttentionTensor att(1, 1, 4);
    double row[4] = {0.1, 0.2, 0.3, 0.4};
    for (int s = 0; s < 4; ++s) att.at(0, 0, 3, s) = row[s];
    AllocationSlice slice = partition_attention(att, spans, 3);
    const TypeShares& ts = slice.at(0, 0);
    CHECK(ts.sys == doctest::Approx(0.1));
    CHECK(ts.img == doctest::Approx(0.5));
    CHECK(ts.que == doctest::Approx(0.4));
    CHECK(ts.out == doctest::Approx(0.0));
}

TEST_CASE("query index out of range") {
    AttentionTensor att(1, 1, 4);
    CHECK_THROWS_AS(partition_attention(att, spans4(1, 2, 1, 0), 4), InputError);
}

TEST_CASE("average of two queries is the arithmetic mean") {
    AllocationSlice a, b;
    a.query = 1;
    a.layers = a.heads = 1;
    a.shares = {TypeShares{0.2, 0.4, 0.3, 0.1}};
    b = a;
    b.query = 2;
    b.shares = {TypeShares{0.2, 0.6, 0.1, 0.1}};
    AllocationSummary sum = average_allocation({a, b});
    CHECK(sum.gamma.img == doctest::Approx(0.5));
    CHECK(sum.num_queries == 2);
}

TEST_CASE("average of a constant set equals the record") {
    AllocationSlice a;
    a.layers = 2;
    a.heads = 2;
    a.shares.assign(4, TypeShares{0.25, 0.35, 0.3, 0.1});
    AllocationSummary sum = average_allocation({a, a, a});
    CHECK(sum.gamma.sys == doctest::Approx(0.25));
    CHECK(sum.gamma.img == doctest::Approx(0.35));
    CHECK(sum.gamma.que == doctest::Approx(0.3));
    CHECK(sum.gamma.out == doctest::Approx(0.1));
    for (const auto& g : sum.gamma_by_layer) CHECK(g.img == doctest::Approx(0.35));
}

TEST_CASE("2 layers x 2 heads hand mean at one query") {
    AllocationSlice a;
    a.layers = 2;
    a.heads = 2;
    a.shares = {TypeShares{0, 0.1, 0, 0}, TypeShares{0, 0.2, 0, 0},
                TypeShares{0, 0.3, 0, 0}, TypeShares{0, 0.4, 0, 0}};
    AllocationSummary sum = average_allocation({a});
    CHECK(sum.gamma.img == doctest::Approx(0.25));
    CHECK(sum.gamma_by_layer[0].img == doctest::Approx(0.15));
    CHECK(sum.gamma_by_layer[1].img == doctest::Approx(0.35));
}

TEST_CASE("empty slice set is insufficient data") {
    CHECK_THROWS_AS(average_allocation({}), InsufficientDataError);
}

TEST_CASE("partition of unity on real model rows, masked and unmasked") {
    for (std::uint64_t seed : {3u, 17u, 91u}) {
        ModelConfig cfg = tiny_config(seed);
        TransformerModel model(cfg);
        TokenSequence seq = tiny_prompt(cfg, seed);
        seq.append_output(2);
        seq.append_output(3);

        AttentionMask focus = build_text_only_mask(seq.spans);
        for (const ForwardResult& r :
             {model.forward(seq), model.forward(seq, &focus)}) {
            for (int t = 0; t < seq.size(); ++t) {
                AllocationSlice slice = partition_attention(r.attention, seq.spans, t);
                for (const auto& ts : slice.shares)
                    CHECK(ts.total() == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
    }
}
