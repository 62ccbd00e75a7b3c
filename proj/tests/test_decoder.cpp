#include <doctest.h>

#include <algorithm>
#include <random>

#include "focal/decoder.hpp"
#include "focal/scripted.hpp"
#include "test_util.hpp"

using namespace focal;
using testutil::tiny_config;
using testutil::tiny_prompt;

TEST_CASE("contrastive logits") {
    CHECK(contrastive_logits({2, 0}, {0, 2}, 1.0) == LogitVector{4, -2});
    CHECK(contrastive_logits({1.5, -0.5}, {9, 9}, 0.0) == LogitVector{1.5, -0.5});
    // cond == uncond cancels for any alpha
    CHECK(contrastive_logits({3, 1}, {3, 1}, 7.25) == LogitVector{3, 1});
    CHECK_THROWS_AS(contrastive_logits({1, 2}, {1}, 1.0), InputError);
}

TEST_CASE("plausibility set") {
    std::vector<double> p = {0.5, 0.3, 0.15, 0.05};
    CHECK(plausibility_set(p, 0.5) == std::vector<TokenId>{0, 1});
    CHECK(plausibility_set(p, 0.0) == std::vector<TokenId>{0, 1, 2, 3});
    CHECK(plausibility_set(p, 1.0) == std::vector<TokenId>{0});

    SUBCASE("monotone shrinking in beta") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int iter = 0; iter < 100; ++iter) {
            std::vector<double> logits(16);
            for (auto& x : logits) x = 6 * unit(rng);
            auto probs = softmax(logits);
            std::vector<TokenId> prev;
            for (double beta : {0.0, 0.1, 0.3, 0.6, 0.9, 1.0}) {
                auto vh = plausibility_set(probs, beta);
                CHECK(!vh.empty());
                if (!prev.empty())
                    CHECK(std::includes(prev.begin(), prev.end(), vh.begin(), vh.end()));
                prev = vh;
            }
        }
    }
}

TEST_CASE("constrained sampling") {
    std::mt19937_64 rng(1);
    std::vector<double> cal = {0.7, 0.2, 0.1};

    CHECK(constrained_sample(cal, {0, 1, 2}, SamplingMode::greedy, rng) == 0);
    CHECK(constrained_sample(cal, {1, 2}, SamplingMode::greedy, rng) == 1);
    CHECK(constrained_sample(cal, {2}, SamplingMode::categorical, rng) == 2);

    SUBCASE("categorical renormalizes over the plausible set") {
        std::mt19937_64 r2(77);
        int count1 = 0;
        const int trials = 30000;
        for (int i = 0; i < trials; ++i)
            if (constrained_sample(cal, {1, 2}, SamplingMode::categorical, r2) == 1)
                ++count1;
        CHECK(static_cast<double>(count1) / trials ==
              doctest::Approx(2.0 / 3.0).epsilon(0.02));
    }
}

TEST_CASE("neutral settings reproduce vanilla greedy decoding") {
    ModelConfig mc = tiny_config(13);
    TransformerModel model(mc);
    TokenSequence prompt = tiny_prompt(mc, 2);

    DecodeConfig dec;
    dec.alpha = 0.0;
    dec.beta = 0.0;
    dec.sampling = SamplingMode::greedy;
    dec.max_new_tokens = 6;
    SelectionConfig sel;
    sel.keep_ratio = 1.0;

    GenerationResult neutral = generate(model, prompt, sel, dec);
    GenerationResult ref = generate_vanilla(model, prompt, 6);
    CHECK(neutral.tokens == ref.tokens);
}

TEST_CASE("scripted steering: focus-masked argmax wins with alpha=1") {
    ModelConfig mc = tiny_config();
    mc.num_image_tokens = 4;
    ScriptedBackend script(mc);
    TokenSequence prompt = tiny_prompt(mc, 0);
    const int len = prompt.size();
    const TokenId tok_a = 3, tok_b = 5;

    // Attention concentrating layer-1 mass on the first two image tokens so
    // the selection (keep 50%) is {img0, img1}.
    AttentionTensor att = uniform_attention(mc.num_layers, mc.num_heads, len);
    int t = len - 1;
    for (int h = 0; h < mc.num_heads; ++h) {
        for (int s = 0; s < len; ++s) att.at(1, h, t, s) = 0.0;
        att.at(1, h, t, prompt.spans.img.begin) = 0.6;
        att.at(1, h, t, prompt.spans.img.begin + 1) = 0.4;
    }

    ForwardResult full;
    full.logits.assign(mc.vocab_size, 0.0);  // uniform reference; V_h = everything
    full.attention = att;
    script.add_entry(len, "none", full);

    SelectionConfig sel;
    sel.keep_ratio = 0.5;
    sel.reselect_each_step = true;
    AttentionMask focus_mask = build_focus_mask(
        {prompt.spans.img.begin, prompt.spans.img.begin + 1}, prompt.spans, sel);

    ForwardResult focused = full;
    focused.logits.assign(mc.vocab_size, 0.0);
    focused.logits[tok_b] = 2.0;  // cond favors B
    focused.logits[tok_a] = 1.0;
    script.add_entry(len, focus_mask.signature(), focused);

    ForwardResult text_only = full;
    text_only.logits.assign(mc.vocab_size, 0.0);
    text_only.logits[tok_a] = 3.0;  // language prior favors A
    script.add_entry(len, build_text_only_mask(prompt.spans).signature(), text_only);

    DecodeConfig dec;
    dec.alpha = 1.0;
    dec.beta = 0.0;
    dec.sampling = SamplingMode::greedy;
    dec.max_new_tokens = 1;

    GenerationResult out = generate(script, prompt, sel, dec);
    REQUIRE(out.tokens.size() == 1);
    // hand evaluation: calibrated[B] = 2*2 - 0 = 4, calibrated[A] = 2*1 - 3 = -1
    CHECK(out.tokens[0] == tok_b);

    SUBCASE("alpha=0 reverts to the conditioned distribution") {
        DecodeConfig plain = dec;
        plain.alpha = 0.0;
        GenerationResult out2 = generate(script, prompt, sel, plain);
        CHECK(out2.tokens[0] == tok_b);  // cond argmax
    }
    SUBCASE("selection recorded in the trace") {
        GenerationResult out3 = generate(script, prompt, sel, dec);
        REQUIRE(out3.trace.size() == 1);
        CHECK(out3.trace[0].step_selection.selected ==
              std::vector<int>{prompt.spans.img.begin, prompt.spans.img.begin + 1});
        CHECK(out3.trace[0].chosen == tok_b);
        CHECK(std::binary_search(out3.trace[0].plausible.begin(),
                                 out3.trace[0].plausible.end(), out3.trace[0].chosen));
    }
}

TEST_CASE("max_new_tokens = 0 yields empty output") {
    ModelConfig mc = tiny_config();
    TransformerModel model(mc);
    DecodeConfig dec;
    dec.max_new_tokens = 0;
    GenerationResult out = generate(model, tiny_prompt(mc), SelectionConfig{}, dec);
    CHECK(out.tokens.empty());
    CHECK(out.trace.empty());
}

TEST_CASE("shift invariance of the calibrated distribution") {
    LogitVector cond = {1.0, 2.5, -0.5}, uncond = {0.2, 0.1, 1.0};
    auto p1 = softmax(contrastive_logits(cond, uncond, 1.0));
    for (auto& x : cond) x += 11.25;
    for (auto& x : uncond) x += 11.25;
    auto p2 = softmax(contrastive_logits(cond, uncond, 1.0));
    for (size_t i = 0; i < p1.size(); ++i)
        CHECK(p1[i] == doctest::Approx(p2[i]).epsilon(1e-12));
}

TEST_CASE("shared argmax is preserved for any alpha") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int iter = 0; iter < 100; ++iter) {
        LogitVector cond(8), uncond(8);
        for (auto& x : cond) x = unit(rng);
        for (auto& x : uncond) x = unit(rng);
        int star = static_cast<int>(unit(rng) * 8);
        cond[star] = 5.0;
        uncond[star] = 5.0;
        for (double alpha : {0.0, 0.5, 1.0, 3.0}) {
            auto cal = contrastive_logits(cond, uncond, alpha);
            CHECK(std::max_element(cal.begin(), cal.end()) - cal.begin() == star);
        }
    }
}

TEST_CASE("generation is deterministic for a fixed rng seed") {
    ModelConfig mc = tiny_config(3);
    TransformerModel model(mc);
    TokenSequence prompt = tiny_prompt(mc, 1);
    DecodeConfig dec;
    dec.max_new_tokens = 5;
    dec.rng_seed = 1234;
    GenerationResult a = generate(model, prompt, SelectionConfig{}, dec);
    GenerationResult b = generate(model, prompt, SelectionConfig{}, dec);
    CHECK(a.tokens == b.tokens);

    SUBCASE("chosen token is always plausible") {
        for (const auto& tr : a.trace)
            CHECK(std::binary_search(tr.plausible.begin(), tr.plausible.end(), tr.chosen));
    }
    SUBCASE("calibrated distribution sums to 1") {
        for (const auto& tr : a.trace) {
            double s = 0;
            for (double x : tr.calibrated) s += x;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("decode config validation") {
    DecodeConfig dec;
    dec.alpha = -0.1;
    CHECK_THROWS_AS(dec.validate(), ConfigError);
    dec = DecodeConfig{};
    dec.beta = 1.5;
    CHECK_THROWS_AS(dec.validate(), ConfigError);
    dec = DecodeConfig{};
    dec.temperature = 0.0;
    CHECK_THROWS_AS(dec.validate(), ConfigError);
}
