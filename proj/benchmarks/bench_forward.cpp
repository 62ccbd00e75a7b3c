#include <benchmark/benchmark.h>

#include "focal/decoder.hpp"
#include "focal/harness.hpp"
#include "focal/model.hpp"

namespace {

focal::ModelConfig bench_config() {
    focal::ModelConfig cfg;
    cfg.num_layers = 4;
    cfg.num_heads = 4;
    cfg.model_dim = 64;
    cfg.vocab_size = 64;
    cfg.num_image_tokens = 16;
    cfg.seed = 1;
    return cfg;
}

void BM_Forward(benchmark::State& state) {
    focal::ModelConfig cfg = bench_config();
    focal::TransformerModel model(cfg);
    focal::TokenSequence seq =
        focal::make_prompt(cfg, 3, 4, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(seq));
    }
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(16)->Arg(32);

void BM_ForwardMasked(benchmark::State& state) {
    focal::ModelConfig cfg = bench_config();
    focal::TransformerModel model(cfg);
    focal::TokenSequence seq = focal::make_prompt(cfg, 3, 4, 8);
    focal::AttentionMask mask = focal::build_text_only_mask(seq.spans);
    for (auto _ : state) {
        benchmark::DoNotOptimize(model.forward(seq, &mask));
    }
}
BENCHMARK(BM_ForwardMasked);

void BM_Generate(benchmark::State& state) {
    focal::ModelConfig cfg = bench_config();
    focal::TransformerModel model(cfg);
    focal::TokenSequence seq = focal::make_prompt(cfg, 3, 4, 6);
    focal::SelectionConfig sel;
    focal::DecodeConfig dec;
    dec.max_new_tokens = static_cast<int>(state.range(0));
    dec.sampling = focal::SamplingMode::greedy;
    for (auto _ : state) {
        benchmark::DoNotOptimize(focal::generate(model, seq, sel, dec));
    }
}
BENCHMARK(BM_Generate)->Arg(4)->Arg(10);

void BM_GenerateVanilla(benchmark::State& state) {
    focal::ModelConfig cfg = bench_config();
    focal::TransformerModel model(cfg);
    focal::TokenSequence seq = focal::make_prompt(cfg, 3, 4, 6);
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            focal::generate_vanilla(model, seq, static_cast<int>(state.range(0))));
    }
}
BENCHMARK(BM_GenerateVanilla)->Arg(4)->Arg(10);

}  // namespace

BENCHMARK_MAIN();
