// Command-line entry point: config parsing, fixture generation, experiment
// execution, report emission.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "focal/harness.hpp"

using focal::ExperimentConfig;
using focal::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file");
    cmd->add_option("--seed", opts.seed, "root seed (overrides config)")
        ->each([&](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
}

ExperimentConfig build_config(const CommonOpts& opts) {
    ExperimentConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = focal::load_config(opts.config_path);
    } else {
        cfg = focal::config_from_json(json::object());
    }
    // CLI flags take precedence over file values.
    if (opts.seed_set) {
        cfg.root_seed = opts.seed;
        cfg.derive_seeds();
    }
    if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"attention-guided token selection + contrastive decoding harness"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string pope_path, mme_path, chair_ann, chair_cap, synonyms;
    focal::FixtureSizes sizes;

    CLI::App* analyze = app.add_subcommand("analyze", "attention allocation statistics");
    add_common(analyze, opts);
    CLI::App* decode = app.add_subcommand("decode", "run the full decoding pipeline");
    add_common(decode, opts);
    CLI::App* eval_pope = app.add_subcommand("eval-pope", "score a POPE-style JSONL file");
    add_common(eval_pope, opts);
    eval_pope->add_option("--input", pope_path, "POPE records (JSONL)");
    CLI::App* eval_mme = app.add_subcommand("eval-mme", "score an MME-style JSONL file");
    add_common(eval_mme, opts);
    eval_mme->add_option("--input", mme_path, "MME cases (JSONL)");
    CLI::App* eval_chair = app.add_subcommand("eval-chair", "score caption hallucinations");
    add_common(eval_chair, opts);
    eval_chair->add_option("--annotations", chair_ann, "annotations (JSONL)");
    eval_chair->add_option("--captions", chair_cap, "captions (JSONL)");
    eval_chair->add_option("--synonyms", synonyms, "synonym map (JSON)");
    CLI::App* heatmap = app.add_subcommand("heatmap", "render attention heatmaps");
    add_common(heatmap, opts);
    CLI::App* ablate = app.add_subcommand("ablate", "keep-ratio x contrastive grid");
    add_common(ablate, opts);
    CLI::App* gen = app.add_subcommand("gen-fixtures", "emit synthetic datasets");
    add_common(gen, opts);
    gen->add_option("--pope-questions", sizes.pope_questions, "POPE question count");
    gen->add_option("--mme-cases", sizes.mme_cases, "MME case count");
    gen->add_option("--chair-images", sizes.chair_images, "CHAIR image count");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentConfig cfg = build_config(opts);
        if (!pope_path.empty()) cfg.pope_path = pope_path;
        if (!mme_path.empty()) cfg.mme_path = mme_path;
        if (!chair_ann.empty()) cfg.chair_annotations_path = chair_ann;
        if (!chair_cap.empty()) cfg.chair_captions_path = chair_cap;
        if (!synonyms.empty()) cfg.synonyms_path = synonyms;

        json report;
        if (analyze->parsed()) report = focal::run_analyze(cfg);
        else if (decode->parsed()) report = focal::run_decode(cfg);
        else if (eval_pope->parsed()) report = focal::run_eval_pope(cfg);
        else if (eval_mme->parsed()) report = focal::run_eval_mme(cfg);
        else if (eval_chair->parsed()) report = focal::run_eval_chair(cfg);
        else if (heatmap->parsed()) report = focal::run_heatmap(cfg);
        else if (ablate->parsed()) report = focal::run_ablate(cfg);
        else if (gen->parsed())
            report = focal::run_gen_fixtures(cfg.out_dir, cfg.root_seed, sizes);
        std::cout << report.dump(2) << "\n";
        return 0;
    } catch (const focal::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const focal::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
