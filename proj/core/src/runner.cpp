#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "focal/harness.hpp"
#include "focal/viz.hpp"

namespace focal {

namespace fs = std::filesystem;

namespace {

std::uint64_t fnv1a(const std::vector<TokenId>& tokens) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (TokenId t : tokens) {
        h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(t));
        h *= 0x100000001b3ULL;
    }
    return h;
}

void ensure_out_dir(const ExperimentConfig& cfg) {
    std::error_code ec;
    fs::create_directories(cfg.out_dir, ec);
    if (ec) throw IoError("cannot create output directory: " + cfg.out_dir);
}

std::string require_path(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string("missing dataset path for ") + what);
    if (!fs::exists(path)) throw IoError(std::string(what) + " file not found: " + path);
    return path;
}

}  // namespace

json run_analyze(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    TransformerModel model(cfg.model);

    std::vector<AllocationSlice> slices;
    json per_prompt = json::array();
    for (int p = 0; p < cfg.prompts.count; ++p) {
        TokenSequence seq = make_prompt(cfg.model, derive_seed(cfg.root_seed, 100 + p),
                                        cfg.prompts.sys_len, cfg.prompts.que_len);
        std::vector<TokenId> tokens;
        for (int step = 0; step < cfg.decode.max_new_tokens; ++step) {
            ForwardResult r = model.forward(seq);
            // queries that are generated tokens with a prior output token
            if (step >= 2)
                slices.push_back(
                    partition_attention(r.attention, seq.spans, seq.size() - 1));
            TokenId best = 0;
            for (size_t i = 1; i < r.logits.size(); ++i)
                if (r.logits[i] > r.logits[best]) best = static_cast<TokenId>(i);
            tokens.push_back(best);
            seq.append_output(best);
            if (best == cfg.model.eos_id) break;
        }
        // final generated token as query
        if (static_cast<int>(tokens.size()) >= 2) {
            ForwardResult r = model.forward(seq);
            slices.push_back(partition_attention(r.attention, seq.spans, seq.size() - 1));
        }
        per_prompt.push_back({{"prompt", p}, {"tokens", tokens}});
    }

    AllocationSummary summary = average_allocation(slices);
    json report;
    report["config"] = cfg.echo();
    report["allocation"] = allocation_summary_to_json(summary);
    report["generations"] = per_prompt;
    write_json_file(cfg.out_dir + "/analyze_report.json", report);

    std::ofstream csv(cfg.out_dir + "/allocation_by_layer.csv");
    csv << "layer,sys,img,que,out\n";
    for (size_t l = 0; l < summary.gamma_by_layer.size(); ++l) {
        const auto& g = summary.gamma_by_layer[l];
        csv << l << "," << g.sys << "," << g.img << "," << g.que << "," << g.out << "\n";
    }
    return report;
}

json run_decode(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    TransformerModel model(cfg.model);

    json report;
    report["config"] = cfg.echo();
    report["generations"] = json::array();
    for (int p = 0; p < cfg.prompts.count; ++p) {
        TokenSequence seq = make_prompt(cfg.model, derive_seed(cfg.root_seed, 100 + p),
                                        cfg.prompts.sys_len, cfg.prompts.que_len);
        DecodeConfig dec = cfg.decode;
        dec.rng_seed = derive_seed(cfg.decode.rng_seed, static_cast<std::uint64_t>(p));
        GenerationResult gen = generate(model, seq, cfg.selection, dec);

        std::vector<json> trace_lines;
        for (const auto& tr : gen.trace) trace_lines.push_back(decode_trace_to_json(tr));
        std::string trace_path =
            cfg.out_dir + "/decode_trace_" + std::to_string(p) + ".jsonl";
        write_jsonl(trace_path, trace_lines);
        report["generations"].push_back({{"prompt", p},
                                         {"tokens", gen.tokens},
                                         {"trace_file", trace_path}});
    }
    write_json_file(cfg.out_dir + "/decode_report.json", report);
    return report;
}

json run_eval_pope(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    auto records = parse_pope_records(read_jsonl(require_path(cfg.pope_path, "pope")));
    MetricReport rep = pope_scores(records);
    json report;
    report["config"] = cfg.echo();
    report["input"] = cfg.pope_path;
    report["metrics"] = metric_report_to_json(rep);
    write_json_file(cfg.out_dir + "/pope_report.json", report);
    return report;
}

json run_eval_mme(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    auto cases = parse_mme_cases(read_jsonl(require_path(cfg.mme_path, "mme")));
    MetricReport rep = mme_scores(cases);
    json report;
    report["config"] = cfg.echo();
    report["input"] = cfg.mme_path;
    report["metrics"] = metric_report_to_json(rep);
    write_json_file(cfg.out_dir + "/mme_report.json", report);
    return report;
}

json run_eval_chair(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    auto annotations = parse_chair_annotations(
        read_jsonl(require_path(cfg.chair_annotations_path, "chair annotations")));
    auto captions = parse_caption_records(
        read_jsonl(require_path(cfg.chair_captions_path, "chair captions")));
    std::ifstream sf(require_path(cfg.synonyms_path, "synonyms"));
    json sj;
    sf >> sj;
    SynonymMap synonyms = parse_synonym_map(sj);

    MetricReport rep = chair_scores(annotations, captions, synonyms);
    json report;
    report["config"] = cfg.echo();
    report["metrics"] = metric_report_to_json(rep);
    write_json_file(cfg.out_dir + "/chair_report.json", report);
    return report;
}

json run_heatmap(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    TransformerModel model(cfg.model);
    TokenSequence seq = make_prompt(cfg.model, derive_seed(cfg.root_seed, 100),
                                    cfg.prompts.sys_len, cfg.prompts.que_len);
    ForwardResult fwd = model.forward(seq);
    const int query = seq.size() - 1;
    RgbImage base = synthetic_base_image(cfg.heatmap.render_size, cfg.heatmap.render_size,
                                         cfg.root_seed);

    auto render = [&](int layer, int head, const std::string& head_name) {
        HeatGrid grid = heat_grid_from_attention(fwd.attention, seq.spans, layer, head, query);
        RgbImage heat = resize_bicubic(apply_colormap(normalize_grid(grid)),
                                       cfg.heatmap.render_size, cfg.heatmap.render_size);
        RgbImage composite = overlay(base, heat);
        std::string name = cfg.heatmap.image_id + "_" + std::to_string(layer) + "_" +
                           head_name + "_" + std::to_string(query) + ".png";
        write_png(composite, cfg.out_dir + "/" + name);
        return name;
    };

    json index = json::array();
    std::vector<int> layers;
    if (cfg.heatmap.layer >= 0) layers.push_back(cfg.heatmap.layer);
    else for (int l = 0; l < cfg.model.num_layers; ++l) layers.push_back(l);

    for (int layer : layers) {
        if (layer >= cfg.model.num_layers) throw ConfigError("heatmap layer out of range");
        // rank heads by average attention over the image span at this query
        std::vector<std::pair<double, int>> ranked;
        for (int h = 0; h < cfg.model.num_heads; ++h) {
            double avg = 0.0;
            for (int s = seq.spans.img.begin; s < seq.spans.img.end; ++s)
                avg += fwd.attention.at(layer, h, query, s);
            ranked.push_back({avg / seq.spans.img.size(), h});
        }
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first > b.first;
        });
        int gallery = std::min<int>(cfg.heatmap.top_heads, cfg.model.num_heads);
        for (int g = 0; g < gallery; ++g) {
            int h = ranked[g].second;
            index.push_back({{"file", render(layer, h, std::to_string(h))},
                             {"layer", layer},
                             {"head", h},
                             {"query", query},
                             {"rank", g}});
        }
        index.push_back({{"file", render(layer, -1, "mean")},
                         {"layer", layer},
                         {"head", "mean"},
                         {"query", query}});
    }

    json report;
    report["config"] = cfg.echo();
    report["files"] = index;
    write_json_file(cfg.out_dir + "/heatmap_index.json", report);
    return report;
}

json run_ablate(const ExperimentConfig& cfg) {
    ensure_out_dir(cfg);
    TransformerModel model(cfg.model);

    // vanilla greedy reference per prompt
    std::vector<std::vector<TokenId>> vanilla;
    std::vector<TokenSequence> prompts;
    for (int p = 0; p < cfg.prompts.count; ++p) {
        prompts.push_back(make_prompt(cfg.model, derive_seed(cfg.root_seed, 100 + p),
                                      cfg.prompts.sys_len, cfg.prompts.que_len));
        vanilla.push_back(
            generate_vanilla(model, prompts.back(), cfg.decode.max_new_tokens).tokens);
    }

    json rows = json::array();
    for (double ratio : cfg.ablation.keep_ratios) {
        for (bool cd : cfg.ablation.contrastive) {
            SelectionConfig sel = cfg.selection;
            sel.keep_ratio = ratio;
            DecodeConfig dec = cfg.decode;
            dec.sampling = SamplingMode::greedy;
            if (!cd) {
                dec.alpha = 0.0;
                dec.beta = 0.0;
            }

            auto run_cell = [&] {
                std::vector<std::vector<TokenId>> outs;
                for (int p = 0; p < cfg.prompts.count; ++p) {
                    DecodeConfig d = dec;
                    d.rng_seed = derive_seed(cfg.decode.rng_seed,
                                             static_cast<std::uint64_t>(p));
                    outs.push_back(generate(model, prompts[p], sel, d).tokens);
                }
                return outs;
            };
            auto outs = run_cell();
            auto outs2 = run_cell();  // reproducibility probe

            std::uint64_t h = 0;
            bool reproducible = true, equals_vanilla = true;
            double total_len = 0.0;
            for (int p = 0; p < cfg.prompts.count; ++p) {
                h ^= fnv1a(outs[p]) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
                reproducible = reproducible && outs[p] == outs2[p];
                equals_vanilla = equals_vanilla && outs[p] == vanilla[p];
                total_len += static_cast<double>(outs[p].size());
            }
            rows.push_back({{"keep_ratio", ratio},
                            {"kept_tokens", sel.top_k(cfg.model.num_image_tokens)},
                            {"num_image_tokens", cfg.model.num_image_tokens},
                            {"contrastive", cd},
                            {"mean_output_len", total_len / cfg.prompts.count},
                            {"token_hash", h},
                            {"reproducible", reproducible},
                            {"equals_vanilla", equals_vanilla}});
        }
    }

    json report;
    report["config"] = cfg.echo();
    report["cells"] = rows;
    write_json_file(cfg.out_dir + "/ablate_report.json", report);
    return report;
}

}  // namespace focal
