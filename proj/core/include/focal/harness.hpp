#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "focal/decoder.hpp"
#include "focal/metrics.hpp"
#include "focal/model.hpp"
#include "focal/selection.hpp"
#include "focal/taxonomy.hpp"

namespace focal {

using json = nlohmann::json;

// Stable stream-split of a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream);

struct PromptConfig {
    int count = 8;
    int sys_len = 4;
    int que_len = 6;
};

struct AblationGrid {
    std::vector<double> keep_ratios = {1.0, 0.75, 0.5, 0.125};
    std::vector<bool> contrastive = {true, false};

    void validate() const;
};

struct HeatmapConfig {
    int layer = -1;        // -1 = all layers
    int render_size = 336;
    int top_heads = 6;     // gallery size, ranked by average attention
    std::string image_id = "synthetic";
};

struct ExperimentConfig {
    ModelConfig model;
    SelectionConfig selection;
    DecodeConfig decode;
    PromptConfig prompts;
    AblationGrid ablation;
    HeatmapConfig heatmap;

    std::string pope_path, mme_path;
    std::string chair_annotations_path, chair_captions_path, synonyms_path;

    std::string out_dir = "out";
    std::uint64_t root_seed = 42;

    // Derives model/decode seeds from root_seed unless the config pinned
    // them explicitly.
    void derive_seeds();
    json echo() const;
};

ExperimentConfig config_from_json(const json& j);
ExperimentConfig load_config(const std::string& path);  // IoError / ConfigError

// Deterministic prompt: fixed system tokens, the reserved image ids, and
// seeded question tokens from the text vocabulary.
TokenSequence make_prompt(const ModelConfig& mc, std::uint64_t seed, int sys_len,
                          int que_len);

// JSONL helpers.
std::vector<json> read_jsonl(const std::string& path);
void write_jsonl(const std::string& path, const std::vector<json>& lines);
void write_json_file(const std::string& path, const json& j);

json metric_report_to_json(const MetricReport& rep);

// Dataset parsing (throws InputError on malformed records).
std::vector<PopeRecord> parse_pope_records(const std::vector<json>& lines);
std::vector<MmeCase> parse_mme_cases(const std::vector<json>& lines);
std::vector<ChairRecord> parse_chair_annotations(const std::vector<json>& lines);
std::vector<CaptionRecord> parse_caption_records(const std::vector<json>& lines);
SynonymMap parse_synonym_map(const json& j);

// Modes; each returns the report it also writes under cfg.out_dir.
json run_analyze(const ExperimentConfig& cfg);
json run_decode(const ExperimentConfig& cfg);
json run_eval_pope(const ExperimentConfig& cfg);
json run_eval_mme(const ExperimentConfig& cfg);
json run_eval_chair(const ExperimentConfig& cfg);
json run_heatmap(const ExperimentConfig& cfg);
json run_ablate(const ExperimentConfig& cfg);

struct FixtureSizes {
    int pope_questions = 3000;
    int mme_cases = 200;
    int chair_images = 50;
};

// Writes pope.jsonl, mme.jsonl, chair_annotations.jsonl, chair_captions.jsonl,
// synonyms.json plus answer_key.json (expected metric values computed by
// direct counting during generation). Byte-stable for a fixed seed.
json run_gen_fixtures(const std::string& out_dir, std::uint64_t seed,
                      const FixtureSizes& sizes);

json decode_trace_to_json(const DecodeStepTrace& trace, int top_n_logits = 10);
json allocation_summary_to_json(const AllocationSummary& summary);

}  // namespace focal
