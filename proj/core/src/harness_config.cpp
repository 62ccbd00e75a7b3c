#include <fstream>
#include <random>

#include "focal/harness.hpp"

namespace focal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    return splitmix64(root * 0x100000001b3ULL + stream);
}

void AblationGrid::validate() const {
    if (keep_ratios.empty() || contrastive.empty())
        throw ConfigError("ablation grid must be nonempty");
    for (double r : keep_ratios)
        if (!(r > 0.0 && r <= 1.0)) throw ConfigError("ablation keep_ratio must be in (0,1]");
}

void ExperimentConfig::derive_seeds() {
    model.seed = derive_seed(root_seed, 1);
    decode.rng_seed = derive_seed(root_seed, 2);
}

json ExperimentConfig::echo() const {
    json j;
    j["root_seed"] = root_seed;
    j["model"] = {{"num_layers", model.num_layers},
                  {"num_heads", model.num_heads},
                  {"model_dim", model.model_dim},
                  {"vocab_size", model.vocab_size},
                  {"num_image_tokens", model.num_image_tokens},
                  {"eos_id", model.eos_id},
                  {"seed", model.seed}};
    j["selection"] = {{"keep_ratio", selection.keep_ratio},
                      {"score_layer", selection.score_layer},
                      {"mask_from_layer", selection.mask_from_layer},
                      {"reselect_each_step", selection.reselect_each_step}};
    j["decode"] = {{"alpha", decode.alpha},
                   {"beta", decode.beta},
                   {"max_new_tokens", decode.max_new_tokens},
                   {"sampling", decode.sampling == SamplingMode::greedy ? "greedy" : "categorical"},
                   {"temperature", decode.temperature},
                   {"constraint_source",
                    decode.constraint_source == ConstraintSource::full_image ? "full_image"
                                                                             : "selected_image"},
                   {"rng_seed", decode.rng_seed}};
    j["prompts"] = {{"count", prompts.count}, {"sys_len", prompts.sys_len},
                    {"que_len", prompts.que_len}};
    j["out_dir"] = out_dir;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        cfg.root_seed = j.value("seed", cfg.root_seed);
        cfg.derive_seeds();

        if (j.contains("model")) {
            const json& m = j.at("model");
            cfg.model.num_layers = m.value("num_layers", cfg.model.num_layers);
            cfg.model.num_heads = m.value("num_heads", cfg.model.num_heads);
            cfg.model.model_dim = m.value("model_dim", cfg.model.model_dim);
            cfg.model.vocab_size = m.value("vocab_size", cfg.model.vocab_size);
            cfg.model.num_image_tokens =
                m.value("num_image_tokens", cfg.model.num_image_tokens);
            cfg.model.eos_id = m.value("eos_id", cfg.model.eos_id);
            if (m.contains("seed")) cfg.model.seed = m.at("seed").get<std::uint64_t>();
        }
        if (j.contains("selection")) {
            const json& s = j.at("selection");
            cfg.selection.keep_ratio = s.value("keep_ratio", cfg.selection.keep_ratio);
            cfg.selection.score_layer = s.value("score_layer", cfg.selection.score_layer);
            cfg.selection.mask_from_layer =
                s.value("mask_from_layer", cfg.selection.mask_from_layer);
            cfg.selection.reselect_each_step =
                s.value("reselect_each_step", cfg.selection.reselect_each_step);
        }
        if (j.contains("decode")) {
            const json& d = j.at("decode");
            cfg.decode.alpha = d.value("alpha", cfg.decode.alpha);
            cfg.decode.beta = d.value("beta", cfg.decode.beta);
            cfg.decode.max_new_tokens = d.value("max_new_tokens", cfg.decode.max_new_tokens);
            cfg.decode.temperature = d.value("temperature", cfg.decode.temperature);
            if (d.contains("sampling")) {
                std::string s = d.at("sampling").get<std::string>();
                if (s == "greedy") cfg.decode.sampling = SamplingMode::greedy;
                else if (s == "categorical") cfg.decode.sampling = SamplingMode::categorical;
                else throw ConfigError("unknown sampling mode: " + s);
            }
            if (d.contains("constraint_source")) {
                std::string s = d.at("constraint_source").get<std::string>();
                if (s == "full_image")
                    cfg.decode.constraint_source = ConstraintSource::full_image;
                else if (s == "selected_image")
                    cfg.decode.constraint_source = ConstraintSource::selected_image;
                else throw ConfigError("unknown constraint_source: " + s);
            }
            if (d.contains("rng_seed"))
                cfg.decode.rng_seed = d.at("rng_seed").get<std::uint64_t>();
        }
        if (j.contains("prompts")) {
            const json& p = j.at("prompts");
            cfg.prompts.count = p.value("count", cfg.prompts.count);
            cfg.prompts.sys_len = p.value("sys_len", cfg.prompts.sys_len);
            cfg.prompts.que_len = p.value("que_len", cfg.prompts.que_len);
        }
        if (j.contains("ablation")) {
            const json& a = j.at("ablation");
            if (a.contains("keep_ratios"))
                cfg.ablation.keep_ratios = a.at("keep_ratios").get<std::vector<double>>();
            if (a.contains("contrastive"))
                cfg.ablation.contrastive = a.at("contrastive").get<std::vector<bool>>();
        }
        if (j.contains("heatmap")) {
            const json& h = j.at("heatmap");
            cfg.heatmap.layer = h.value("layer", cfg.heatmap.layer);
            cfg.heatmap.render_size = h.value("render_size", cfg.heatmap.render_size);
            cfg.heatmap.top_heads = h.value("top_heads", cfg.heatmap.top_heads);
            cfg.heatmap.image_id = h.value("image_id", cfg.heatmap.image_id);
        }
        if (j.contains("datasets")) {
            const json& d = j.at("datasets");
            cfg.pope_path = d.value("pope", "");
            cfg.mme_path = d.value("mme", "");
            cfg.chair_annotations_path = d.value("chair_annotations", "");
            cfg.chair_captions_path = d.value("chair_captions", "");
            cfg.synonyms_path = d.value("synonyms", "");
        }
        cfg.out_dir = j.value("out_dir", cfg.out_dir);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    cfg.model.validate();
    cfg.selection.validate(cfg.model.num_layers);
    cfg.decode.validate();
    cfg.ablation.validate();
    if (cfg.prompts.count < 1 || cfg.prompts.que_len < 1 || cfg.prompts.sys_len < 1)
        throw ConfigError("prompt counts must be positive");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

TokenSequence make_prompt(const ModelConfig& mc, std::uint64_t seed, int sys_len,
                          int que_len) {
    std::mt19937_64 rng(seed);
    const TokenId text_lo = 1;  // 0 is EOS
    const TokenId text_hi = mc.first_image_id();
    std::uniform_int_distribution<TokenId> text(text_lo, text_hi - 1);

    std::vector<TokenId> sys(sys_len);
    for (int i = 0; i < sys_len; ++i) sys[i] = text_lo + (i % (text_hi - text_lo));
    std::vector<TokenId> img(mc.num_image_tokens);
    for (int i = 0; i < mc.num_image_tokens; ++i) img[i] = mc.first_image_id() + i;
    std::vector<TokenId> que(que_len);
    for (auto& t : que) t = text(rng);
    return TokenSequence::make(sys, img, que);
}

std::vector<json> read_jsonl(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open file: " + path);
    std::vector<json> lines;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            lines.push_back(json::parse(line));
        } catch (const json::exception& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return lines;
}

void write_jsonl(const std::string& path, const std::vector<json>& lines) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open file for writing: " + path);
    for (const auto& j : lines) f << j.dump() << "\n";
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open file for writing: " + path);
    f << j.dump(2) << "\n";
}

json metric_report_to_json(const MetricReport& rep) {
    json j;
    for (const auto& [name, m] : rep.metrics) {
        j[name] = {{"value", m.value},
                   {"numerator", m.numerator},
                   {"denominator", m.denominator},
                   {"degenerate", m.degenerate}};
    }
    return j;
}

namespace {

bool json_yes(const json& v, const char* field) {
    std::string s = v.at(field).get<std::string>();
    if (s == "yes") return true;
    if (s == "no") return false;
    throw InputError(std::string("expected yes/no in field ") + field + ", got: " + s);
}

}  // namespace

std::vector<PopeRecord> parse_pope_records(const std::vector<json>& lines) {
    std::vector<PopeRecord> out;
    out.reserve(lines.size());
    for (const auto& l : lines) {
        PopeRecord r;
        r.question_id = l.value("question_id", "");
        r.gold_yes = json_yes(l, "gold");
        if (l.contains("predicted")) {
            r.pred_yes = json_yes(l, "predicted");
        } else if (l.contains("text")) {
            auto p = parse_yes_no(l.at("text").get<std::string>());
            r.pred_parsed = p.has_value();
            r.pred_yes = p.value_or(false);
        } else {
            throw InputError("pope record needs 'predicted' or 'text'");
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MmeCase> parse_mme_cases(const std::vector<json>& lines) {
    std::vector<MmeCase> out;
    out.reserve(lines.size());
    for (const auto& l : lines) {
        MmeCase c;
        c.image_id = l.value("image_id", "");
        for (const auto& q : l.at("questions")) {
            MmeQuestion mq;
            mq.gold_yes = json_yes(q, "gold");
            if (q.contains("predicted")) {
                mq.pred_yes = json_yes(q, "predicted");
            } else if (q.contains("text")) {
                auto p = parse_yes_no(q.at("text").get<std::string>());
                mq.pred_parsed = p.has_value();
                mq.pred_yes = p.value_or(false);
            } else {
                throw InputError("mme question needs 'predicted' or 'text'");
            }
            c.questions.push_back(mq);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<ChairRecord> parse_chair_annotations(const std::vector<json>& lines) {
    std::vector<ChairRecord> out;
    for (const auto& l : lines) {
        ChairRecord r;
        r.image_id = l.at("image_id").get<std::string>();
        for (const auto& o : l.at("objects")) r.annotated_objects.insert(o.get<std::string>());
        if (r.annotated_objects.empty())
            throw InputError("chair annotation for " + r.image_id + " has no objects");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<CaptionRecord> parse_caption_records(const std::vector<json>& lines) {
    std::vector<CaptionRecord> out;
    for (const auto& l : lines)
        out.push_back({l.at("image_id").get<std::string>(),
                       l.at("caption").get<std::string>()});
    return out;
}

SynonymMap parse_synonym_map(const json& j) {
    SynonymMap map;
    for (const auto& [cat, forms] : j.items()) {
        for (const auto& f : forms) map[cat].insert(f.get<std::string>());
    }
    // Synonym sets must not overlap across categories.
    std::map<std::string, std::string> seen;
    for (const auto& [cat, forms] : map)
        for (const auto& f : forms) {
            auto [it, inserted] = seen.emplace(f, cat);
            if (!inserted && it->second != cat)
                throw InputError("synonym surface '" + f + "' appears under two categories");
        }
    return map;
}

json decode_trace_to_json(const DecodeStepTrace& trace, int top_n_logits) {
    auto top_n = [&](const std::vector<double>& v) {
        std::vector<int> idx(v.size());
        for (size_t i = 0; i < v.size(); ++i) idx[i] = static_cast<int>(i);
        int n = std::min<int>(top_n_logits, static_cast<int>(v.size()));
        std::partial_sort(idx.begin(), idx.begin() + n, idx.end(),
                          [&](int a, int b) { return v[a] != v[b] ? v[a] > v[b] : a < b; });
        json arr = json::array();
        for (int i = 0; i < n; ++i) arr.push_back({idx[i], v[idx[i]]});
        return arr;
    };
    json j;
    j["logits_full_top"] = top_n(trace.logits_full);
    j["logits_selected_top"] = top_n(trace.logits_selected);
    j["logits_text_only_top"] = top_n(trace.logits_text_only);
    j["calibrated_top"] = top_n(trace.calibrated);
    j["plausible"] = trace.plausible;
    j["chosen"] = trace.chosen;
    j["psi"] = trace.step_selection.scores;
    j["selected"] = trace.step_selection.selected;
    return j;
}

json allocation_summary_to_json(const AllocationSummary& s) {
    auto shares = [](const TypeShares& t) {
        return json{{"sys", t.sys}, {"img", t.img}, {"que", t.que}, {"out", t.out}};
    };
    json j;
    j["gamma"] = shares(s.gamma);
    j["gamma_by_layer"] = json::array();
    for (const auto& g : s.gamma_by_layer) j["gamma_by_layer"].push_back(shares(g));
    j["num_queries"] = s.num_queries;
    return j;
}

}  // namespace focal
