#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "focal/harness.hpp"
#include "test_util.hpp"

using namespace focal;
namespace fs = std::filesystem;

namespace {

std::string temp_dir(const std::string& tag) {
    fs::path p = fs::temp_directory_path() / ("focal_test_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p.string();
}

std::vector<std::uint8_t> slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

ExperimentConfig small_config(const std::string& out_dir) {
    json j;
    j["seed"] = 5;
    j["model"] = {{"num_layers", 4}, {"num_heads", 2}, {"model_dim", 16},
                  {"vocab_size", 24}, {"num_image_tokens", 4}};
    j["decode"] = {{"max_new_tokens", 4}, {"sampling", "greedy"}};
    j["prompts"] = {{"count", 2}, {"sys_len", 2}, {"que_len", 3}};
    j["out_dir"] = out_dir;
    return config_from_json(j);
}

}  // namespace

TEST_CASE("config parsing") {
    ExperimentConfig cfg = config_from_json(json::object());
    CHECK(cfg.model.num_layers == 4);
    CHECK(cfg.selection.keep_ratio == 0.75);
    CHECK(cfg.decode.alpha == 1.0);
    CHECK(cfg.decode.beta == 0.1);

    SUBCASE("root seed derives model and rng seeds") {
        json j;
        j["seed"] = 9;
        ExperimentConfig a = config_from_json(j);
        ExperimentConfig b = config_from_json(j);
        CHECK(a.model.seed == b.model.seed);
        j["seed"] = 10;
        CHECK(config_from_json(j).model.seed != a.model.seed);
    }
    SUBCASE("explicit seeds win over derivation") {
        json j;
        j["seed"] = 9;
        j["model"] = {{"seed", 1234}};
        CHECK(config_from_json(j).model.seed == 1234);
    }
    SUBCASE("invalid enum") {
        json j;
        j["decode"] = {{"sampling", "beam"}};
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("invalid dimensions surface as config errors") {
        json j;
        j["model"] = {{"model_dim", 10}, {"num_heads", 4}};
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("missing config file is an io error") {
        CHECK_THROWS_AS(load_config("/nonexistent/config.json"), IoError);
    }
}

TEST_CASE("make_prompt layout and determinism") {
    ModelConfig mc = testutil::tiny_config();
    TokenSequence a = make_prompt(mc, 77, 2, 3);
    TokenSequence b = make_prompt(mc, 77, 2, 3);
    CHECK(a.ids == b.ids);
    CHECK(a.spans.img.size() == mc.num_image_tokens);
    for (int i = a.spans.img.begin; i < a.spans.img.end; ++i)
        CHECK(a.ids[i] >= mc.first_image_id());
    CHECK(a.spans.out.size() == 0);
    CHECK(make_prompt(mc, 78, 2, 3).ids != a.ids);
}

TEST_CASE("fixtures are byte-identical for a fixed seed") {
    std::string d1 = temp_dir("fx1"), d2 = temp_dir("fx2");
    FixtureSizes sizes{200, 40, 20};
    json k1 = run_gen_fixtures(d1, 31, sizes);
    json k2 = run_gen_fixtures(d2, 31, sizes);
    CHECK(k1 == k2);
    for (const char* f : {"pope.jsonl", "mme.jsonl", "chair_annotations.jsonl",
                          "chair_captions.jsonl", "synonyms.json", "answer_key.json"})
        CHECK(slurp(d1 + "/" + f) == slurp(d2 + "/" + f));
    CHECK(run_gen_fixtures(temp_dir("fx3"), 32, sizes) != k1);
}

TEST_CASE("scoring the answer key's own predictions reproduces the key") {
    std::string dir = temp_dir("roundtrip");
    FixtureSizes sizes{400, 60, 30};
    json key = run_gen_fixtures(dir, 8, sizes);

    ExperimentConfig cfg = small_config(dir + "/out");
    cfg.pope_path = dir + "/pope.jsonl";
    cfg.mme_path = dir + "/mme.jsonl";
    cfg.chair_annotations_path = dir + "/chair_annotations.jsonl";
    cfg.chair_captions_path = dir + "/chair_captions.jsonl";
    cfg.synonyms_path = dir + "/synonyms.json";

    json pope = run_eval_pope(cfg)["metrics"];
    CHECK(pope["accuracy"]["value"].get<double>() ==
          doctest::Approx(key["pope"]["accuracy"].get<double>()).epsilon(1e-12));
    CHECK(pope["f1"]["value"].get<double>() ==
          doctest::Approx(key["pope"]["f1"].get<double>()).epsilon(1e-12));

    json mme = run_eval_mme(cfg)["metrics"];
    CHECK(mme["accuracy"]["value"].get<double>() ==
          doctest::Approx(key["mme"]["accuracy"].get<double>()).epsilon(1e-12));
    CHECK(mme["accuracy_plus"]["value"].get<double>() ==
          doctest::Approx(key["mme"]["accuracy_plus"].get<double>()).epsilon(1e-12));

    json chair = run_eval_chair(cfg)["metrics"];
    for (const char* m : {"chair_i", "chair_s", "recall_i", "chair_i_mentioned"})
        CHECK(chair[m]["value"].get<double>() ==
              doctest::Approx(key["chair"][m].get<double>()).epsilon(1e-12));
}

TEST_CASE("analyze emits a normalized allocation summary") {
    std::string dir = temp_dir("analyze");
    ExperimentConfig cfg = small_config(dir);
    cfg.decode.max_new_tokens = 6;
    json report = run_analyze(cfg);
    const json& gamma = report["allocation"]["gamma"];
    double total = gamma["sys"].get<double>() + gamma["img"].get<double>() +
                   gamma["que"].get<double>() + gamma["out"].get<double>();
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fs::exists(dir + "/analyze_report.json"));
    CHECK(fs::exists(dir + "/allocation_by_layer.csv"));
}

TEST_CASE("decode emits traces and a report") {
    std::string dir = temp_dir("decode");
    ExperimentConfig cfg = small_config(dir);
    json report = run_decode(cfg);
    CHECK(report["generations"].size() == 2);
    CHECK(fs::exists(dir + "/decode_trace_0.jsonl"));
    auto lines = read_jsonl(dir + "/decode_trace_0.jsonl");
    REQUIRE(!lines.empty());
    CHECK(lines[0].contains("psi"));
    CHECK(lines[0].contains("plausible"));
    CHECK(lines[0].contains("chosen"));
}

TEST_CASE("ablate grid covers ratios x contrastive and pins the vanilla cell") {
    std::string dir = temp_dir("ablate");
    ExperimentConfig cfg = small_config(dir);
    json report = run_ablate(cfg);
    const json& cells = report["cells"];
    CHECK(cells.size() == 8);  // 4 ratios x 2 contrastive
    bool saw_vanilla_cell = false;
    for (const auto& c : cells) {
        CHECK(c["reproducible"].get<bool>());
        if (c["keep_ratio"].get<double>() == 1.0 && !c["contrastive"].get<bool>()) {
            saw_vanilla_cell = true;
            CHECK(c["equals_vanilla"].get<bool>());
        }
    }
    CHECK(saw_vanilla_cell);
}

TEST_CASE("heatmap mode renders deterministic files plus an index") {
    std::string d1 = temp_dir("heat1"), d2 = temp_dir("heat2");
    ExperimentConfig cfg = small_config(d1);
    cfg.heatmap.layer = 1;
    cfg.heatmap.render_size = 32;
    json r1 = run_heatmap(cfg);
    cfg.out_dir = d2;
    json r2 = run_heatmap(cfg);
    REQUIRE(!r1["files"].empty());
    for (const auto& f : r1["files"]) {
        std::string name = f["file"].get<std::string>();
        CHECK(slurp(d1 + "/" + name) == slurp(d2 + "/" + name));
    }
    CHECK(fs::exists(d1 + "/heatmap_index.json"));
}

TEST_CASE("eval modes fail with an io error on missing inputs") {
    ExperimentConfig cfg = small_config(temp_dir("missing"));
    cfg.pope_path = "/nonexistent/pope.jsonl";
    CHECK_THROWS_AS(run_eval_pope(cfg), IoError);
    cfg.pope_path.clear();
    CHECK_THROWS_AS(run_eval_pope(cfg), ConfigError);
}
