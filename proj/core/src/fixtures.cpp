#include <algorithm>
#include <filesystem>
#include <random>

#include "focal/harness.hpp"

namespace focal {

namespace fs = std::filesystem;

namespace {

const SynonymMap& fixture_synonyms() {
    static const SynonymMap map = {
        {"bench", {"bench"}},
        {"car", {"car", "automobile"}},
        {"cat", {"cat", "kitten"}},
        {"dog", {"dog", "puppy"}},
        {"frisbee", {"frisbee"}},
        {"person", {"person", "man", "woman"}},
        {"sandwich", {"sandwich", "hot dog"}},
        {"tree", {"tree"}},
    };
    return map;
}

json synonyms_to_json(const SynonymMap& map) {
    json j = json::object();
    for (const auto& [cat, forms] : map) {
        json arr = json::array();
        for (const auto& f : forms) arr.push_back(f);
        j[cat] = arr;
    }
    return j;
}

std::string pick_surface(const std::set<std::string>& forms, std::mt19937_64& rng,
                         bool plural) {
    std::vector<std::string> v(forms.begin(), forms.end());
    std::uniform_int_distribution<size_t> d(0, v.size() - 1);
    std::string s = v[d(rng)];
    // pluralize single-word surfaces only
    if (plural && s.find(' ') == std::string::npos) s += "s";
    return s;
}

}  // namespace

json run_gen_fixtures(const std::string& out_dir, std::uint64_t seed,
                      const FixtureSizes& sizes) {
    if (sizes.pope_questions < 1 || sizes.mme_cases < 1 || sizes.chair_images < 1)
        throw ConfigError("fixture sizes must be positive");
    fs::create_directories(out_dir);
    json key;
    key["seed"] = seed;

    // POPE: balanced gold labels, predictions flip gold with p = 0.25.
    {
        std::mt19937_64 rng(derive_seed(seed, 11));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<json> lines;
        long tp = 0, fp = 0, fn = 0, tn = 0;
        for (int i = 0; i < sizes.pope_questions; ++i) {
            bool gold = (i % 2 == 0);
            bool pred = unit(rng) < 0.25 ? !gold : gold;
            if (gold && pred) ++tp;
            else if (!gold && pred) ++fp;
            else if (gold && !pred) ++fn;
            else ++tn;
            lines.push_back({{"question_id", "q" + std::to_string(i)},
                             {"question", "Is there an object in the image?"},
                             {"gold", gold ? "yes" : "no"},
                             {"predicted", pred ? "yes" : "no"}});
        }
        write_jsonl(out_dir + "/pope.jsonl", lines);
        double n = sizes.pope_questions;
        double prec = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
        double rec = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
        key["pope"] = {{"accuracy", (tp + tn) / n},
                       {"precision", prec},
                       {"recall", rec},
                       {"f1", prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0},
                       {"tp", tp}, {"fp", fp}, {"fn", fn}, {"tn", tn}};
    }

    // MME: one yes-gold and one no-gold question per case.
    {
        std::mt19937_64 rng(derive_seed(seed, 12));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<json> lines;
        long correct = 0, both = 0;
        for (int i = 0; i < sizes.mme_cases; ++i) {
            bool ok1 = unit(rng) < 0.8;
            bool ok2 = unit(rng) < 0.6;
            correct += (ok1 ? 1 : 0) + (ok2 ? 1 : 0);
            if (ok1 && ok2) ++both;
            lines.push_back(
                {{"image_id", "img" + std::to_string(i)},
                 {"questions",
                  json::array({{{"gold", "yes"}, {"predicted", ok1 ? "yes" : "no"}},
                               {{"gold", "no"}, {"predicted", ok2 ? "no" : "yes"}}})}});
        }
        write_jsonl(out_dir + "/mme.jsonl", lines);
        double acc = static_cast<double>(correct) / (2.0 * sizes.mme_cases);
        double accp = static_cast<double>(both) / sizes.mme_cases;
        key["mme"] = {{"accuracy", acc},
                      {"accuracy_plus", accp},
                      {"mme_score", 100.0 * (acc + accp)}};
    }

    // CHAIR: annotations plus captions built from known mention and
    // hallucination sets, so expected metrics come from direct counting.
    {
        const SynonymMap& syn = fixture_synonyms();
        std::vector<std::string> cats;
        for (const auto& [c, _] : syn) cats.push_back(c);
        std::mt19937_64 rng(derive_seed(seed, 13));
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        std::vector<json> ann_lines, cap_lines;
        long annotated_total = 0, mentioned_annotated = 0, mentioned_total = 0;
        long hallucinated = 0, caps_with_hall = 0;
        for (int i = 0; i < sizes.chair_images; ++i) {
            std::vector<std::string> shuffled = cats;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            int n_ann = 2 + static_cast<int>(unit(rng) * 3);  // 2..4
            std::set<std::string> annotated(shuffled.begin(), shuffled.begin() + n_ann);
            annotated_total += n_ann;

            std::set<std::string> mentioned;
            for (const auto& c : annotated)
                if (unit(rng) < 0.7) mentioned.insert(c);
            std::string halluc;
            if (unit(rng) < 0.4) halluc = shuffled.back();  // outside annotated

            std::string caption = "A photo of";
            bool first = true;
            for (const auto& c : mentioned) {
                bool plural = unit(rng) < 0.3;
                caption += first ? " " : " and ";
                caption += plural ? "two " : "a ";
                caption += pick_surface(syn.at(c), rng, plural);
                first = false;
            }
            if (!halluc.empty()) {
                caption += first ? " " : " and ";
                caption += "a " + pick_surface(syn.at(halluc), rng, false);
                first = false;
            }
            if (first) caption += " an empty scene";
            caption += ".";

            mentioned_annotated += static_cast<long>(mentioned.size());
            mentioned_total += static_cast<long>(mentioned.size());
            if (!halluc.empty()) {
                hallucinated += 1;
                mentioned_total += 1;
                caps_with_hall += 1;
            }

            json objs = json::array();
            for (const auto& c : annotated) objs.push_back(c);
            std::string id = "chair" + std::to_string(i);
            ann_lines.push_back({{"image_id", id}, {"objects", objs}});
            cap_lines.push_back({{"image_id", id}, {"caption", caption}});
        }
        write_jsonl(out_dir + "/chair_annotations.jsonl", ann_lines);
        write_jsonl(out_dir + "/chair_captions.jsonl", cap_lines);
        write_json_file(out_dir + "/synonyms.json", synonyms_to_json(syn));
        key["chair"] = {
            {"chair_i", static_cast<double>(hallucinated) / annotated_total},
            {"chair_s", static_cast<double>(caps_with_hall) / sizes.chair_images},
            {"recall_i", static_cast<double>(mentioned_annotated) / annotated_total},
            {"chair_i_mentioned",
             mentioned_total > 0 ? static_cast<double>(hallucinated) / mentioned_total : 0.0}};
    }

    write_json_file(out_dir + "/answer_key.json", key);
    return key;
}

}  // namespace focal
