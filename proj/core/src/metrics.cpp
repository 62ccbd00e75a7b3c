#include "focal/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace focal {

void MetricReport::set_ratio(const std::string& name, double num, double den) {
    Metric m;
    m.numerator = num;
    m.denominator = den;
    if (den == 0.0) {
        m.degenerate = true;
        m.value = 0.0;
    } else {
        m.value = num / den;
    }
    metrics[name] = m;
}

std::optional<bool> parse_yes_no(const std::string& text) {
    std::string word;
    for (char c : text) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
            word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!word.empty()) {
            break;
        }
    }
    if (word == "yes") return true;
    if (word == "no") return false;
    return std::nullopt;
}

MetricReport pope_scores(const std::vector<PopeRecord>& records) {
    if (records.empty()) throw InputError("pope_scores: empty record set");
    long tp = 0, fp = 0, fn = 0, tn = 0, unparsed = 0;
    for (const auto& r : records) {
        if (!r.pred_parsed) ++unparsed;
        bool pred = r.pred_parsed ? r.pred_yes : !r.gold_yes;  // unparsed counts wrong
        if (r.gold_yes && pred) ++tp;
        else if (!r.gold_yes && pred) ++fp;
        else if (r.gold_yes && !pred) ++fn;
        else ++tn;
    }
    MetricReport rep;
    rep.set_ratio("unparsed", static_cast<double>(unparsed),
                  static_cast<double>(records.size()));
    rep.set_ratio("accuracy", static_cast<double>(tp + tn), static_cast<double>(records.size()));
    rep.set_ratio("precision", static_cast<double>(tp), static_cast<double>(tp + fp));
    rep.set_ratio("recall", static_cast<double>(tp), static_cast<double>(tp + fn));
    double p = rep.at("precision").value;
    double r = rep.at("recall").value;
    rep.set_ratio("f1", 2.0 * p * r, p + r);
    return rep;
}

MetricReport mme_scores(const std::vector<MmeCase>& cases) {
    if (cases.empty()) throw InputError("mme_scores: empty case set");
    long correct = 0, both = 0, total_q = 0;
    for (const auto& c : cases) {
        if (c.questions.size() != 2)
            throw InputError("mme_scores: case " + c.image_id + " must have exactly 2 questions");
        int ok = 0;
        for (const auto& q : c.questions) {
            ++total_q;
            if (q.pred_parsed && q.pred_yes == q.gold_yes) ++ok;
        }
        correct += ok;
        if (ok == 2) ++both;
    }
    MetricReport rep;
    rep.set_ratio("accuracy", static_cast<double>(correct), static_cast<double>(total_q));
    rep.set_ratio("accuracy_plus", static_cast<double>(both), static_cast<double>(cases.size()));
    rep.set_ratio("mme_score",
                  100.0 * (rep.at("accuracy").value + rep.at("accuracy_plus").value), 1.0);
    return rep;
}

namespace {

std::vector<std::string> tokenize_lower(const std::string& text) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) words.push_back(cur);
    return words;
}

// Singular/plural word equality: "dogs" matches "dog", "boxes" matches "box".
bool word_matches(const std::string& text_word, const std::string& surface_word) {
    if (text_word == surface_word) return true;
    if (text_word.size() == surface_word.size() + 1 && text_word.back() == 's' &&
        text_word.compare(0, surface_word.size(), surface_word) == 0)
        return true;
    if (text_word.size() == surface_word.size() + 2 &&
        text_word.compare(text_word.size() - 2, 2, "es") == 0 &&
        text_word.compare(0, surface_word.size(), surface_word) == 0)
        return true;
    return false;
}

}  // namespace

std::vector<std::string> extract_objects(const std::string& caption,
                                         const SynonymMap& synonyms) {
    struct Surface {
        std::vector<std::string> words;
        const std::string* category;
    };
    std::vector<Surface> surfaces;
    for (const auto& [cat, forms] : synonyms)
        for (const auto& form : forms)
            surfaces.push_back({tokenize_lower(form), &cat});
    // Longest surface first so multi-word forms win over their suffixes.
    std::stable_sort(surfaces.begin(), surfaces.end(),
                     [](const Surface& a, const Surface& b) {
                         return a.words.size() > b.words.size();
                     });

    std::vector<std::string> words = tokenize_lower(caption);
    std::vector<std::string> found;
    size_t i = 0;
    while (i < words.size()) {
        bool matched = false;
        for (const auto& s : surfaces) {
            if (s.words.empty() || i + s.words.size() > words.size()) continue;
            bool ok = true;
            for (size_t j = 0; j < s.words.size(); ++j) {
                // plural form allowed only on the last word of the surface
                bool last = j + 1 == s.words.size();
                if (last ? !word_matches(words[i + j], s.words[j])
                         : words[i + j] != s.words[j]) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                found.push_back(*s.category);
                i += s.words.size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return found;
}

MetricReport chair_scores(const std::vector<ChairRecord>& annotations,
                          const std::vector<CaptionRecord>& captions,
                          const SynonymMap& synonyms) {
    std::map<std::string, const ChairRecord*> by_id;
    for (const auto& a : annotations) by_id[a.image_id] = &a;

    long annotated_total = 0;
    for (const auto& a : annotations)
        annotated_total += static_cast<long>(a.annotated_objects.size());

    long hallucinated = 0, mentioned_annotated = 0, mentioned_total = 0;
    long captions_with_hallucination = 0;
    for (const auto& cap : captions) {
        auto it = by_id.find(cap.image_id);
        if (it == by_id.end())
            throw InputError("chair_scores: no annotation for image " + cap.image_id);
        const auto& annotated = it->second->annotated_objects;

        std::set<std::string> mentioned;
        for (const auto& c : extract_objects(cap.caption, synonyms)) mentioned.insert(c);

        long hall_here = 0;
        for (const auto& c : mentioned) {
            if (annotated.count(c)) ++mentioned_annotated;
            else ++hall_here;
        }
        mentioned_total += static_cast<long>(mentioned.size());
        hallucinated += hall_here;
        if (hall_here > 0) ++captions_with_hallucination;
    }

    MetricReport rep;
    rep.set_ratio("chair_i", static_cast<double>(hallucinated),
                  static_cast<double>(annotated_total));
    rep.set_ratio("chair_s", static_cast<double>(captions_with_hallucination),
                  static_cast<double>(captions.size()));
    rep.set_ratio("recall_i", static_cast<double>(mentioned_annotated),
                  static_cast<double>(annotated_total));
    rep.set_ratio("chair_i_mentioned", static_cast<double>(hallucinated),
                  static_cast<double>(mentioned_total));
    return rep;
}

}  // namespace focal
