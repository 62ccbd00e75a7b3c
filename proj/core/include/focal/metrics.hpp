#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "focal/types.hpp"

namespace focal {

struct PopeRecord {
    std::string question_id;
    bool gold_yes = false;
    bool pred_yes = false;
    bool pred_parsed = true;  // false when the answer text had no yes/no
};

struct MmeQuestion {
    bool gold_yes = false;
    bool pred_yes = false;
    bool pred_parsed = true;
};

struct MmeCase {
    std::string image_id;
    std::vector<MmeQuestion> questions;  // exactly two
};

// category -> accepted surface forms (lowercase; may be multi-word)
using SynonymMap = std::map<std::string, std::set<std::string>>;

struct ChairRecord {
    std::string image_id;
    std::set<std::string> annotated_objects;
};

struct CaptionRecord {
    std::string image_id;
    std::string caption;
};

struct Metric {
    double value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    bool degenerate = false;  // denominator was zero; value reported as 0
};

struct MetricReport {
    std::map<std::string, Metric> metrics;

    void set_ratio(const std::string& name, double num, double den);
    const Metric& at(const std::string& name) const { return metrics.at(name); }
};

// Leading yes/no scan, case-insensitive; nullopt when neither is found.
std::optional<bool> parse_yes_no(const std::string& text);

// POPE: accuracy, precision, recall, f1 (positive class = "yes").
MetricReport pope_scores(const std::vector<PopeRecord>& records);

// MME: accuracy (per question), accuracy_plus (both questions per case),
// mme_score = 100 * (accuracy + accuracy_plus).
MetricReport mme_scores(const std::vector<MmeCase>& cases);

// Lowercase word tokenization, longest surface-form match (with simple
// plurals) mapped back to categories; unmatched words ignored.
std::vector<std::string> extract_objects(const std::string& caption,
                                         const SynonymMap& synonyms);

// chair_i (hallucinated / all annotated), chair_s (captions with a
// hallucination / all captions), recall_i (mentioned annotated / all
// annotated), plus chair_i_mentioned (hallucinated / all mentioned) for
// comparability with the common convention.
MetricReport chair_scores(const std::vector<ChairRecord>& annotations,
                          const std::vector<CaptionRecord>& captions,
                          const SynonymMap& synonyms);

}  // namespace focal
