#include "jointidsf/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace jointidsf {

namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw AlignmentError(std::string(what) + ": " + std::to_string(a) + " vs " +
                             std::to_string(b));
}

bool overlaps(const Span& a, const Span& b) { return a.start <= b.end && b.start <= a.end; }

std::string span_to_string(const Span& s) {
    return s.slot_type + "[" + std::to_string(s.start) + "," + std::to_string(s.end) + "]";
}

}  // namespace

std::string error_category_name(ErrorCategory c) {
    switch (c) {
        case ErrorCategory::kWrongIntent: return "WI";
        case ErrorCategory::kMissingSlot: return "MS";
        case ErrorCategory::kSpuriousSlot: return "SS";
        case ErrorCategory::kWrongBoundary: return "WB";
        case ErrorCategory::kWrongLabel: return "WL";
    }
    return "?";
}

std::set<Span> extract_spans(const std::vector<std::string>& tags) {
    std::set<Span> spans;
    bool open = false;
    Span cur;
    auto close = [&] {
        if (open) spans.insert(cur);
        open = false;
    };
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::string& t = tags[i];
        if (t.rfind("B-", 0) == 0) {
            close();
            cur = {t.substr(2), i, i};
            open = true;
        } else if (t.rfind("I-", 0) == 0) {
            std::string type = t.substr(2);
            if (open && cur.slot_type == type) {
                cur.end = i;
            } else {  // repair: treat as a fresh span start
                close();
                cur = {type, i, i};
                open = true;
            }
        } else {  // O or anything unparseable closes the open span
            close();
        }
    }
    close();
    return spans;
}

SlotPRF slot_f1(const std::vector<std::vector<std::string>>& gold_tags,
                const std::vector<std::vector<std::string>>& pred_tags) {
    check_aligned(gold_tags.size(), pred_tags.size(), "slot_f1: utterance counts");
    std::size_t tp = 0, total_gold = 0, total_pred = 0;
    for (std::size_t i = 0; i < gold_tags.size(); ++i) {
        check_aligned(gold_tags[i].size(), pred_tags[i].size(), "slot_f1: tag lengths");
        auto gold = extract_spans(gold_tags[i]);
        auto pred = extract_spans(pred_tags[i]);
        total_gold += gold.size();
        total_pred += pred.size();
        for (const Span& s : pred)
            if (gold.count(s)) ++tp;
    }
    SlotPRF r;
    r.precision = total_pred ? static_cast<double>(tp) / static_cast<double>(total_pred)
                             : (total_gold == 0 ? 1.0 : 0.0);
    r.recall = total_gold ? static_cast<double>(tp) / static_cast<double>(total_gold)
                          : (total_pred == 0 ? 1.0 : 0.0);
    r.f1 = (r.precision + r.recall > 0.0)
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

double intent_accuracy(const std::vector<std::string>& gold_intents,
                       const std::vector<std::string>& pred_intents) {
    check_aligned(gold_intents.size(), pred_intents.size(), "intent_accuracy: counts");
    if (gold_intents.empty()) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < gold_intents.size(); ++i)
        if (gold_intents[i] == pred_intents[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(gold_intents.size());
}

double sentence_accuracy(const std::vector<std::string>& gold_intents,
                         const std::vector<std::string>& pred_intents,
                         const std::vector<std::vector<std::string>>& gold_tags,
                         const std::vector<std::vector<std::string>>& pred_tags) {
    check_aligned(gold_intents.size(), pred_intents.size(), "sentence_accuracy: intent counts");
    check_aligned(gold_tags.size(), pred_tags.size(), "sentence_accuracy: tag counts");
    check_aligned(gold_intents.size(), gold_tags.size(), "sentence_accuracy: intents vs tags");
    if (gold_intents.empty()) return 0.0;
    std::size_t ok = 0;
    for (std::size_t i = 0; i < gold_intents.size(); ++i)
        if (gold_intents[i] == pred_intents[i] && gold_tags[i] == pred_tags[i]) ++ok;
    return static_cast<double>(ok) / static_cast<double>(gold_intents.size());
}

ErrorCounts categorize_errors(const std::vector<std::string>& gold_intents,
                              const std::vector<std::string>& pred_intents,
                              const std::vector<std::vector<std::string>>& gold_tags,
                              const std::vector<std::vector<std::string>>& pred_tags,
                              std::vector<ErrorDiagnostic>* diagnostics) {
    check_aligned(gold_intents.size(), pred_intents.size(), "categorize_errors: intent counts");
    check_aligned(gold_tags.size(), pred_tags.size(), "categorize_errors: tag counts");
    check_aligned(gold_intents.size(), gold_tags.size(), "categorize_errors: intents vs tags");

    ErrorCounts counts;
    auto emit = [&](std::size_t utt, ErrorCategory cat, std::string detail) {
        if (diagnostics) diagnostics->push_back({utt, cat, std::move(detail)});
    };

    for (std::size_t i = 0; i < gold_intents.size(); ++i) {
        check_aligned(gold_tags[i].size(), pred_tags[i].size(), "categorize_errors: tag lengths");
        if (gold_intents[i] != pred_intents[i]) {
            ++counts.wrong_intent;
            emit(i, ErrorCategory::kWrongIntent,
                 "gold=" + gold_intents[i] + " pred=" + pred_intents[i]);
        }
        auto gold = extract_spans(gold_tags[i]);
        auto pred = extract_spans(pred_tags[i]);

        for (const Span& p : pred) {
            if (gold.count(p)) continue;  // correct span
            const Span* exact_bounds = nullptr;
            const Span* same_type_overlap = nullptr;
            const Span* any_overlap = nullptr;
            for (const Span& g : gold) {
                if (!overlaps(p, g)) continue;
                if (!any_overlap) any_overlap = &g;
                if (g.start == p.start && g.end == p.end && !exact_bounds) exact_bounds = &g;
                if (g.slot_type == p.slot_type && !same_type_overlap) same_type_overlap = &g;
            }
            if (exact_bounds) {
                ++counts.wrong_label;
                emit(i, ErrorCategory::kWrongLabel,
                     "pred=" + span_to_string(p) + " gold=" + span_to_string(*exact_bounds));
            } else if (same_type_overlap) {
                ++counts.wrong_boundary;
                emit(i, ErrorCategory::kWrongBoundary,
                     "pred=" + span_to_string(p) + " gold=" + span_to_string(*same_type_overlap));
            } else if (any_overlap) {
                // Not covered by the taxonomy; boundary disagreement dominates.
                ++counts.wrong_boundary;
                ++counts.wrong_boundary_cross_type;
                emit(i, ErrorCategory::kWrongBoundary,
                     "pred=" + span_to_string(p) + " gold=" + span_to_string(*any_overlap) +
                         " (cross-type)");
            } else {
                ++counts.spurious_slot;
                emit(i, ErrorCategory::kSpuriousSlot, "pred=" + span_to_string(p));
            }
        }
        for (const Span& g : gold) {
            bool touched = false;
            for (const Span& p : pred)
                if (overlaps(p, g)) {
                    touched = true;
                    break;
                }
            if (!touched) {
                ++counts.missing_slot;
                emit(i, ErrorCategory::kMissingSlot, "gold=" + span_to_string(g));
            }
        }
    }
    return counts;
}

EvalReport evaluate(const std::vector<std::string>& gold_intents,
                    const std::vector<std::string>& pred_intents,
                    const std::vector<std::vector<std::string>>& gold_tags,
                    const std::vector<std::vector<std::string>>& pred_tags) {
    EvalReport r;
    r.intent_accuracy = intent_accuracy(gold_intents, pred_intents);
    SlotPRF prf = slot_f1(gold_tags, pred_tags);
    r.slot_precision = prf.precision;
    r.slot_recall = prf.recall;
    r.slot_f1 = prf.f1;
    r.sentence_accuracy = sentence_accuracy(gold_intents, pred_intents, gold_tags, pred_tags);
    r.error_counts = categorize_errors(gold_intents, pred_intents, gold_tags, pred_tags);
    return r;
}

std::string format_report(const EvalReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << "intent accuracy    " << 100.0 * r.intent_accuracy << "\n";
    os << "slot precision     " << 100.0 * r.slot_precision << "\n";
    os << "slot recall        " << 100.0 * r.slot_recall << "\n";
    os << "slot F1            " << 100.0 * r.slot_f1 << "\n";
    os << "sentence accuracy  " << 100.0 * r.sentence_accuracy << "\n";
    os << "errors  WI=" << r.error_counts.wrong_intent << " MS=" << r.error_counts.missing_slot
       << " SS=" << r.error_counts.spurious_slot << " WB=" << r.error_counts.wrong_boundary
       << " WL=" << r.error_counts.wrong_label
       << " (WB cross-type: " << r.error_counts.wrong_boundary_cross_type << ")\n";
    return os.str();
}

}  // namespace jointidsf
