#pragma once

// Metrics: intent accuracy, exact-span micro slot F1, sentence accuracy, and
// the five-way error taxonomy (WI/MS/SS/WB/WL) with per-utterance diagnostics.

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace jointidsf {

class AlignmentError : public std::runtime_error {
public:
    explicit AlignmentError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Span {
    std::string slot_type;
    std::size_t start;  // inclusive token index
    std::size_t end;    // inclusive token index

    friend bool operator==(const Span&, const Span&) = default;
    friend auto operator<=>(const Span&, const Span&) = default;
};

enum class ErrorCategory { kWrongIntent, kMissingSlot, kSpuriousSlot, kWrongBoundary, kWrongLabel };

std::string error_category_name(ErrorCategory c);

struct ErrorCounts {
    std::size_t wrong_intent = 0;    // WI
    std::size_t missing_slot = 0;    // MS
    std::size_t spurious_slot = 0;   // SS
    std::size_t wrong_boundary = 0;  // WB
    std::size_t wrong_label = 0;     // WL
    // WB cases where the overlapped gold span has a different type; counted
    // inside wrong_boundary, reported separately as a diagnostic.
    std::size_t wrong_boundary_cross_type = 0;
};

struct ErrorDiagnostic {
    std::size_t utterance;
    ErrorCategory category;
    std::string detail;
};

struct EvalReport {
    double intent_accuracy = 0.0;
    double slot_precision = 0.0;
    double slot_recall = 0.0;
    double slot_f1 = 0.0;
    double sentence_accuracy = 0.0;
    ErrorCounts error_counts;
};

struct SlotPRF {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Lenient (conlleval-style) extraction: B-x starts a span; I-x continues a
// same-type span; an I-x with no open same-type span starts one; O closes.
std::set<Span> extract_spans(const std::vector<std::string>& tags);

// Micro-averaged exact-match span F1 over all utterances. Empty prediction
// set with non-empty gold yields precision 0 by convention.
SlotPRF slot_f1(const std::vector<std::vector<std::string>>& gold_tags,
                const std::vector<std::vector<std::string>>& pred_tags);

double intent_accuracy(const std::vector<std::string>& gold_intents,
                       const std::vector<std::string>& pred_intents);

// Fraction of utterances with the intent and the whole tag sequence correct.
double sentence_accuracy(const std::vector<std::string>& gold_intents,
                         const std::vector<std::string>& pred_intents,
                         const std::vector<std::vector<std::string>>& gold_tags,
                         const std::vector<std::vector<std::string>>& pred_tags);

ErrorCounts categorize_errors(const std::vector<std::string>& gold_intents,
                              const std::vector<std::string>& pred_intents,
                              const std::vector<std::vector<std::string>>& gold_tags,
                              const std::vector<std::vector<std::string>>& pred_tags,
                              std::vector<ErrorDiagnostic>* diagnostics = nullptr);

EvalReport evaluate(const std::vector<std::string>& gold_intents,
                    const std::vector<std::string>& pred_intents,
                    const std::vector<std::vector<std::string>>& gold_tags,
                    const std::vector<std::vector<std::string>>& pred_tags);

// Aligned plain-text rendering with metrics in percent (two decimals).
std::string format_report(const EvalReport& report);

}  // namespace jointidsf
