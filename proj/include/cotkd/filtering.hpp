#pragma once

#include "cotkd/corpus.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace cotkd {

struct Extraction {
    std::optional<AnswerValue> value;
    bool used_fallback = false;  // answer phrase absent, value from the fallback rule
};

/// Final answer of a CoT. Looks for the last "the answer is" / "the final
/// answer is" (case-insensitive) and reads the answer after it according to
/// the task. Without the phrase, arithmetic falls back to the last number in
/// the text and yes/no to the last standalone yes/no word. Total: never throws.
Extraction extract_answer_detailed(std::string_view cot, TaskKind task);
std::optional<AnswerValue> extract_answer(std::string_view cot, TaskKind task);

/// A number as written in running text: optional sign and "$", digits with
/// thousands commas, optional decimals and "%".
struct NumberToken {
    std::size_t pos = 0;
    std::size_t len = 0;
    Rational value;
};
std::vector<NumberToken> find_numbers(std::string_view text);

/// End of the numeric core starting at `start` (a digit): digits, comma
/// groups of exactly three digits, then an optional fractional part.
std::size_t number_core_end(std::string_view text, std::size_t start);

struct RetentionStats {
    std::size_t total = 0;
    std::size_t retained = 0;
    std::size_t fallback_used = 0;

    /// retained / total * 100, two decimals, half up.
    std::string retention_pct() const { return percent_string(retained, total); }
    Json to_json() const;

    friend bool operator==(const RetentionStats&, const RetentionStats&) = default;
};

struct FilterResult {
    std::vector<Annotation> retained;
    RetentionStats stats;
};

/// Keeps the annotations whose CoT's final answer equals the gold answer, in
/// input order. The answer is re-extracted from the CoT text. Annotations
/// must be aligned one-to-one with the dataset.
/// Throws Error(IdMismatch).
FilterResult filter_correct(const std::vector<Annotation>& annotations, const Dataset& dataset);

/// Fills extracted/correct on an annotation from its CoT.
void grade_annotation(Annotation& a, const Example& e);

}  // namespace cotkd
