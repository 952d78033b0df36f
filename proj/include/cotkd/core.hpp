#pragma once

#include "cotkd/error.hpp"
#include "cotkd/rational.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace cotkd {

enum class TaskKind { Arithmetic, YesNo, LastLetter, Coinflip };

std::string_view to_string(TaskKind t);
/// Accepts "arithmetic", "yesno", "last_letter", "coinflip" (case-insensitive).
TaskKind task_from_string(std::string_view s);

/// A gold or extracted answer. Construct through the factories so the
/// canonical form invariants hold.
class AnswerValue {
public:
    enum class Kind { Number, YesNo, Text };

    static AnswerValue number(Rational r) { return AnswerValue(std::move(r)); }
    static AnswerValue yes_no(bool yes) { return AnswerValue(yes); }
    /// Lowercased, trimmed, inner whitespace collapsed.
    static AnswerValue text(std::string_view raw);

    /// Interprets a raw answer string the way the given task expects it:
    /// numbers for arithmetic, yes/no synonyms for yes/no and coinflip, text otherwise.
    static AnswerValue parse_for_task(std::string_view raw, TaskKind task);

    Kind kind() const;
    const Rational* as_number() const { return std::get_if<Rational>(&v_); }
    const bool* as_yes_no() const { return std::get_if<bool>(&v_); }
    const std::string* as_text() const { return std::get_if<std::string>(&v_); }

    /// Display form used in prompts and targets ("12", "2.5", "yes", "eg").
    std::string render() const;
    /// Lossless form used in files.
    std::string serialize() const;

    friend bool operator==(const AnswerValue&, const AnswerValue&) = default;

private:
    explicit AnswerValue(Rational r) : v_(std::move(r)) {}
    explicit AnswerValue(bool b) : v_(b) {}
    explicit AnswerValue(std::string s) : v_(std::move(s)) {}

    std::variant<Rational, bool, std::string> v_;
};

/// Strips "$", thousands separators, a trailing "%" and trailing sentence
/// punctuation, then parses exactly. Throws Error(NotANumber).
Rational normalize_number(std::string_view raw);
std::optional<Rational> try_normalize_number(std::string_view raw);

/// yes/no/true/false, case-insensitive, surrounding whitespace and trailing
/// punctuation ignored.
std::optional<bool> parse_yes_no(std::string_view raw);

/// Equality after canonicalization: Text that parses as a number compares as
/// that number, Text that is a yes/no synonym compares as that boolean.
bool answers_equal(const AnswerValue& a, const AnswerValue& b);

/// The sentence every finetuning target and exemplar ends with.
std::string answer_sentence(const AnswerValue& answer);
/// Returns cot (right-trimmed) ending with answer_sentence(answer), appending
/// it when absent.
std::string with_answer_sentence(std::string_view cot, const AnswerValue& answer);

/// 100 * part / whole rendered with two decimals, half up. 0.00 for whole = 0.
std::string percent_string(std::size_t part, std::size_t whole);

struct Example {
    std::string id;
    std::string question;
    AnswerValue gold_answer = AnswerValue::number(0);
    std::optional<std::string> gold_cot;
    TaskKind task = TaskKind::Arithmetic;
    std::map<std::string, std::string> meta;

    std::optional<int> length() const;
};

struct Annotation {
    std::string example_id;
    std::string cot;
    std::optional<AnswerValue> extracted;
    bool correct = false;
    std::string teacher_id;
    std::string prompt_hash;
    bool conditioned = false;
};

/// correct is a pure function of the extracted answer and the gold answer.
bool is_correct(const std::optional<AnswerValue>& extracted, const AnswerValue& gold);

struct FinetuneRecord {
    std::string example_id;
    std::string input;
    std::string target;

    friend bool operator==(const FinetuneRecord&, const FinetuneRecord&) = default;
};

// String helpers shared across modules.
std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace cotkd
