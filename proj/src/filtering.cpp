#include "cotkd/filtering.hpp"

#include <cctype>

namespace cotkd {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Position just after the last answer phrase, if any.
std::optional<std::size_t> after_answer_phrase(std::string_view text) {
    const std::string lower = to_lower(text);
    std::optional<std::size_t> best_start, best_end;
    for (std::string_view phrase : {"the answer is", "the final answer is"}) {
        auto p = lower.rfind(phrase);
        if (p == std::string::npos) continue;
        if (!best_start || p > *best_start) {
            best_start = p;
            best_end = p + phrase.size();
        }
    }
    return best_end;
}

// Up to the end of the sentence: newline, or '.'/'!'/'?' followed by whitespace or end.
std::string_view sentence_rest(std::string_view text) {
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '\n') return text.substr(0, i);
        if ((c == '.' || c == '!' || c == '?') &&
            (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1]))))
            return text.substr(0, i);
    }
    return text;
}

struct Word {
    std::size_t pos;
    std::string_view text;
};

std::vector<Word> words(std::string_view text) {
    std::vector<Word> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_alnum(text[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && is_alnum(text[j])) ++j;
        out.push_back({i, text.substr(i, j - i)});
        i = j;
    }
    return out;
}

std::optional<AnswerValue> first_yes_no(std::string_view text) {
    for (const auto& w : words(text))
        if (auto b = parse_yes_no(w.text)) return AnswerValue::yes_no(*b);
    return std::nullopt;
}

std::optional<AnswerValue> last_yes_no(std::string_view text) {
    std::optional<AnswerValue> out;
    for (const auto& w : words(text)) {
        std::string k = to_lower(w.text);
        if (k == "yes") out = AnswerValue::yes_no(true);
        else if (k == "no") out = AnswerValue::yes_no(false);
    }
    return out;
}

std::optional<AnswerValue> first_word_answer(std::string_view text) {
    std::size_t i = 0;
    while (i < text.size() && (std::isspace(static_cast<unsigned char>(text[i])) || text[i] == ':')) ++i;
    if (i == text.size()) return std::nullopt;
    char q = text[i];
    if (q == '"' || q == '\'') {
        auto close = text.find(q, i + 1);
        if (close == std::string_view::npos) return std::nullopt;
        auto inner = trim(text.substr(i + 1, close - i - 1));
        if (inner.empty()) return std::nullopt;
        return AnswerValue::text(inner);
    }
    std::size_t j = i;
    while (j < text.size() && is_alnum(text[j])) ++j;
    if (j == i) return std::nullopt;
    return AnswerValue::text(text.substr(i, j - i));
}

}  // namespace

std::size_t number_core_end(std::string_view text, std::size_t start) {
    std::size_t j = start;
    while (j < text.size() && is_digit(text[j])) ++j;
    for (;;) {
        if (j + 3 < text.size() && text[j] == ',' && is_digit(text[j + 1]) && is_digit(text[j + 2]) &&
            is_digit(text[j + 3]) && (j + 4 == text.size() || !is_digit(text[j + 4]))) {
            j += 4;
            continue;
        }
        break;
    }
    if (j + 1 < text.size() && text[j] == '.' && is_digit(text[j + 1])) {
        ++j;
        while (j < text.size() && is_digit(text[j])) ++j;
    }
    return j;
}

std::vector<NumberToken> find_numbers(std::string_view text) {
    std::vector<NumberToken> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        std::size_t end = number_core_end(text, i);
        if (end < text.size() && text[end] == '%') ++end;
        // a digit run glued to a preceding decimal point belongs to something else ("1.2.3")
        if (start > 0 && text[start - 1] == '.' && start >= 2 && is_digit(text[start - 2])) {
            i = end;
            continue;
        }
        if (start > 0 && text[start - 1] == '$') --start;
        if (start > 0 && text[start - 1] == '-' && (start == 1 || !is_alnum(text[start - 2]))) --start;
        if (auto v = try_normalize_number(text.substr(start, end - start)))
            out.push_back({start, end - start, *v});
        i = end;
    }
    return out;
}

Extraction extract_answer_detailed(std::string_view cot, TaskKind task) {
    Extraction ex;
    if (auto after = after_answer_phrase(cot)) {
        std::string_view rest = cot.substr(*after);
        switch (task) {
            case TaskKind::Arithmetic: {
                auto nums = find_numbers(sentence_rest(rest));
                if (!nums.empty()) ex.value = AnswerValue::number(nums.front().value);
                break;
            }
            case TaskKind::YesNo:
            case TaskKind::Coinflip:
                ex.value = first_yes_no(sentence_rest(rest));
                break;
            case TaskKind::LastLetter:
                ex.value = first_word_answer(rest);
                break;
        }
        return ex;
    }
    ex.used_fallback = task == TaskKind::Arithmetic || task == TaskKind::YesNo;
    if (task == TaskKind::Arithmetic) {
        auto nums = find_numbers(cot);
        if (!nums.empty()) ex.value = AnswerValue::number(nums.back().value);
    } else if (task == TaskKind::YesNo) {
        ex.value = last_yes_no(cot);
    }
    return ex;
}

std::optional<AnswerValue> extract_answer(std::string_view cot, TaskKind task) {
    return extract_answer_detailed(cot, task).value;
}

Json RetentionStats::to_json() const {
    Json j;
    j["total"] = total;
    j["retained"] = retained;
    j["retention_pct"] = retention_pct();
    j["fallback_used"] = fallback_used;
    return j;
}

void grade_annotation(Annotation& a, const Example& e) {
    a.extracted = extract_answer(a.cot, e.task);
    a.correct = is_correct(a.extracted, e.gold_answer);
}

FilterResult filter_correct(const std::vector<Annotation>& annotations, const Dataset& dataset) {
    if (annotations.size() != dataset.size())
        throw Error(Errc::IdMismatch, std::to_string(annotations.size()) + " annotations for " +
                                          std::to_string(dataset.size()) + " examples");
    FilterResult r;
    r.stats.total = annotations.size();
    for (std::size_t i = 0; i < annotations.size(); ++i) {
        const auto& a = annotations[i];
        const auto& e = dataset.examples[i];
        if (a.example_id != e.id)
            throw Error(Errc::IdMismatch, "annotation " + std::to_string(i) + " is for '" + a.example_id +
                                              "', expected '" + e.id + "'");
        // regrade from the text; stored extracted/correct fields may be stale
        Extraction ex = extract_answer_detailed(a.cot, e.task);
        if (ex.used_fallback && ex.value) ++r.stats.fallback_used;
        if (!is_correct(ex.value, e.gold_answer)) continue;
        Annotation kept = a;
        kept.extracted = std::move(ex.value);
        kept.correct = true;
        r.retained.push_back(std::move(kept));
    }
    r.stats.retained = r.retained.size();
    return r;
}

}  // namespace cotkd
