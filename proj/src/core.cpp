#include "cotkd/core.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace cotkd {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_trailing_punct(char c) {
    switch (c) {
        case '.': case ',': case '!': case '?': case ';': case ':':
        case '"': case '\'': case ')': case ']':
            return true;
        default:
            return false;
    }
}

std::string_view strip_trailing_decorations(std::string_view s) {
    for (;;) {
        std::size_t before = s.size();
        while (!s.empty() && (is_trailing_punct(s.back()) || is_space(s.back()))) s.remove_suffix(1);
        while (!s.empty() && s.back() == '%') s.remove_suffix(1);
        if (s.size() == before) return s;
    }
}

// Resolves Text answers that are really numbers or yes/no.
AnswerValue canonical(const AnswerValue& a) {
    if (const auto* t = a.as_text()) {
        if (auto n = try_normalize_number(*t)) return AnswerValue::number(*n);
        if (auto b = parse_yes_no(*t)) return AnswerValue::yes_no(*b);
    }
    return a;
}

}  // namespace

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view to_string(TaskKind t) {
    switch (t) {
        case TaskKind::Arithmetic: return "arithmetic";
        case TaskKind::YesNo: return "yesno";
        case TaskKind::LastLetter: return "last_letter";
        case TaskKind::Coinflip: return "coinflip";
    }
    return "arithmetic";
}

TaskKind task_from_string(std::string_view s) {
    std::string k = to_lower(trim(s));
    if (k == "arithmetic") return TaskKind::Arithmetic;
    if (k == "yesno" || k == "yes_no") return TaskKind::YesNo;
    if (k == "last_letter" || k == "lastletter") return TaskKind::LastLetter;
    if (k == "coinflip") return TaskKind::Coinflip;
    throw Error(Errc::ParseError, "unknown task kind '" + std::string(s) + "'");
}

AnswerValue AnswerValue::text(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : trim(raw)) {
        if (is_space(c)) {
            pending_space = true;
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return AnswerValue(std::move(out));
}

AnswerValue AnswerValue::parse_for_task(std::string_view raw, TaskKind task) {
    switch (task) {
        case TaskKind::Arithmetic:
            return number(normalize_number(raw));
        case TaskKind::YesNo:
        case TaskKind::Coinflip:
            if (auto b = parse_yes_no(raw)) return yes_no(*b);
            throw Error(Errc::ParseError, "expected yes/no answer, got '" + std::string(raw) + "'");
        case TaskKind::LastLetter:
            return text(raw);
    }
    return text(raw);
}

AnswerValue::Kind AnswerValue::kind() const {
    if (as_number()) return Kind::Number;
    if (as_yes_no()) return Kind::YesNo;
    return Kind::Text;
}

std::string AnswerValue::render() const {
    if (const auto* n = as_number()) return n->render();
    if (const auto* b = as_yes_no()) return *b ? "yes" : "no";
    return *as_text();
}

std::string AnswerValue::serialize() const {
    if (const auto* n = as_number()) return n->exact_string();
    return render();
}

Rational normalize_number(std::string_view raw) {
    std::string_view s = strip_trailing_decorations(trim(raw));
    std::string sign;
    auto take_sign = [&] {
        if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
            if (s.front() == '-') sign = "-";
            s.remove_prefix(1);
        }
    };
    take_sign();
    if (!s.empty() && s.front() == '$') {
        s.remove_prefix(1);
        if (sign.empty()) take_sign();
    }
    std::string cleaned = sign;
    bool any_digit = false;
    for (char c : s) {
        if (c == ',') continue;
        any_digit = any_digit || std::isdigit(static_cast<unsigned char>(c));
        cleaned.push_back(c);
    }
    if (!any_digit) throw Error(Errc::NotANumber, "not a number: '" + std::string(raw) + "'");
    try {
        return Rational::parse(cleaned);
    } catch (const Error& e) {
        if (e.code() == Errc::DivisionByZero) throw;
        throw Error(Errc::NotANumber, "not a number: '" + std::string(raw) + "'");
    }
}

std::optional<Rational> try_normalize_number(std::string_view raw) {
    try {
        return normalize_number(raw);
    } catch (const Error&) {
        return std::nullopt;
    }
}

std::optional<bool> parse_yes_no(std::string_view raw) {
    std::string k = to_lower(strip_trailing_decorations(trim(raw)));
    if (k == "yes" || k == "true") return true;
    if (k == "no" || k == "false") return false;
    return std::nullopt;
}

bool answers_equal(const AnswerValue& a, const AnswerValue& b) {
    return canonical(a) == canonical(b);
}

bool is_correct(const std::optional<AnswerValue>& extracted, const AnswerValue& gold) {
    return extracted.has_value() && answers_equal(*extracted, gold);
}

std::string answer_sentence(const AnswerValue& answer) {
    return "The answer is " + answer.render() + ".";
}

std::string with_answer_sentence(std::string_view cot, const AnswerValue& answer) {
    std::string_view t = trim(cot);
    const std::string sentence = answer_sentence(answer);
    if (t.ends_with(sentence)) return std::string(t);
    std::string_view bare = std::string_view(sentence).substr(0, sentence.size() - 1);
    if (t.ends_with(bare)) return std::string(t) + ".";
    if (t.empty()) return sentence;
    return std::string(t) + " " + sentence;
}

std::string percent_string(std::size_t part, std::size_t whole) {
    if (whole == 0) return "0.00";
    return Rational(Rational::Int(part) * 100, Rational::Int(whole)).fixed(2);
}

std::optional<int> Example::length() const {
    auto it = meta.find("length");
    if (it == meta.end()) return std::nullopt;
    int v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
    return v;
}

}  // namespace cotkd
