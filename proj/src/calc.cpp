#include "cotkd/calc.hpp"

#include "cotkd/filtering.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

namespace cotkd {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_blank(char c) { return c == ' ' || c == '\t'; }

// UTF-8 multiplication and division signs.
constexpr std::string_view kTimes = "\xC3\x97";
constexpr std::string_view kDivide = "\xC3\xB7";

// A '-' at `pos` is a sign when glued to the number after it and not
// preceded by something that makes it binary.
bool is_sign_at(std::string_view text, std::size_t pos) {
    if (pos >= text.size() || text[pos] != '-') return false;
    if (pos + 1 >= text.size() || !is_digit(text[pos + 1])) return false;
    if (pos == 0) return true;
    char p = text[pos - 1];
    if (std::isspace(static_cast<unsigned char>(p))) return true;
    switch (p) {
        case '(': case '=': case '<': case '>': case '+': case '-': case '*': case '/': case '$':
        case '\x97': case '\xB7':
            return true;
        default:
            return false;
    }
}

// A substitutable number token: sign (if any) plus numeric core.
struct NumTok {
    Span span;
    std::string key;
};

std::vector<NumTok> scan_tokens(std::string_view text) {
    std::vector<NumTok> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        std::size_t start = i;
        std::size_t end = number_core_end(text, i);
        i = end;
        // glued to an identifier ("T5", "x2") or part of a dotted run ("1.2.3")
        if (start > 0 && (is_alpha(text[start - 1]) || text[start - 1] == '_')) continue;
        if (start > 0 && text[start - 1] == '.') continue;
        if (end < text.size() && (is_digit(text[end]) || text[end] == '_')) continue;
        if (start > 0 && is_sign_at(text, start - 1)) --start;
        out.push_back({{start, end}, std::string(text.substr(start, end - start))});
    }
    return out;
}

class ExprParser {
public:
    ExprParser(std::string_view text, std::size_t begin, std::size_t end, ArithStatement& st)
        : text_(text), pos_(begin), end_(end), st_(st) {
        st_.nodes.assign(1, ExprNode{});
    }

    // Parses the whole range; false if anything is left over.
    bool parse_all() {
        auto root = expr();
        if (!root) return false;
        skip_ws();
        if (pos_ != end_) return false;
        st_.root = *root;
        return true;
    }

private:
    std::optional<std::size_t> expr() {
        auto lhs = term();
        if (!lhs) return std::nullopt;
        for (;;) {
            skip_ws();
            if (pos_ >= end_) return lhs;
            char c = text_[pos_];
            if (c != '+' && c != '-') return lhs;
            ++pos_;
            auto rhs = term();
            if (!rhs) return std::nullopt;
            lhs = binary(c == '+' ? ArithOp::Add : ArithOp::Sub, *lhs, *rhs);
        }
    }

    std::optional<std::size_t> term() {
        auto lhs = unary();
        if (!lhs) return std::nullopt;
        for (;;) {
            skip_ws();
            auto op = mul_op();
            if (!op) return lhs;
            auto rhs = unary();
            if (!rhs) return std::nullopt;
            lhs = binary(*op, *lhs, *rhs);
        }
    }

    std::optional<ArithOp> mul_op() {
        if (pos_ >= end_) return std::nullopt;
        std::string_view rest = text_.substr(pos_, end_ - pos_);
        if (rest.starts_with(kTimes)) return pos_ += kTimes.size(), ArithOp::Mul;
        if (rest.starts_with(kDivide)) return pos_ += kDivide.size(), ArithOp::Div;
        char c = rest.front();
        if (c == '*') return ++pos_, ArithOp::Mul;
        if (c == '/') return ++pos_, ArithOp::Div;
        if ((c == 'x' || c == 'X') && pos_ > 0 && (is_blank(text_[pos_ - 1]) || is_digit(text_[pos_ - 1]))) {
            if (pos_ + 1 < end_ && (is_blank(text_[pos_ + 1]) || is_digit(text_[pos_ + 1]) ||
                                    text_[pos_ + 1] == '(' || text_[pos_ + 1] == '$'))
                return ++pos_, ArithOp::Mul;
        }
        return std::nullopt;
    }

    std::optional<std::size_t> unary() {
        skip_ws();
        if (pos_ >= end_) return std::nullopt;
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            auto inner = expr();
            skip_ws();
            if (!inner || pos_ >= end_ || text_[pos_] != ')') return std::nullopt;
            ++pos_;
            return inner;
        }
        if (c == '-' && !is_sign_at(text_, pos_)) {
            ++pos_;
            auto inner = unary();
            if (!inner) return std::nullopt;
            st_.nodes.push_back({ExprNode::Kind::Negate, ArithOp::Sub, 0, *inner, 0});
            return st_.nodes.size() - 1;
        }
        auto operand = number(text_, pos_, end_);
        if (!operand) return std::nullopt;
        st_.operands.push_back(*operand);
        st_.nodes.push_back({ExprNode::Kind::Operand, ArithOp::Add, st_.operands.size() - 1, 0, 0});
        return st_.nodes.size() - 1;
    }

    std::size_t binary(ArithOp op, std::size_t l, std::size_t r) {
        st_.nodes.push_back({ExprNode::Kind::Binary, op, 0, l, r});
        return st_.nodes.size() - 1;
    }

    void skip_ws() {
        while (pos_ < end_ && is_blank(text_[pos_])) ++pos_;
    }

public:
    // ['$'] [sign] core ['%'] or [sign] ['$'] core ['%']; advances pos on success.
    static std::optional<Operand> number(std::string_view text, std::size_t& pos, std::size_t end) {
        std::size_t p = pos;
        if (p < end && text[p] == '$') ++p;
        std::size_t core_begin = p;
        if (p < end && is_sign_at(text, p)) ++p;
        if (p >= end || !is_digit(text[p])) return std::nullopt;
        std::size_t core_end = std::min(number_core_end(text, p), end);
        if (core_end < end && is_digit(text[core_end])) return std::nullopt;
        Operand op;
        op.core = {core_begin, core_end};
        op.key = std::string(text.substr(core_begin, core_end - core_begin));
        p = core_end;
        if (p < end && text[p] == '%') {
            op.percent = true;
            ++p;
        }
        pos = p;
        return op;
    }

private:
    std::string_view text_;
    std::size_t pos_;
    std::size_t end_;
    ArithStatement& st_;
};

std::optional<ArithStatement> parse_annotation(std::string_view text, std::size_t open, std::size_t close) {
    std::size_t inner_begin = open + 2;
    std::size_t eq = text.rfind('=', close);
    if (eq == std::string_view::npos || eq < inner_begin) return std::nullopt;
    ArithStatement st;
    st.annotation = true;
    st.span = {open, close + 2};
    ExprParser lhs(text, inner_begin, eq, st);
    if (!lhs.parse_all()) return std::nullopt;
    std::size_t p = eq + 1;
    while (p < close && is_blank(text[p])) ++p;
    auto rhs = ExprParser::number(text, p, close);
    if (!rhs) return std::nullopt;
    while (p < close && is_blank(text[p])) ++p;
    if (p != close) return std::nullopt;
    auto value = try_normalize_number(rhs->key);
    if (!value) return std::nullopt;
    st.stated = *rhs;
    st.stated_result = *value;
    return st;
}

// Characters a plain left-hand side may contain, scanning backwards.
bool lhs_char(std::string_view text, std::size_t i) {
    char c = text[i];
    if (is_digit(c) || is_blank(c)) return true;
    switch (c) {
        case '.': case ',': case '$': case '%': case '+': case '-': case '*': case '/': case '(': case ')':
            return true;
        case 'x': case 'X':
            return i > 0 && i + 1 < text.size() && (is_blank(text[i - 1]) || is_digit(text[i - 1])) &&
                   (is_blank(text[i + 1]) || is_digit(text[i + 1]));
        default:
            return false;
    }
}

bool can_start_operand(std::string_view text, std::size_t i) {
    char c = text[i];
    if (i > 0 && (is_digit(text[i - 1]) || text[i - 1] == '.' || text[i - 1] == ',') && is_digit(c)) return false;
    return is_digit(c) || c == '$' || c == '(' || c == '-';
}

std::optional<ArithStatement> parse_plain(std::string_view text, std::size_t eq, std::size_t floor) {
    if (eq + 1 < text.size() && text[eq + 1] == '=') return std::nullopt;
    if (eq > 0 && (text[eq - 1] == '=' || text[eq - 1] == '<' || text[eq - 1] == '>' || text[eq - 1] == '!'))
        return std::nullopt;

    // right-hand side: a single number
    std::size_t p = eq + 1;
    while (p < text.size() && is_blank(text[p])) ++p;
    auto rhs = ExprParser::number(text, p, text.size());
    if (!rhs) return std::nullopt;
    if (p < text.size() && is_digit(text[p])) return std::nullopt;
    auto value = try_normalize_number(rhs->key);
    if (!value) return std::nullopt;

    // left-hand side: widest run before '=' that parses with at least one operator
    std::size_t lhs_end = eq;
    while (lhs_end > floor && is_blank(text[lhs_end - 1])) --lhs_end;
    std::size_t a = lhs_end;
    while (a > floor) {
        std::size_t i = a - 1;
        if (lhs_char(text, i)) {
            a = i;
        } else if (i > floor && (text.substr(i - 1, 2) == kTimes || text.substr(i - 1, 2) == kDivide)) {
            a = i - 1;
        } else {
            break;
        }
    }
    for (std::size_t s = a; s < lhs_end; ++s) {
        if (!can_start_operand(text, s)) continue;
        ArithStatement st;
        ExprParser parser(text, s, lhs_end, st);
        if (!parser.parse_all() || st.op_count() == 0) continue;
        st.span = {s, p};
        st.stated = *rhs;
        st.stated_result = *value;
        return st;
    }
    return std::nullopt;
}

const NumTok* token_at(const std::vector<NumTok>& toks, const Span& span) {
    auto it = std::lower_bound(toks.begin(), toks.end(), span.begin,
                               [](const NumTok& t, std::size_t pos) { return t.span.begin < pos; });
    if (it != toks.end() && it->span == span) return &*it;
    return nullptr;
}

// Latest substitution whose origin is at or before `pos` and whose key matches.
const std::string& resolve(const std::vector<Substitution>& subs, const NumTok& tok) {
    for (auto it = subs.rbegin(); it != subs.rend(); ++it)
        if (it->origin <= tok.span.begin && it->stated == tok.key) return it->corrected;
    return tok.key;
}

bool consistent(const Rational& computed, const Rational& stated) {
    return computed == stated || computed.render() == stated.render();
}

}  // namespace

std::size_t ArithStatement::op_count() const {
    std::size_t n = 0;
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i].kind == ExprNode::Kind::Binary) ++n;
    return n;
}

Rational ArithStatement::evaluate(const std::vector<Rational>& values) const {
    auto eval = [&](auto&& self, std::size_t idx) -> Rational {
        const ExprNode& n = nodes.at(idx);
        switch (n.kind) {
            case ExprNode::Kind::Operand: return values.at(n.operand);
            case ExprNode::Kind::Negate: return -self(self, n.lhs);
            case ExprNode::Kind::Binary: {
                Rational l = self(self, n.lhs);
                Rational r = self(self, n.rhs);
                switch (n.op) {
                    case ArithOp::Add: return l + r;
                    case ArithOp::Sub: return l - r;
                    case ArithOp::Mul: return l * r;
                    case ArithOp::Div: return l / r;
                }
            }
        }
        return Rational(0);
    };
    return eval(eval, root);
}

std::vector<ArithStatement> parse_statements(std::string_view text) {
    std::vector<ArithStatement> out;
    std::vector<Span> annotations;
    for (std::size_t pos = text.find("<<"); pos != std::string_view::npos; pos = text.find("<<", pos)) {
        std::size_t close = text.find(">>", pos + 2);
        if (close == std::string_view::npos) break;
        // a nested "<<" means the first one was stray
        std::size_t nested = text.find("<<", pos + 2);
        if (nested != std::string_view::npos && nested < close) {
            pos = nested;
            continue;
        }
        annotations.push_back({pos, close + 2});
        if (auto st = parse_annotation(text, pos, close)) out.push_back(std::move(*st));
        pos = close + 2;
    }

    auto inside_annotation = [&](std::size_t i) {
        return std::any_of(annotations.begin(), annotations.end(),
                           [i](const Span& s) { return i >= s.begin && i < s.end; });
    };
    std::size_t floor = 0;
    for (std::size_t eq = text.find('='); eq != std::string_view::npos; eq = text.find('=', eq + 1)) {
        if (inside_annotation(eq)) continue;
        // never reach back past an annotation or a previous statement's operator side
        std::size_t lo = floor;
        for (const auto& a : annotations)
            if (a.end <= eq) lo = std::max(lo, a.end);
        if (auto st = parse_plain(text, eq, lo)) {
            floor = st->stated.core.begin;
            out.push_back(std::move(*st));
        }
    }
    std::sort(out.begin(), out.end(),
              [](const ArithStatement& a, const ArithStatement& b) { return a.stated.core.begin < b.stated.core.begin; });
    return out;
}

CalcResult calculator_correct_detailed(std::string_view text) {
    CalcResult r;
    const auto statements = parse_statements(text);
    const auto toks = scan_tokens(text);
    r.statements = statements.size();

    auto current = [&](const Operand& op) -> std::optional<Rational> {
        const NumTok* t = token_at(toks, op.core);
        return try_normalize_number(t ? resolve(r.substitutions, *t) : op.key);
    };

    for (const auto& st : statements) {
        std::vector<Rational> literal, percent;
        bool has_percent = st.stated.percent;
        bool ok = true;
        for (const auto& op : st.operands) {
            auto v = current(op);
            if (!v) {
                ok = false;
                break;
            }
            literal.push_back(*v);
            percent.push_back(op.percent ? *v / Rational(100) : *v);
            has_percent = has_percent || op.percent;
        }
        auto stated = current(st.stated);
        if (!ok || !stated) continue;

        Rational computed;
        try {
            computed = st.evaluate(literal);
        } catch (const Error&) {
            r.flags.push_back({st.span.begin, "division_by_zero"});
            continue;
        }
        if (consistent(computed, *stated)) continue;
        if (has_percent) {
            // "20% * 50 = 10" reads as a percentage; accept either reading, never rewrite
            try {
                Rational as_pct = st.evaluate(percent);
                Rational stated_pct = st.stated.percent ? *stated / Rational(100) : *stated;
                if (consistent(as_pct, *stated) || consistent(as_pct, stated_pct)) continue;
            } catch (const Error&) {
            }
            r.flags.push_back({st.span.begin, "percent_ambiguous"});
            continue;
        }
        const NumTok* stated_tok = token_at(toks, st.stated.core);
        if (!stated_tok) continue;
        r.substitutions.push_back({stated_tok->span.begin, stated_tok->key, computed.render()});
    }

    r.text.reserve(text.size());
    std::size_t copied = 0;
    for (const auto& t : toks) {
        const std::string& repl = resolve(r.substitutions, t);
        if (repl == t.key) continue;
        r.text.append(text.substr(copied, t.span.begin - copied));
        r.text += repl;
        copied = t.span.end;
    }
    r.text.append(text.substr(copied));
    return r;
}

std::string calculator_correct(std::string_view text) { return calculator_correct_detailed(text).text; }

CalcGrade grade_with_calc(std::string_view cot, const AnswerValue& gold, TaskKind task) {
    CalcGrade g;
    g.plain_correct = is_correct(extract_answer(cot, task), gold);
    if (task != TaskKind::Arithmetic) {
        g.calc_correct = g.plain_correct;
        return g;
    }
    g.calc_correct = is_correct(extract_answer(calculator_correct(cot), task), gold);
    return g;
}

}  // namespace cotkd
