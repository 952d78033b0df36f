#pragma once

#include "cotkd/core.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace cotkd {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive

    friend bool operator==(const Span&, const Span&) = default;
};

enum class ArithOp { Add, Sub, Mul, Div };

/// One operand as written. `key` is the signed numeric core ("-3", "1,200")
/// without "$" or "%" decorations; substitutions match on it.
struct Operand {
    Span core;
    std::string key;
    bool percent = false;
};

/// Expression tree stored as a node array; node 0 is unused, `root` indexes it.
struct ExprNode {
    enum class Kind { Operand, Negate, Binary } kind = Kind::Operand;
    ArithOp op = ArithOp::Add;
    std::size_t operand = 0;  // Kind::Operand
    std::size_t lhs = 0;      // Negate uses lhs only
    std::size_t rhs = 0;
};

struct ArithStatement {
    Span span;  // whole statement, "<<" ... ">>" included for annotations
    std::vector<ExprNode> nodes;
    std::size_t root = 0;
    std::vector<Operand> operands;  // textual order
    Operand stated;                 // right-hand side
    Rational stated_result;
    bool annotation = false;        // <<expr=result>> form

    /// Operator count in the tree.
    std::size_t op_count() const;
    /// Evaluates with the given operand values (parallel to `operands`).
    /// Throws Error(DivisionByZero).
    Rational evaluate(const std::vector<Rational>& values) const;
};

/// Recognizes "<<expr=result>>" calculator annotations and plain
/// "a op b [op c ...] = r" equations (op in + - * x × / ÷). Standard
/// precedence, left-associative; parentheses allowed. Malformed candidates
/// are skipped. Results are in textual order.
std::vector<ArithStatement> parse_statements(std::string_view text);

/// One (stated -> corrected) rewrite, active for number tokens at or after `origin`.
struct Substitution {
    std::size_t origin = 0;
    std::string stated;
    std::string corrected;
};

struct CalcFlag {
    std::size_t pos = 0;
    std::string reason;  // "division_by_zero", "percent_ambiguous"
};

struct CalcResult {
    std::string text;
    std::size_t statements = 0;
    std::vector<Substitution> substitutions;
    std::vector<CalcFlag> flags;
};

/// Recomputes every statement in order with exact arithmetic, after
/// rewriting its operands through the substitutions found so far. A wrong
/// result adds (stated -> computed) to the map; the map is then applied to
/// every number token at or after each origin, including the final answer.
CalcResult calculator_correct_detailed(std::string_view text);
std::string calculator_correct(std::string_view text);

struct CalcGrade {
    bool plain_correct = false;
    bool calc_correct = false;
};

/// Plain: extract-and-compare on the raw text. Calc: the same on the
/// corrected text (identity for non-arithmetic tasks).
CalcGrade grade_with_calc(std::string_view cot, const AnswerValue& gold, TaskKind task);

}  // namespace cotkd
