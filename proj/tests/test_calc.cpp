#include "doctest.h"

#include "cotkd/calc.hpp"
#include "cotkd/filtering.hpp"

#include "support/arith_suite.hpp"

using namespace cotkd;

namespace {

AnswerValue num(std::int64_t v) { return AnswerValue::number(Rational(v)); }

}  // namespace

TEST_CASE("plain equations with precedence") {
    auto st = parse_statements("First 2 + 3 * 4 = 14 and then (2 + 3) * 4 = 20.");
    REQUIRE(st.size() == 2);
    CHECK(st[0].op_count() == 2);
    CHECK(st[0].stated_result == Rational(14));
    std::vector<Rational> v{Rational(2), Rational(3), Rational(4)};
    CHECK(st[0].evaluate(v) == Rational(14));
    CHECK(st[1].evaluate(v) == Rational(20));
    CHECK(parse_statements("10 - 4 - 3 = 3")[0].evaluate({Rational(10), Rational(4), Rational(3)}) == Rational(3));
    CHECK(parse_statements("12 / 3 / 2 = 2").size() == 1);
}

TEST_CASE("annotations and multiplication spellings") {
    auto st = parse_statements("She pays 3 x $4 = $12, or <<3*4=12>>12 in total.");
    REQUIRE(st.size() == 2);
    CHECK_FALSE(st[0].annotation);
    CHECK(st[1].annotation);
    // GSM8K style: the annotation is the statement, the trailing number follows it
    CHECK(calculator_correct("3 x $4 = <<3*4=13>>$13 in total") == "3 x $4 = <<3*4=12>>$12 in total");
    CHECK(parse_statements("6 \xC3\x97 7 = 42").size() == 1);
    CHECK(parse_statements("84 \xC3\xB7 2 = 42").size() == 1);
    CHECK(parse_statements("The box = 12 apples").empty());
    CHECK(parse_statements("x == 4").empty());
    CHECK(parse_statements("<<2+2=>>").empty());
}

TEST_CASE("wrong results propagate through later tokens") {
    std::string in = "He has 5 + 3 = 9 cards. Then 9 * 2 = 18 cards. The answer is 18.";
    auto r = calculator_correct_detailed(in);
    CHECK(r.text == "He has 5 + 3 = 8 cards. Then 8 * 2 = 16 cards. The answer is 16.");
    REQUIRE(r.substitutions.size() == 2);
    CHECK(r.substitutions[0].stated == "9");
    CHECK(r.substitutions[0].corrected == "8");
    CHECK(extract_answer(r.text, TaskKind::Arithmetic) == std::optional<AnswerValue>(num(16)));
}

TEST_CASE("substitutions only reach forward") {
    std::string in = "Start with 9 eggs. Add 5 + 3 = 9 more. The answer is 9.";
    CHECK(calculator_correct(in) == "Start with 9 eggs. Add 5 + 3 = 8 more. The answer is 8.");
}

TEST_CASE("exact arithmetic keeps fractions") {
    CHECK(calculator_correct("1 / 3 * 3 = 2") == "1 / 3 * 3 = 1");
    CHECK(calculator_correct("7 / 2 = 3") == "7 / 2 = 3.5");
    CHECK(calculator_correct("2 / 3 = 0.666667") == "2 / 3 = 0.666667");
    CHECK(calculator_correct("$1,200 + $300 = $1,500") == "$1,200 + $300 = $1,500");
}

TEST_CASE("percent and division by zero are flagged, never rewritten") {
    auto pct = calculator_correct_detailed("20% * 50 = 10 dollars");
    CHECK(pct.text == "20% * 50 = 10 dollars");
    CHECK(pct.flags.empty());
    auto amb = calculator_correct_detailed("20% * 50 = 11 dollars");
    CHECK(amb.text == "20% * 50 = 11 dollars");
    REQUIRE(amb.flags.size() == 1);
    CHECK(amb.flags[0].reason == "percent_ambiguous");
    auto dz = calculator_correct_detailed("5 / 0 = 3, so 3 left");
    CHECK(dz.text == "5 / 0 = 3, so 3 left");
    REQUIRE(dz.flags.size() == 1);
    CHECK(dz.flags[0].reason == "division_by_zero");
}

TEST_CASE("text without statements is untouched") {
    for (const char* s : {"", "No numbers at all.", "The answer is 7.", "Version 1.2.3 of 4 = ", "a = b = c"})
        CHECK(calculator_correct(s) == s);
}

TEST_CASE("slip suite: plain fails, calculator recovers, output is a fixed point") {
    auto cases = arith::make_cases(300, 17);
    std::size_t plain = 0, calc = 0;
    for (const auto& c : cases) {
        CAPTURE(c.slipped_cot);
        auto g = grade_with_calc(c.slipped_cot, num(c.answer), TaskKind::Arithmetic);
        plain += g.plain_correct;
        calc += g.calc_correct;
        CHECK(g.calc_correct);
        std::string once = calculator_correct(c.slipped_cot);
        CHECK(calculator_correct(once) == once);
        CHECK(calculator_correct(c.gold_cot) == c.gold_cot);
    }
    CHECK(plain == 0);
    CHECK(calc == cases.size());
}

TEST_CASE("non-arithmetic tasks grade the same either way") {
    auto g = grade_with_calc("2 + 2 = 5. The answer is yes.", AnswerValue::yes_no(true), TaskKind::YesNo);
    CHECK(g.plain_correct);
    CHECK(g.calc_correct);
}
