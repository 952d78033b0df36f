#include "doctest.h"

#include "cotkd/core.hpp"

#include "support/oracles.hpp"

#include <random>

using namespace cotkd;

TEST_CASE("normalize_number strips decorations") {
    CHECK(normalize_number("$1,234.50") == Rational::parse("1234.5"));
    CHECK(normalize_number("-$3") == Rational(-3));
    CHECK(normalize_number("$-3") == Rational(-3));
    CHECK(normalize_number("25%") == Rational(25));
    CHECK(normalize_number("  18. ") == Rational(18));
    CHECK(normalize_number("7.") == Rational(7));
    CHECK(normalize_number("1,000,000") == Rational(1000000));
    CHECK_THROWS_AS(normalize_number("twelve"), Error);
    CHECK_THROWS_AS(normalize_number("$"), Error);
    CHECK_FALSE(try_normalize_number("n/a").has_value());
}

TEST_CASE("normalize round-trips rendered values") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        std::int64_t num = static_cast<std::int64_t>(rng() % 2000001) - 1000000;
        std::int64_t den = std::int64_t(1) << (rng() % 6);
        if (rng() % 2) den *= 5;
        Rational r(num, den);
        CAPTURE(r.exact_string());
        CHECK(normalize_number(r.render()) == r);  // terminating within 6 places
        CHECK(normalize_number("$" + r.render() + ".") == r);
    }
}

TEST_CASE("yes/no synonyms") {
    CHECK(parse_yes_no("Yes") == std::optional<bool>(true));
    CHECK(parse_yes_no("FALSE.") == std::optional<bool>(false));
    CHECK_FALSE(parse_yes_no("maybe").has_value());
}

TEST_CASE("answers_equal canonicalizes text") {
    CHECK(answers_equal(AnswerValue::yes_no(true), AnswerValue::text("yes")));
    CHECK(answers_equal(AnswerValue::number(Rational(12)), AnswerValue::text("12.0")));
    CHECK(answers_equal(AnswerValue::text("  Ab  CD "), AnswerValue::text("ab cd")));
    CHECK_FALSE(answers_equal(AnswerValue::number(Rational(12)), AnswerValue::text("twelve")));
    CHECK_FALSE(answers_equal(AnswerValue::yes_no(true), AnswerValue::yes_no(false)));
}

TEST_CASE("answers_equal is an equivalence relation on a mixed sample") {
    std::vector<AnswerValue> vals{AnswerValue::number(Rational(3)),   AnswerValue::text("3"),
                                  AnswerValue::text("3.00"),           AnswerValue::text("$3"),
                                  AnswerValue::yes_no(true),           AnswerValue::text("yes"),
                                  AnswerValue::text("True"),           AnswerValue::yes_no(false),
                                  AnswerValue::text("no"),             AnswerValue::text("ab"),
                                  AnswerValue::text("AB"),             AnswerValue::number(Rational(1, 2)),
                                  AnswerValue::text("0.5"),            AnswerValue::text(".5")};
    for (const auto& a : vals) {
        CHECK(answers_equal(a, a));
        for (const auto& b : vals) {
            CHECK(answers_equal(a, b) == answers_equal(b, a));
            for (const auto& c : vals)
                if (answers_equal(a, b) && answers_equal(b, c)) CHECK(answers_equal(a, c));
        }
    }
}

TEST_CASE("answer sentence helpers") {
    auto twelve = AnswerValue::number(Rational(12));
    CHECK(answer_sentence(twelve) == "The answer is 12.");
    CHECK(with_answer_sentence("So 12.", twelve) == "So 12. The answer is 12.");
    CHECK(with_answer_sentence("So 12. The answer is 12", twelve) == "So 12. The answer is 12.");
    CHECK(with_answer_sentence("So 12. The answer is 12.  ", twelve) == "So 12. The answer is 12.");
    CHECK(with_answer_sentence("", twelve) == "The answer is 12.");
}

TEST_CASE("percent_string matches the integer oracle") {
    CHECK(percent_string(5337, 6725) == "79.36");
    CHECK(percent_string(1319, 1648) == "80.04");
    CHECK(percent_string(0, 0) == "0.00");
    CHECK(percent_string(1, 8) == "12.50");
    CHECK(percent_string(1, 800) == "0.13");  // 0.125 rounds up
    std::mt19937_64 rng(3);
    for (int i = 0; i < 5000; ++i) {
        std::uint64_t whole = 1 + rng() % 100000;
        std::uint64_t part = rng() % (whole + 1);
        CHECK(percent_string(part, whole) == oracle::percent2(part, whole));
    }
}

TEST_CASE("task kinds round-trip") {
    for (auto t : {TaskKind::Arithmetic, TaskKind::YesNo, TaskKind::LastLetter, TaskKind::Coinflip})
        CHECK(task_from_string(to_string(t)) == t);
    CHECK_THROWS_AS(task_from_string("chess"), Error);
}

TEST_CASE("error categories map to exit codes") {
    CHECK(exit_code(category_of(Errc::InvalidArgument)) == 2);
    CHECK(exit_code(category_of(Errc::ParseError)) == 3);
    CHECK(exit_code(category_of(Errc::TransportError)) == 4);
    CHECK(exit_code(category_of(Errc::RateLimited)) == 4);
    CHECK(exit_code(category_of(Errc::IdMismatch)) == 5);
}
