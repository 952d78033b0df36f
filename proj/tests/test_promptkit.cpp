#include "doctest.h"

#include "cotkd/promptkit.hpp"

using namespace cotkd;

namespace {

PromptSpec spec(bool conditioned) {
    PromptSpec s;
    s.exemplars = {{"What is 2 + 2?", "2 + 2 = 4.", AnswerValue::number(Rational(4))},
                   {"Is the sky green?", "The sky is blue. The answer is no.", AnswerValue::yes_no(false)}};
    s.conditioned = conditioned;
    return s;
}

Example target() {
    Example e;
    e.id = "t";
    e.question = "What is 3 + 5?";
    e.gold_answer = AnswerValue::number(Rational(8));
    return e;
}

}  // namespace

TEST_CASE("prompt layout") {
    CHECK(build_prompt(spec(false), target()) ==
          "Q: What is 2 + 2?\nA: 2 + 2 = 4. The answer is 4.\n\n"
          "Q: Is the sky green?\nA: The sky is blue. The answer is no.\n\n"
          "Q: What is 3 + 5?\nA:");
    CHECK(build_prompt(spec(true), target()) ==
          "Q: What is 2 + 2? (Answer: 4)\nA: 2 + 2 = 4. The answer is 4.\n\n"
          "Q: Is the sky green? (Answer: no)\nA: The sky is blue. The answer is no.\n\n"
          "Q: What is 3 + 5? (Answer: 8)\nA:");
}

TEST_CASE("conditioning only adds hints") {
    std::string plain = build_prompt(spec(false), target());
    std::string cond = build_prompt(spec(true), target());
    std::string stripped = cond;
    for (const char* h : {" (Answer: 4)", " (Answer: no)", " (Answer: 8)"}) {
        auto p = stripped.find(h);
        REQUIRE(p != std::string::npos);
        stripped.erase(p, std::string(h).size());
    }
    CHECK(stripped == plain);
    CHECK(answer_hint(AnswerValue::text("ab")) == " (Answer: ab)");
}

TEST_CASE("exemplar files") {
    auto ok = parse_exemplars(R"({"question": "Q1", "cot": "1 + 1 = 2. The answer is 2.", "answer": 2})"
                              "\n\n"
                              R"({"question": "Q2", "cot": "So the answer is yes.", "answer": "yes"})");
    REQUIRE(ok.size() == 2);
    CHECK(ok[1].answer == AnswerValue::yes_no(true));
    try {
        parse_exemplars(R"({"question": "Q1", "cot": "The answer is 3.", "answer": 2})");
        FAIL("expected InconsistentExemplar");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::InconsistentExemplar);
        CHECK(std::string(e.what()).find('0') != std::string::npos);
    }
    CHECK_THROWS_AS(parse_exemplars("{not json"), Error);
}

TEST_CASE("shipped exemplars are self-consistent") {
    for (auto task : {TaskKind::Arithmetic, TaskKind::YesNo}) {
        auto ex = default_exemplars(task);
        CHECK(ex.size() >= 4);
        PromptSpec s;
        s.exemplars = ex;
        CHECK_NOTHROW(s.validate());
    }
    CHECK_THROWS_AS(default_exemplars(TaskKind::Coinflip), Error);
    PromptSpec empty;
    CHECK_THROWS_AS(empty.validate(), Error);
}
