#include "doctest.h"

#include "cotkd/filtering.hpp"
#include "cotkd/synthgen.hpp"

#include "support/oracles.hpp"

#include <set>

using namespace cotkd;

namespace {

GenConfig config(SymbolicTask task, std::size_t n, int len, std::uint64_t seed) {
    GenConfig g;
    g.task = task;
    g.n = n;
    g.length = len;
    g.seed = seed;
    return g;
}

}  // namespace

TEST_CASE("shipped pools") {
    auto words = builtin_words();
    auto names = builtin_names();
    CHECK(words.size() >= 500);
    CHECK(names.size() >= 20);
    for (const auto& w : words) {
        CHECK(w.size() >= 3);
        CHECK(w.find(' ') == std::string::npos);
    }
}

TEST_CASE("last-letter examples agree with the string oracle") {
    for (int len : {1, 2, 3, 4, 6}) {
        Dataset ds = gen_last_letter(config(SymbolicTask::LastLetter, 300, len, 5));
        REQUIRE(ds.size() == 300);
        for (const auto& e : ds.examples) {
            CHECK(e.gold_answer == AnswerValue::text(oracle::last_letters(e.question)));
            CHECK(e.length() == std::optional<int>(len));
            CHECK(extract_answer(*e.gold_cot, e.task) == std::optional<AnswerValue>(e.gold_answer));
        }
    }
}

TEST_CASE("coinflip examples agree with the parity oracle") {
    for (int len : {1, 2, 3, 4, 7}) {
        Dataset ds = gen_coinflip(config(SymbolicTask::Coinflip, 300, len, 8));
        for (const auto& e : ds.examples) {
            CHECK(oracle::count_people(e.question) == len);
            CHECK(e.gold_answer == AnswerValue::yes_no(oracle::coin_answer(e.question) == "yes"));
            CHECK(extract_answer(*e.gold_cot, e.task) == std::optional<AnswerValue>(e.gold_answer));
        }
    }
}

TEST_CASE("generation is a pure function of its config") {
    auto a = generate(config(SymbolicTask::Coinflip, 50, 3, 1));
    auto b = generate(config(SymbolicTask::Coinflip, 50, 3, 1));
    auto c = generate(config(SymbolicTask::Coinflip, 50, 3, 2));
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.examples[i].question == b.examples[i].question);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a.examples[i].question == c.examples[i].question;
    CHECK(same < a.size());
    CHECK(a.examples[0].id == "coinflip-train-L3-s1-0");
}

TEST_CASE("people and words are distinct within a question") {
    auto ds = generate(config(SymbolicTask::LastLetter, 200, 5, 3));
    for (const auto& e : ds.examples) {
        auto words = parse_last_letter_question(e.question, Templates::builtin());
        REQUIRE(words);
        std::set<std::string> uniq(words->begin(), words->end());
        CHECK(uniq.size() == words->size());
    }
}

TEST_CASE("suite: test is disjoint from train, OOD lengths as requested") {
    SuiteConfig sc;
    sc.task = SymbolicTask::Coinflip;
    sc.n = 1000;
    sc.seed = 7;
    SymbolicSuite s = gen_ood_suite(sc);
    CHECK(s.train.size() == 1000);
    CHECK(s.test.size() == 1000);
    REQUIRE(s.ood.size() == 2);
    std::set<std::string> train_q;
    for (const auto& e : s.train.examples) train_q.insert(e.question);
    for (const auto& e : s.test.examples) CHECK_FALSE(train_q.contains(e.question));
    CHECK(s.ood[0].examples[0].length() == std::optional<int>(3));
    CHECK(s.ood[1].examples[0].length() == std::optional<int>(4));
    CHECK(s.ood[0].name == "coinflip-ood3");
}

TEST_CASE("generator errors") {
    auto cfg = config(SymbolicTask::Coinflip, 10, 2, 0);
    cfg.name_pool.clear();
    CHECK_THROWS_AS(generate(cfg), Error);
    auto bad_len = config(SymbolicTask::LastLetter, 10, 0, 0);
    CHECK_THROWS_AS(generate(bad_len), Error);
    // two names at length 1 give four questions; asking for more unseen ones must stop
    auto tiny = config(SymbolicTask::Coinflip, 5, 1, 0);
    tiny.name_pool = {"Ann", "Bo"};
    std::unordered_set<std::string> all;
    for (const auto& e : generate(config(SymbolicTask::Coinflip, 200, 1, 0)).examples) all.insert(e.question);
    tiny.exclude = &all;
    tiny.name_pool = builtin_names();
    try {
        generate(tiny);
        // fine if the 200 draws happened to miss some questions
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyPool);
    }
    auto starved = config(SymbolicTask::Coinflip, 5, 1, 0);
    starved.name_pool = {"Ann"};
    std::unordered_set<std::string> both{"A coin is heads up. Ann flips the coin. Is the coin still heads up?",
                                         "A coin is heads up. Ann does not flip the coin. Is the coin still heads up?"};
    starved.exclude = &both;
    try {
        generate(starved);
        FAIL("expected EmptyPool");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::EmptyPool);
    }
}

TEST_CASE("custom templates flow through") {
    auto t = std::make_shared<Templates>(Templates::parse(
        "last_letter.question = Join the final letters of \"{words}\".\n"
        "last_letter.step = \"{word}\" ends in \"{letter}\".\n"
        "last_letter.conclusion = Together: \"{answer}\".\n"
        "last_letter.answer = The answer is {answer}.\n"));
    auto cfg = config(SymbolicTask::LastLetter, 20, 2, 4);
    cfg.templates = t;
    for (const auto& e : generate(cfg).examples) {
        CHECK(e.question.starts_with("Join the final letters"));
        CHECK(e.gold_answer == AnswerValue::text(oracle::last_letters(e.question)));
    }
}
