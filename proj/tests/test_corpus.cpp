#include "doctest.h"

#include "cotkd/corpus.hpp"

#include "support/oracles.hpp"

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>
#include <sstream>

using namespace cotkd;
namespace fs = std::filesystem;

namespace {

Dataset parse(const std::string& text, InputFormat f) {
    std::istringstream in(text);
    return parse_dataset(in, f, "t");
}

template <typename F>
Errc code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return Errc::InvalidArgument;
}

}  // namespace

TEST_CASE("gsm8k lines split on the last marker") {
    auto ds = parse(R"({"question": "How many?", "answer": "2 + 3 = <<2+3=5>>5\n#### 5"})"
                    "\n\n"
                    R"({"question": "And now?", "answer": "#### 1,200"})",
                    InputFormat::Gsm8k);
    REQUIRE(ds.size() == 2);
    CHECK(ds.examples[0].id == "t-0");
    CHECK(ds.examples[0].gold_cot == std::optional<std::string>("2 + 3 = <<2+3=5>>5"));
    CHECK(ds.examples[0].gold_answer == AnswerValue::number(Rational(5)));
    CHECK(ds.examples[1].gold_answer == AnswerValue::number(Rational(1200)));
}

TEST_CASE("parse errors carry the line number") {
    try {
        parse("{\"question\": \"q\", \"answer\": \"#### 1\"}\nnot json\n", InputFormat::Gsm8k);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::ParseError);
        CHECK(std::string(e.what()).starts_with("line 2:"));
    }
    CHECK(code_of([] { parse(R"({"question": "q", "answer": "no marker"})", InputFormat::Gsm8k); }) ==
          Errc::ParseError);
    CHECK(code_of([] {
              parse(R"({"id": "a", "question": "q", "answer": true})"
                    "\n"
                    R"({"id": "a", "question": "r", "answer": false})",
                    InputFormat::YesNoJsonl);
          }) == Errc::DuplicateId);
}

TEST_CASE("yes/no records take facts as gold CoT") {
    auto ds = parse(R"({"qid": "q1", "question": "Is it?", "answer": true, "facts": ["A.", "B."]})"
                    "\n"
                    R"({"question": "Was it?", "answer": "no"})",
                    InputFormat::YesNoJsonl);
    CHECK(ds.examples[0].id == "q1");
    CHECK(ds.examples[0].gold_answer == AnswerValue::yes_no(true));
    CHECK(ds.examples[0].gold_cot == std::optional<std::string>("A. B."));
    CHECK_FALSE(ds.examples[1].gold_cot.has_value());
}

TEST_CASE("canonical files round-trip") {
    Dataset ds;
    ds.name = "rt";
    Example a;
    a.id = "x1";
    a.question = "Q \"quoted\"";
    a.gold_answer = AnswerValue::number(Rational(7, 2));
    a.gold_cot = "7 / 2 = 3.5";
    Example b;
    b.id = "x2";
    b.question = "Coin?";
    b.task = TaskKind::Coinflip;
    b.gold_answer = AnswerValue::yes_no(false);
    b.meta["length"] = "3";
    ds.examples = {a, b};
    fs::path p = fs::temp_directory_path() / "cotkd_rt.jsonl";
    write_examples(p, ds);
    Dataset back = load_dataset(p, InputFormat::GenericJsonl);
    REQUIRE(back.size() == 2);
    CHECK(back.examples[0].gold_answer == a.gold_answer);
    CHECK(back.examples[0].question == a.question);
    CHECK(back.examples[1].task == TaskKind::Coinflip);
    CHECK(back.examples[1].length() == std::optional<int>(3));
    fs::remove(p);
}

TEST_CASE("holdout sizes follow floor arithmetic") {
    auto plan = holdout_split(2290, Rational(8, 10), Rational(1, 10));
    const auto* h = plan.holdout();
    REQUIRE(h);
    CHECK(h->train.size() == oracle::floor_frac(2290, 8, 10));
    CHECK(h->val.size() == oracle::floor_frac(2290, 1, 10));
    CHECK(h->train.size() == 1832);
    CHECK(h->val.size() == 229);
    CHECK(h->test.size() == 229);
    CHECK(code_of([] { holdout_split(10, Rational(9, 10), Rational(1, 10)); }) == Errc::InvalidArgument);
    CHECK(code_of([] { holdout_split(5, Rational(1, 10), Rational(1, 10)); }) == Errc::EmptySplit);
}

TEST_CASE("kfold covers every index exactly once") {
    auto plan = kfold_split(1590, 5);
    const auto* k = plan.kfold();
    REQUIRE(k);
    std::vector<int> hits(1590, 0);
    for (const auto& f : k->folds) {
        CHECK(f.size() == 318);
        for (auto i : f) ++hits[i];
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(k->train(0).size() == 1590 - 318);
    CHECK(code_of([] { kfold_split(3, 1); }) == Errc::InvalidK);
    CHECK(code_of([] { kfold_split(3, 4); }) == Errc::InvalidK);
    auto uneven = kfold_split(11, 3);
    CHECK(uneven.kfold()->folds[0].size() == 4);
    CHECK(uneven.kfold()->folds[1].size() == 4);
    CHECK(uneven.kfold()->folds[2].size() == 3);
}

TEST_CASE("split manifests round-trip") {
    for (const auto& plan : {holdout_split(100, Rational(7, 10), Rational(1, 10)), kfold_split(23, 4),
                             carve_split(50, Rational(1, 5))}) {
        SplitPlan back = split_from_json(to_json(plan));
        CHECK(to_json(back) == to_json(plan));
    }
}

TEST_CASE("carve takes the unshuffled tail") {
    Carved c = carve_validation({5, 6, 7, 8, 9, 10, 11, 12, 13, 14}, Rational(3, 10));
    CHECK(c.train == IndexList{5, 6, 7, 8, 9, 10, 11});
    CHECK(c.val == IndexList{12, 13, 14});
    Carved none = carve_validation({1, 2}, Rational(1, 10));
    CHECK(none.val.empty());
    CHECK(none.train.size() == 2);
}

TEST_CASE("subset sizes and monotonicity") {
    CHECK(sample_subset(5337, {Rational(4, 100), 1}).size() == 213);
    CHECK(sample_subset(5337, {Rational(20, 100), 1}).size() == 1067);
    CHECK(sample_subset(5337, {Rational(1), 1}).size() == 5337);
    CHECK(sample_subset(5337, {Rational(4, 100), 1}) == sample_subset(5337, {Rational(4, 100), 1}));
    auto small = sample_subset(5337, {Rational(4, 100), 9});
    auto big = sample_subset(5337, {Rational(20, 100), 9});
    CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
    CHECK(sample_subset(5337, {Rational(4, 100), 1}) != sample_subset(5337, {Rational(4, 100), 2}));
    CHECK(code_of([] { sample_subset(10, {Rational(0), 1}); }) == Errc::InvalidArgument);
}

TEST_CASE("emit modes") {
    Dataset ds;
    ds.name = "e";
    for (int i = 0; i < 3; ++i) {
        Example e;
        e.id = "e" + std::to_string(i);
        e.question = "q" + std::to_string(i);
        e.gold_answer = AnswerValue::number(Rational(i));
        if (i != 1) e.gold_cot = "work " + std::to_string(i);
        ds.examples.push_back(e);
    }
    std::vector<Annotation> anns(3);
    for (int i = 0; i < 3; ++i) {
        anns[i].example_id = "e" + std::to_string(i);
        anns[i].cot = "teacher " + std::to_string(i);
        anns[i].correct = i != 2;
    }
    auto cot = emit_finetune(ds, &anns, EmitMode::Cot);
    REQUIRE(cot.size() == 2);
    CHECK(cot[0].input == "q0");
    CHECK(cot[0].target == "teacher 0 The answer is 0.");
    auto gold = emit_finetune(ds, nullptr, EmitMode::GoldCot);
    CHECK(gold.size() == 2);
    auto ans = emit_finetune(ds, nullptr, EmitMode::AnswerOnly);
    CHECK(ans.size() == 3);
    CHECK(ans[2].target == "The answer is 2.");
    CHECK(code_of([&] { emit_finetune(ds, nullptr, EmitMode::Cot); }) == Errc::MissingAnnotations);
    anns[0].example_id = "zzz";
    CHECK(code_of([&] { emit_finetune(ds, &anns, EmitMode::Cot); }) == Errc::IdMismatch);
}

TEST_CASE("fuzzed splits keep coverage and disjointness") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 3 + rng() % 500;
        std::size_t k = 2 + rng() % std::min<std::size_t>(n - 1, 12);
        auto kp = kfold_split(n, k);
        std::vector<int> hits(n, 0);
        for (const auto& f : kp.kfold()->folds)
            for (auto i : f) ++hits[i];
        CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

        std::int64_t a = 1 + static_cast<std::int64_t>(rng() % 80), b = 1 + static_cast<std::int64_t>(rng() % 15);
        try {
            auto hp = holdout_split(n, Rational(a, 100), Rational(b, 100));
            const auto* h = hp.holdout();
            std::vector<int> c(n, 0);
            for (const auto* part : {&h->train, &h->val, &h->test})
                for (auto i : *part) ++c[i];
            CHECK(std::all_of(c.begin(), c.end(), [](int v) { return v == 1; }));
            CHECK(h->train.size() == oracle::floor_frac(n, a, 100));
        } catch (const Error& e) {
            CHECK(e.code() == Errc::EmptySplit);
        }
    }
}
