#include "doctest.h"

#include "cotkd/synthgen.hpp"
#include "cotkd/teacher.hpp"

#include "support/arith_suite.hpp"
#include "support/stub_server.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cotkd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("cotkd_test_" + name);
    fs::remove_all(p);
    return p;
}

Dataset numbered(std::size_t n) {
    Dataset ds;
    ds.name = "num";
    for (std::size_t i = 0; i < n; ++i) {
        Example e;
        e.id = "n" + std::to_string(i);
        e.question = "Question number " + std::to_string(i) + "?";
        e.gold_answer = AnswerValue::number(Rational(0));
        ds.examples.push_back(e);
    }
    return ds;
}

PromptSpec arithmetic_spec(bool conditioned) {
    PromptSpec s;
    s.exemplars = default_exemplars(TaskKind::Arithmetic);
    s.conditioned = conditioned;
    return s;
}

TeacherConfig http_config(const stub::CompletionServer& server, const fs::path& cache, int concurrency) {
    ::setenv("COTKD_TEST_KEY", "test-key", 1);
    TeacherConfig c;
    c.endpoint_url = server.url();
    c.api_key_env = "COTKD_TEST_KEY";
    c.max_concurrency = concurrency;
    c.cache_dir = cache;
    c.backoff_initial = std::chrono::milliseconds(1);
    c.backoff_max = std::chrono::milliseconds(5);
    c.timeout = std::chrono::seconds(10);
    return c;
}

}  // namespace

TEST_CASE("cache keys cover every request field") {
    CompletionRequest a{"m", "p", 10, Rational(0), {"\nQ:"}};
    auto b = a;
    CHECK(a.cache_key() == b.cache_key());
    CHECK(a.cache_key().size() == 64);
    b.temperature = Rational(1, 2);
    CHECK(a.cache_key() != b.cache_key());
    b = a;
    b.stop.push_back("\n\n");
    CHECK(a.cache_key() != b.cache_key());
    b = a;
    b.model = "n";
    CHECK(a.cache_key() != b.cache_key());
    CHECK(a.wire_body()["temperature"] == 0);
}

TEST_CASE("stop truncation uses the earliest stop") {
    CHECK(truncate_at_stop(" a b\nQ: c\n\nd", {"\n\n", "\nQ:"}) == " a b");
    CHECK(truncate_at_stop("none", {"\nQ:"}) == "none");
}

TEST_CASE("cache round trip and corrupt entries") {
    auto dir = fresh_dir("cache");
    ResponseCache cache(dir);
    CompletionRequest req{"m", "p", 10, Rational(0), {"\nQ:"}};
    CHECK_FALSE(cache.get(req.cache_key()).has_value());
    cache.put(req.cache_key(), req, "text");
    CHECK(cache.get(req.cache_key()) == std::optional<std::string>("text"));
    CHECK(cache.path_for(req.cache_key()) == dir / (req.cache_key() + ".json"));
    {
        std::ofstream(cache.path_for(req.cache_key())) << "{broken";
    }
    CHECK_FALSE(cache.get(req.cache_key()).has_value());
    fs::remove_all(dir);
}

TEST_CASE("http annotations keep dataset order and hit the cache on rerun") {
    stub::CompletionServer server;
    server.set_max_delay_ms(8);
    Dataset ds = numbered(60);
    for (int conc : {1, 4, 16}) {
        CAPTURE(conc);
        auto dir = fresh_dir("order" + std::to_string(conc));
        std::size_t before = server.requests();
        TeacherClient client(http_config(server, dir, conc), std::make_unique<HttpBackend>(http_config(server, dir, conc)));
        auto run = annotate_dataset(client, arithmetic_spec(false), ds);
        REQUIRE(run.annotations.size() == ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) {
            CHECK(run.annotations[i].example_id == ds.examples[i].id);
            CHECK(run.annotations[i].cot == "Q-ECHO[" + ds.examples[i].question + "] The answer is 0.");
            CHECK(run.annotations[i].correct);
        }
        CHECK(run.network_calls == ds.size() + run.retries);
        CHECK(server.requests() - before == ds.size());

        std::size_t mid = server.requests();
        TeacherClient again(http_config(server, dir, conc), std::make_unique<HttpBackend>(http_config(server, dir, conc)));
        auto rerun = annotate_dataset(again, arithmetic_spec(false), ds);
        CHECK(server.requests() == mid);
        CHECK(rerun.network_calls == 0);
        CHECK(rerun.cache_hits == ds.size());
        for (std::size_t i = 0; i < ds.size(); ++i) CHECK(rerun.annotations[i].cot == run.annotations[i].cot);
        fs::remove_all(dir);
    }
}

TEST_CASE("429 is retried") {
    stub::CompletionServer server;
    server.set_rate_limit_first(true);
    Dataset ds = numbered(5);
    TeacherClient client(http_config(server, {}, 2), std::make_unique<HttpBackend>(http_config(server, {}, 2)));
    auto run = annotate_dataset(client, arithmetic_spec(false), ds);
    CHECK(run.failures.empty());
    CHECK(run.retries == 5);
    CHECK(run.network_calls == 10);
}

TEST_CASE("auth failures abort, other failures are recorded") {
    stub::CompletionServer server;
    auto cfg = http_config(server, {}, 2);
    ::setenv("COTKD_WRONG_KEY", "nope", 1);
    cfg.api_key_env = "COTKD_WRONG_KEY";
    TeacherClient client(cfg, std::make_unique<HttpBackend>(cfg));
    try {
        annotate_dataset(client, arithmetic_spec(false), numbered(3));
        FAIL("expected AuthError");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::AuthError);
    }
    auto missing = cfg;
    missing.api_key_env = "COTKD_UNSET_KEY_VARIABLE";
    ::unsetenv("COTKD_UNSET_KEY_VARIABLE");
    TeacherClient keyless(missing, std::make_unique<HttpBackend>(missing));
    CHECK_THROWS_AS(annotate_dataset(keyless, arithmetic_spec(false), numbered(3)), Error);

    auto dead = http_config(server, {}, 1);
    dead.endpoint_url = "http://127.0.0.1:1/v1/completions";
    dead.retry_max = 1;
    TeacherClient down(dead, std::make_unique<HttpBackend>(dead));
    auto run = annotate_dataset(down, arithmetic_spec(false), numbered(2));
    CHECK(run.failures.size() == 2);
    CHECK(run.correct == 0);
    CHECK(run.annotations[0].cot.empty());
}

TEST_CASE("mock teacher error rate is near the configured rate") {
    GenConfig g;
    g.task = SymbolicTask::Coinflip;
    g.n = 10000;
    g.length = 2;
    g.seed = 3;
    Dataset ds = generate(g);
    PromptSpec spec;
    spec.exemplars = {{"Is it?", "Yes. The answer is yes.", AnswerValue::yes_no(true)}};
    spec.conditioned = false;
    MockTeacherConfig mc;
    mc.correct_rate = Rational(8, 10);
    mc.seed = 1;
    TeacherConfig tc;
    tc.max_concurrency = 8;
    TeacherClient client(tc, std::make_unique<MockBackend>(mc, &ds));
    auto run = annotate_dataset(client, spec, ds);
    // binomial sd at p=0.8, n=10000 is 0.4 points; allow 2 points
    CHECK(run.correct >= 7800);
    CHECK(run.correct <= 8200);

    TeacherClient same(tc, std::make_unique<MockBackend>(mc, &ds));
    auto again = annotate_dataset(same, spec, ds);
    for (std::size_t i = 0; i < ds.size(); i += 97) CHECK(again.annotations[i].cot == run.annotations[i].cot);
}

TEST_CASE("mock teacher can be told to err only without the hint") {
    auto cases = arith::make_cases(200, 5);
    std::istringstream in(arith::gsm8k_jsonl(cases));
    Dataset ds = parse_dataset(in, InputFormat::Gsm8k, "slips");
    MockTeacherConfig mc;
    mc.correct_rate = Rational(0);
    mc.err_when_conditioned = false;
    mc.error_model = ErrorModel::ArithmeticSlip;
    TeacherConfig tc;
    TeacherClient client(tc, std::make_unique<MockBackend>(mc, &ds));
    CHECK(annotate_dataset(client, arithmetic_spec(true), ds).correct == ds.size());
    CHECK(annotate_dataset(client, arithmetic_spec(false), ds).correct == 0);
    CHECK(error_model_from_string("skip_step") == ErrorModel::SkipStep);
    CHECK_THROWS_AS(error_model_from_string("typo"), Error);
}
