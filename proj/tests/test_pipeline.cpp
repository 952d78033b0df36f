#include "doctest.h"

#include "cotkd/evalkit.hpp"
#include "cotkd/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cotkd;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunConfig coinflip_run(const fs::path& out) {
    RunConfig c;
    c.out_dir = out;
    c.synth_task = SymbolicTask::Coinflip;
    c.synth_n = 300;
    c.seed = 4;
    c.ablation = true;
    c.val_frac = Rational(1, 10);
    c.subset_fractions = {Rational(4, 100), Rational(20, 100)};
    c.teacher.mock.correct_rate = Rational(7, 10);
    c.teacher.mock.err_when_conditioned = false;
    return c;
}

}  // namespace

TEST_CASE("pipeline runs are byte-identical") {
    fs::path a = fs::temp_directory_path() / "cotkd_pipe_a";
    fs::path b = fs::temp_directory_path() / "cotkd_pipe_b";
    fs::remove_all(a);
    fs::remove_all(b);
    auto ra = run_pipeline(coinflip_run(a));
    auto rb = run_pipeline(coinflip_run(b));
    REQUIRE(ra.artifacts == rb.artifacts);
    CHECK(ra.artifacts.size() > 10);
    for (const auto& rel : ra.artifacts) {
        CAPTURE(rel.string());
        CHECK(slurp(a / rel) == slurp(b / rel));
    }
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    CHECK(ra.manifest["stats"]["filter"]["retention_pct"] == "100.00");

    // grading the emitted targets as predictions scores them all correct
    Dataset train = load_dataset(a / "data" / "coinflip-train.jsonl", InputFormat::GenericJsonl);
    std::vector<Prediction> preds;
    for (const char* part : {"finetune/cot_train.jsonl", "finetune/cot_val.jsonl"})
        for (const auto& r : read_finetune(a / part)) preds.push_back({r.example_id, r.target});
    CHECK(preds.size() == train.size());
    CHECK(grade(preds, train, GradeMode::Plain).accuracy_pct == "100.00");
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("pipeline config validation") {
    RunConfig none;
    CHECK_THROWS_AS(none.validate(), Error);
    RunConfig bad = coinflip_run("x");
    bad.val_frac = Rational(1);
    CHECK_THROWS_AS(bad.validate(), Error);
    RunConfig http = coinflip_run("x");
    http.teacher.kind = "http";
    CHECK_THROWS_AS(http.validate(), Error);
}
