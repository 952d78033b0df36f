#include "cotkd/pipeline.hpp"

#include "cotkd/filtering.hpp"
#include "cotkd/hash.hpp"
#include "cotkd/log.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace cotkd {

namespace fs = std::filesystem;

void RunConfig::validate() const {
    if (!synth_task && train_path.empty()) throw Error(Errc::InvalidArgument, "need an input corpus or a synth task");
    if (synth_task && !train_path.empty())
        throw Error(Errc::InvalidArgument, "give either an input corpus or a synth task, not both");
    if (val_frac < Rational(0) || val_frac >= Rational(1))
        throw Error(Errc::InvalidArgument, "val_frac must be in [0, 1)");
    for (const auto& f : subset_fractions)
        if (f <= Rational(0) || f > Rational(1)) throw Error(Errc::InvalidArgument, "subset fractions must be in (0, 1]");
    if (teacher.kind != "mock" && teacher.kind != "http")
        throw Error(Errc::InvalidArgument, "teacher kind must be mock or http");
    if (teacher.kind == "http" && teacher.http.endpoint_url.empty())
        throw Error(Errc::InvalidArgument, "http teacher needs an endpoint url");
    if (max_tokens < 1) throw Error(Errc::InvalidArgument, "max_tokens must be >= 1");
}

Json RunConfig::to_json() const {
    Json j;
    Json src;
    if (synth_task) {
        src["synth_task"] = to_string(*synth_task);
        src["n"] = synth_n;
        src["train_length"] = synth_train_length;
        src["ood"] = synth_ood;
    } else {
        src["train"] = train_path.generic_string();
        src["test"] = test_path.generic_string();
        src["format"] = to_string(format);
    }
    src["seed"] = seed;
    j["source"] = std::move(src);
    j["prompt"] = {{"exemplars", exemplars_path.generic_string()},
                   {"conditioned", conditioned},
                   {"ablation", ablation},
                   {"max_tokens", max_tokens},
                   {"temperature", temperature.exact_string()}};
    Json t;
    t["kind"] = teacher.kind;
    if (teacher.kind == "http") {
        t["endpoint"] = teacher.http.endpoint_url;
        t["model"] = teacher.http.model_id;
        t["retry_max"] = teacher.http.retry_max;
    } else {
        t["correct_rate"] = teacher.mock.correct_rate.exact_string();
        t["error_model"] = to_string(teacher.mock.error_model);
        t["seed"] = teacher.mock.seed;
        t["err_when_conditioned"] = teacher.mock.err_when_conditioned;
    }
    j["teacher"] = std::move(t);
    Json subsets = Json::array();
    for (const auto& f : subset_fractions) subsets.push_back(f.exact_string());
    j["emit"] = {{"val_frac", val_frac.exact_string()}, {"subset_fractions", subsets}, {"subset_seed", subset_seed}};
    return j;
}

std::vector<Exemplar> exemplars_for(TaskKind task, const fs::path& path, std::uint64_t seed) {
    if (!path.empty()) return load_exemplars(path);
    if (task == TaskKind::Arithmetic || task == TaskKind::YesNo) return default_exemplars(task);
    GenConfig g;
    g.task = task == TaskKind::Coinflip ? SymbolicTask::Coinflip : SymbolicTask::LastLetter;
    g.n = 8;
    g.length = 2;
    g.seed = seed;
    g.split = "exemplars";
    std::vector<Exemplar> out;
    for (const auto& e : generate(g).examples) out.push_back({e.question, e.gold_cot.value_or(""), e.gold_answer});
    return out;
}

std::unique_ptr<CompletionBackend> make_backend(const TeacherChoice& choice, const Dataset* answer_key) {
    if (choice.kind == "http") return std::make_unique<HttpBackend>(choice.http);
    if (choice.kind == "mock") return std::make_unique<MockBackend>(choice.mock, answer_key);
    throw Error(Errc::InvalidArgument, "unknown teacher kind '" + choice.kind + "'");
}

namespace {

std::vector<Annotation> annotations_for(const Dataset& part, const std::vector<Annotation>& all) {
    std::unordered_set<std::string_view> ids;
    for (const auto& e : part.examples) ids.insert(e.id);
    std::vector<Annotation> out;
    for (const auto& a : all)
        if (ids.contains(a.example_id)) out.push_back(a);
    return out;
}

void write_json(const fs::path& path, const Json& j) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    out << j.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
}

std::string file_stem(std::string_view dataset_name) {
    std::string out;
    for (char c : dataset_name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const fs::path& out = cfg.out_dir;
    fs::create_directories(out);
    std::vector<fs::path> artifacts;
    Json stats;

    auto emit_file = [&](const fs::path& rel) {
        artifacts.push_back(rel);
        return out / rel;
    };

    // ingest / synth
    Dataset train;
    std::vector<Dataset> tests;
    if (cfg.synth_task) {
        SuiteConfig sc;
        sc.task = *cfg.synth_task;
        sc.seed = cfg.seed;
        sc.n = cfg.synth_n;
        sc.train_length = cfg.synth_train_length;
        sc.ood_lengths = cfg.synth_ood;
        SymbolicSuite suite = gen_ood_suite(sc);
        train = std::move(suite.train);
        tests.push_back(std::move(suite.test));
        for (auto& d : suite.ood) tests.push_back(std::move(d));
    } else {
        train = load_dataset(cfg.train_path, cfg.format);
        if (!cfg.test_path.empty()) tests.push_back(load_dataset(cfg.test_path, cfg.format));
    }
    if (train.examples.empty()) throw Error(Errc::EmptySplit, "training set is empty");
    const TaskKind task = train.examples.front().task;
    log::info("pipeline: " + std::to_string(train.size()) + " training examples (" + std::string(to_string(task)) + ")");
    write_examples(emit_file("data/" + file_stem(train.name) + ".jsonl"), train);
    Json test_stats = Json::object();
    for (const auto& d : tests) {
        write_examples(emit_file("data/" + file_stem(d.name) + ".jsonl"), d);
        test_stats[d.name] = d.size();
    }
    stats["ingest"] = {{"train", train.size()}, {"test", test_stats}};

    // split
    SplitPlan plan;
    if (cfg.val_frac.is_zero()) {
        IndexList all(train.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        plan.n = train.size();
        plan.plan = CarvePlan{all, {}, cfg.val_frac};
    } else {
        plan = carve_split(train.size(), cfg.val_frac);
    }
    write_json(emit_file("split.json"), to_json(plan));
    const Dataset train_part = train.select(plan.carve()->train, train.name);
    const Dataset val_part = train.select(plan.carve()->val, train.name + "-val");
    stats["split"] = {{"train", train_part.size()}, {"val", val_part.size()}};

    // annotate
    PromptSpec spec;
    spec.exemplars = exemplars_for(task, cfg.exemplars_path, cfg.seed);
    spec.conditioned = cfg.conditioned;
    spec.max_tokens = cfg.max_tokens;
    spec.temperature = cfg.temperature;
    spec.validate();
    TeacherConfig tc = cfg.teacher.http;
    TeacherClient client(tc, make_backend(cfg.teacher, &train));
    AnnotationRun run = annotate_dataset(client, spec, train);
    write_annotations(emit_file("annotations.jsonl"), run.annotations);
    Json annotate_stats = run.manifest(client, spec.conditioned);
    // cache traffic depends on cache warmth, not on the inputs
    annotate_stats.erase("cache_hits");
    annotate_stats.erase("network_calls");
    annotate_stats.erase("retries");
    stats["annotate"] = annotate_stats;

    if (cfg.ablation) {
        PromptSpec other = spec;
        other.conditioned = !spec.conditioned;
        AnnotationRun alt = annotate_dataset(client, other, train);
        write_annotations(emit_file(other.conditioned ? "annotations_conditioned.jsonl" : "annotations_unconditioned.jsonl"),
                          alt.annotations);
        FilterResult fr = filter_correct(alt.annotations, train);
        stats["ablation"] = {{"conditioned", other.conditioned}, {"retention", fr.stats.to_json()}};
    }

    // filter
    FilterResult filtered = filter_correct(run.annotations, train);
    write_annotations(emit_file("retained.jsonl"), filtered.retained);
    stats["filter"] = filtered.stats.to_json();

    // emit
    bool has_gold_cot = std::any_of(train.examples.begin(), train.examples.end(),
                                    [](const Example& e) { return e.gold_cot.has_value(); });
    std::vector<EmitMode> modes{EmitMode::Cot, EmitMode::AnswerOnly};
    if (has_gold_cot) modes.push_back(EmitMode::GoldCot);
    Json emit_stats = Json::object();
    std::vector<FinetuneRecord> cot_train;
    for (EmitMode mode : modes) {
        const std::string m(to_string(mode));
        for (const Dataset* part : {&train_part, &val_part}) {
            if (part->examples.empty()) continue;
            const std::string which = part == &train_part ? "train" : "val";
            std::vector<Annotation> anns = annotations_for(*part, run.annotations);
            auto records = emit_finetune(*part, mode == EmitMode::Cot ? &anns : nullptr, mode);
            write_finetune(emit_file("finetune/" + m + "_" + which + ".jsonl"), records);
            emit_stats[m + "_" + which] = records.size();
            if (mode == EmitMode::Cot && part == &train_part) cot_train = records;
        }
    }
    for (const auto& frac : cfg.subset_fractions) {
        IndexList idx = sample_subset(cot_train.size(), {frac, cfg.subset_seed});
        std::vector<FinetuneRecord> sub;
        sub.reserve(idx.size());
        for (auto i : idx) sub.push_back(cot_train[i]);
        const std::string pct = (frac * Rational(100)).render();
        write_finetune(emit_file("finetune/cot_train_subset_" + pct + "pct.jsonl"), sub);
        emit_stats["cot_train_subset_" + pct + "pct"] = sub.size();
    }
    stats["emit"] = emit_stats;

    std::sort(artifacts.begin(), artifacts.end());
    Json manifest;
    manifest["version"] = COTKD_VERSION;
    manifest["config"] = cfg.to_json();
    manifest["teacher_id"] = client.teacher_id();
    manifest["stats"] = stats;
    Json hashes = Json::object();
    for (const auto& rel : artifacts) hashes[rel.generic_string()] = sha256_file(out / rel);
    manifest["artifacts"] = hashes;
    write_json(out / "manifest.json", manifest);
    log::info("pipeline: wrote " + std::to_string(artifacts.size()) + " artifacts to " + out.string());
    return {manifest, artifacts};
}

}  // namespace cotkd
