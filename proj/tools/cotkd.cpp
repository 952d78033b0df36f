// cotkd: command-line entry point for the CoT distillation data factory.

#include "cotkd/calc.hpp"
#include "cotkd/evalkit.hpp"
#include "cotkd/hash.hpp"
#include "cotkd/log.hpp"
#include "cotkd/pipeline.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <unordered_set>

using namespace cotkd;
namespace fs = std::filesystem;

namespace {

struct TeacherFlags {
    std::string kind = "mock";
    std::string endpoint;
    std::string model = "teacher";
    std::string api_key_env = "TEACHER_API_KEY";
    int concurrency = 4;
    int retry_max = 5;
    std::string cache_dir;
    int timeout_s = 120;
    std::string mock_correct_rate = "1";
    std::string mock_error_model = "wrong_final_answer";
    std::uint64_t mock_seed = 0;
    bool mock_err_when_conditioned = true;

    void add(CLI::App* cmd) {
        cmd->add_option("--teacher", kind, "Teacher backend")->check(CLI::IsMember({"mock", "http"}));
        cmd->add_option("--endpoint", endpoint, "Completions endpoint URL (http teacher)");
        cmd->add_option("--model", model, "Model id sent to the endpoint");
        cmd->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
        cmd->add_option("--concurrency", concurrency, "Requests in flight")->check(CLI::PositiveNumber);
        cmd->add_option("--retry-max", retry_max, "Retries for 429/5xx/transport errors")->check(CLI::NonNegativeNumber);
        cmd->add_option("--cache-dir", cache_dir, "Response cache directory (empty: no cache)");
        cmd->add_option("--timeout", timeout_s, "Per-request timeout in seconds")->check(CLI::PositiveNumber);
        cmd->add_option("--mock-correct-rate", mock_correct_rate, "Mock teacher: probability of a correct CoT");
        cmd->add_option("--mock-error-model", mock_error_model, "Mock teacher: wrong_final_answer|skip_step|arithmetic_slip");
        cmd->add_option("--mock-seed", mock_seed, "Mock teacher: error seed");
        cmd->add_option("--mock-err-when-conditioned", mock_err_when_conditioned,
                        "Mock teacher: also err on answer-conditioned prompts");
    }

    TeacherChoice choice() const {
        TeacherChoice c;
        c.kind = kind;
        c.http.endpoint_url = endpoint;
        c.http.model_id = model;
        c.http.api_key_env = api_key_env;
        c.http.max_concurrency = concurrency;
        c.http.retry_max = retry_max;
        c.http.cache_dir = cache_dir;
        c.http.timeout = std::chrono::seconds(timeout_s);
        c.mock.correct_rate = Rational::parse(mock_correct_rate);
        if (c.mock.correct_rate < Rational(0) || c.mock.correct_rate > Rational(1))
            throw Error(Errc::InvalidArgument, "--mock-correct-rate must be in [0, 1]");
        c.mock.error_model = error_model_from_string(mock_error_model);
        c.mock.seed = mock_seed;
        c.mock.err_when_conditioned = mock_err_when_conditioned;
        return c;
    }
};

struct PromptFlags {
    std::string exemplars;
    bool unconditioned = false;
    int max_tokens = 320;
    std::string temperature = "0";
    std::vector<std::string> stop{"\nQ:"};

    void add(CLI::App* cmd) {
        cmd->add_option("--exemplars", exemplars, "Exemplar JSON-lines (default: shipped set for the task)");
        cmd->add_flag("--unconditioned", unconditioned, "Leave the answer hint out of the prompt");
        cmd->add_option("--max-tokens", max_tokens, "Completion length limit")->check(CLI::PositiveNumber);
        cmd->add_option("--temperature", temperature, "Sampling temperature");
    }

    PromptSpec spec(TaskKind task, std::uint64_t seed) const {
        PromptSpec s;
        s.exemplars = exemplars_for(task, exemplars, seed);
        s.conditioned = !unconditioned;
        s.max_tokens = max_tokens;
        s.temperature = Rational::parse(temperature);
        s.stop_sequences = stop;
        s.validate();
        return s;
    }
};

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string dump(const Json& j) { return j.dump(2, ' ', false, Json::error_handler_t::replace) + "\n"; }

Dataset load_any(const std::string& path, const std::string& format) {
    return load_dataset(path, input_format_from_string(format));
}

TaskKind task_of(const Dataset& ds) {
    if (ds.examples.empty()) throw Error(Errc::EmptySplit, "dataset " + ds.name + " is empty");
    return ds.examples.front().task;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"CoT knowledge-distillation data factory and evaluation harness", "cotkd"};
    app.set_version_flag("--version", std::string("cotkd ") + COTKD_VERSION);
    app.set_config("--config", "", "Run configuration file (TOML/INI); command-line flags win");
    app.require_subcommand(1);
    app.fallthrough();
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Only errors");

    // ingest
    std::string in_path, out_path, format = "gsm8k", data_format = "generic_jsonl";
    auto* ingest = app.add_subcommand("ingest", "Normalize a raw corpus into canonical JSON-lines");
    ingest->add_option("--in", in_path, "Input file")->required();
    ingest->add_option("--format", format, "gsm8k|yesno_jsonl|generic_jsonl");
    ingest->add_option("--out", out_path, "Output JSON-lines")->required();

    // synth
    std::string synth_task = "coinflip", names_path, words_path, templates_path, out_dir;
    int train_len = 2;
    std::vector<int> ood{3, 4};
    std::size_t n = 1000;
    std::uint64_t seed = 0;
    auto* synth = app.add_subcommand("synth", "Generate a symbolic train/test/OOD suite");
    synth->add_option("--task", synth_task, "coinflip|last_letter");
    synth->add_option("--train-len", train_len, "Training length")->check(CLI::PositiveNumber);
    synth->add_option("--ood", ood, "OOD lengths")->delimiter(',');
    synth->add_option("--n", n, "Examples per split")->check(CLI::PositiveNumber);
    synth->add_option("--seed", seed, "Seed");
    synth->add_option("--names", names_path, "Name pool file (one per line)");
    synth->add_option("--words", words_path, "Word pool file (one per line)");
    synth->add_option("--templates", templates_path, "Template file");
    synth->add_option("--out-dir", out_dir, "Output directory")->required();

    // annotate
    std::string data_path, ann_path, manifest_path;
    TeacherFlags teacher_flags;
    PromptFlags prompt_flags;
    auto* annotate = app.add_subcommand("annotate", "Ask the teacher for a CoT per example");
    annotate->add_option("--data", data_path, "Canonical dataset")->required();
    annotate->add_option("--format", data_format, "Dataset format (default: canonical JSON-lines)");
    annotate->add_option("--out", out_path, "Annotations JSON-lines")->required();
    annotate->add_option("--manifest", manifest_path, "Run manifest JSON");
    annotate->add_option("--seed", seed, "Seed for generated symbolic exemplars");
    teacher_flags.add(annotate);
    prompt_flags.add(annotate);

    // filter
    std::string stats_path;
    auto* filter = app.add_subcommand("filter", "Keep annotations whose final answer is correct");
    filter->add_option("--data", data_path, "Canonical dataset")->required();
    filter->add_option("--format", data_format, "Dataset format (default: canonical JSON-lines)");
    filter->add_option("--annotations", ann_path, "Annotations JSON-lines")->required();
    filter->add_option("--out", out_path, "Retained annotations")->required();
    filter->add_option("--stats", stats_path, "Retention stats JSON (default: stdout)");

    // split
    std::string split_kind = "holdout", train_frac = "0.8", val_frac = "0.1", part, materialize;
    std::size_t k = 5, split_n = 0;
    auto* split = app.add_subcommand("split", "Write a deterministic split manifest");
    split->add_option("--data", data_path, "Dataset (sets n)");
    split->add_option("--format", data_format, "Dataset format (default: canonical JSON-lines)");
    split->add_option("--n", split_n, "Number of examples when no --data is given");
    split->add_option("--kind", split_kind, "holdout|kfold|carve")->check(CLI::IsMember({"holdout", "kfold", "carve"}));
    split->add_option("--train-frac", train_frac, "Holdout train fraction");
    split->add_option("--val-frac", val_frac, "Holdout/carve validation fraction");
    split->add_option("--k", k, "Folds");
    split->add_option("--out", out_path, "Split manifest JSON")->required();
    split->add_option("--materialize", materialize, "Also write each part of --data into this directory");

    // subset
    std::string fraction = "1";
    auto* subset = app.add_subcommand("subset", "Seeded random subset of a JSON-lines file");
    subset->add_option("--in", in_path, "Input JSON-lines")->required();
    subset->add_option("--fraction", fraction, "Fraction in (0, 1]")->required();
    subset->add_option("--seed", seed, "Seed");
    subset->add_option("--out", out_path, "Output (default: stdout)");

    // emit
    std::string emit_mode = "cot", split_path;
    auto* emit = app.add_subcommand("emit", "Write teacher-forcing finetune records");
    emit->add_option("--data", data_path, "Canonical dataset")->required();
    emit->add_option("--format", data_format, "Dataset format (default: canonical JSON-lines)");
    emit->add_option("--annotations", ann_path, "Annotations (cot mode)");
    emit->add_option("--mode", emit_mode, "cot|gold_cot|answer_only");
    emit->add_option("--split", split_path, "Split manifest to take a part from");
    emit->add_option("--part", part, "train|val|test, or train-<i>/test-<i> for k-fold");
    emit->add_option("--out", out_path, "Finetune JSON-lines")->required();

    // grade
    std::string pred_path, grade_mode = "both", report_format = "markdown", report_out;
    auto* grade_cmd = app.add_subcommand("grade", "Score predictions against a dataset");
    grade_cmd->add_option("--pred", pred_path, "Predictions JSON-lines {id, completion}")->required();
    grade_cmd->add_option("--data", data_path, "Canonical dataset")->required();
    grade_cmd->add_option("--format", data_format, "Dataset format (default: canonical JSON-lines)");
    grade_cmd->add_option("--mode", grade_mode, "plain|with_calc|both");
    grade_cmd->add_option("--retention", stats_path, "Retention stats JSON to carry into the report");
    grade_cmd->add_option("--out", out_path, "GradeReport JSON");
    grade_cmd->add_option("--report-format", report_format, "Format printed to stdout: markdown|csv|json");

    // report
    std::vector<std::string> report_in;
    auto* report = app.add_subcommand("report", "Render grade reports as tables");
    report->add_option("--in", report_in, "GradeReport JSON files")->required();
    report->add_option("--format", report_format, "markdown|csv|json");
    report->add_option("--out", report_out, "Output (default: stdout)");
    bool no_reference = false;
    report->add_flag("--no-reference", no_reference, "Omit published reference rows");

    // pipeline
    RunConfig rc;
    std::string rc_out = "run", rc_train, rc_test, rc_format = "gsm8k", rc_synth, rc_val = "0";
    std::vector<std::string> rc_subsets;
    std::uint64_t rc_subset_seed = 0;
    bool rc_ablation = false;
    std::size_t rc_n = 1000;
    int rc_train_len = 2;
    std::vector<int> rc_ood{3, 4};
    TeacherFlags rc_teacher;
    PromptFlags rc_prompt;
    auto* pipeline = app.add_subcommand("pipeline", "Run every stage and write manifest.json");
    pipeline->add_option("--out-dir", rc_out, "Output directory");
    pipeline->add_option("--train", rc_train, "Training corpus");
    pipeline->add_option("--test", rc_test, "Test corpus");
    pipeline->add_option("--format", rc_format, "Corpus format");
    pipeline->add_option("--synth", rc_synth, "Generate a symbolic suite instead: coinflip|last_letter");
    pipeline->add_option("--n", rc_n, "Synthetic examples per split");
    pipeline->add_option("--train-len", rc_train_len, "Synthetic training length");
    pipeline->add_option("--ood", rc_ood, "Synthetic OOD lengths")->delimiter(',');
    pipeline->add_option("--seed", seed, "Seed for synthesis and generated exemplars");
    pipeline->add_option("--val-frac", rc_val, "Validation carved from the tail of train");
    pipeline->add_option("--subset", rc_subsets, "Also emit CoT subsets at these fractions")->delimiter(',');
    pipeline->add_option("--subset-seed", rc_subset_seed, "Subset seed");
    pipeline->add_flag("--ablation", rc_ablation, "Also annotate with the opposite conditioning");
    rc_teacher.add(pipeline);
    rc_prompt.add(pipeline);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "cotkd: error: usage: " << e.get_name() << ": " << e.what() << "\n";
        return 2;
    }
    log::set_level(verbose ? log::Level::Debug : quiet ? log::Level::Error : log::Level::Info);

    if (*ingest) {
        Dataset ds = load_any(in_path, format);
        write_examples(out_path, ds);
        log::info("ingest: " + std::to_string(ds.size()) + " examples -> " + out_path);
    } else if (*synth) {
        SuiteConfig sc;
        sc.task = symbolic_task_from_string(synth_task);
        sc.seed = seed;
        sc.n = n;
        sc.train_length = train_len;
        sc.ood_lengths = ood;
        if (!names_path.empty()) sc.name_pool = read_lines(names_path);
        if (!words_path.empty()) sc.word_pool = read_lines(words_path);
        if (!templates_path.empty()) sc.templates = std::make_shared<Templates>(Templates::parse(read_text(templates_path)));
        SymbolicSuite suite = gen_ood_suite(sc);
        fs::path dir(out_dir);
        const std::string prefix = std::string(to_string(sc.task)) + "-";
        write_examples(dir / (prefix + "train.jsonl"), suite.train);
        write_examples(dir / (prefix + "test-L" + std::to_string(train_len) + ".jsonl"), suite.test);
        for (std::size_t i = 0; i < suite.ood.size(); ++i)
            write_examples(dir / (prefix + "ood" + std::to_string(ood[i]) + ".jsonl"), suite.ood[i]);
        log::info("synth: wrote " + std::to_string(2 + suite.ood.size()) + " datasets to " + out_dir);
    } else if (*annotate) {
        Dataset ds = load_any(data_path, data_format);
        PromptSpec spec = prompt_flags.spec(task_of(ds), seed);
        TeacherChoice tc = teacher_flags.choice();
        TeacherClient client(tc.http, make_backend(tc, &ds));
        AnnotationRun run = annotate_dataset(client, spec, ds);
        write_annotations(out_path, run.annotations);
        Json m = run.manifest(client, spec.conditioned);
        m["dataset"] = ds.name;
        m["annotations"] = out_path;
        m["annotations_sha256"] = sha256_file(out_path);
        if (!manifest_path.empty()) write_text(manifest_path, dump(m));
        log::info("annotate: " + std::to_string(run.correct) + "/" + std::to_string(ds.size()) + " correct, " +
                  std::to_string(run.failures.size()) + " failed");
    } else if (*filter) {
        Dataset ds = load_any(data_path, data_format);
        auto anns = read_annotations(ann_path, task_of(ds));
        FilterResult fr = filter_correct(anns, ds);
        write_annotations(out_path, fr.retained);
        write_text(stats_path, dump(fr.stats.to_json()));
    } else if (*split) {
        std::optional<Dataset> ds;
        if (!data_path.empty()) {
            ds = load_any(data_path, data_format);
            split_n = ds->size();
        }
        SplitPlan plan;
        if (split_kind == "holdout") plan = holdout_split(split_n, Rational::parse(train_frac), Rational::parse(val_frac));
        else if (split_kind == "kfold") plan = kfold_split(split_n, k);
        else plan = carve_split(split_n, Rational::parse(val_frac));
        write_text(out_path, dump(to_json(plan)));
        if (!materialize.empty()) {
            if (!ds) throw Error(Errc::InvalidArgument, "--materialize needs --data");
            fs::path dir(materialize);
            auto put = [&](const std::string& label, const IndexList& idx) {
                write_examples(dir / (label + ".jsonl"), ds->select(idx, ds->name + "-" + label));
            };
            if (auto* h = plan.holdout()) {
                put("train", h->train);
                put("val", h->val);
                put("test", h->test);
            } else if (auto* kf = plan.kfold()) {
                for (std::size_t i = 0; i < kf->k; ++i) {
                    put("train-" + std::to_string(i), kf->train(i));
                    put("test-" + std::to_string(i), kf->test(i));
                }
            } else if (auto* c = plan.carve()) {
                put("train", c->train);
                put("val", c->val);
            }
        }
    } else if (*subset) {
        auto lines = read_lines(in_path);
        IndexList idx = sample_subset(lines.size(), {Rational::parse(fraction), seed});
        std::vector<std::string> picked;
        picked.reserve(idx.size());
        for (auto i : idx) picked.push_back(lines[i]);
        if (out_path.empty()) {
            for (const auto& l : picked) std::cout << l << '\n';
        } else {
            write_lines(out_path, picked);
        }
        log::info("subset: " + std::to_string(picked.size()) + " of " + std::to_string(lines.size()) + " lines");
    } else if (*emit) {
        Dataset ds = load_any(data_path, data_format);
        if (!split_path.empty()) {
            if (part.empty()) throw Error(Errc::InvalidArgument, "--split needs --part");
            SplitPlan plan = split_from_json(Json::parse(read_text(split_path)));
            if (plan.n != ds.size())
                throw Error(Errc::IdMismatch, "split manifest covers " + std::to_string(plan.n) + " examples, dataset has " +
                                                  std::to_string(ds.size()));
            IndexList idx;
            if (auto* h = plan.holdout()) {
                if (part == "train") idx = h->train;
                else if (part == "val") idx = h->val;
                else if (part == "test") idx = h->test;
                else throw Error(Errc::InvalidArgument, "holdout parts are train, val, test");
            } else if (auto* kf = plan.kfold()) {
                auto dash = part.find('-');
                if (dash == std::string::npos) throw Error(Errc::InvalidArgument, "k-fold parts are train-<i>, test-<i>");
                std::size_t fold = std::stoul(part.substr(dash + 1));
                if (fold >= kf->k) throw Error(Errc::InvalidArgument, "fold out of range");
                idx = part.starts_with("train") ? kf->train(fold) : kf->test(fold);
            } else if (auto* c = plan.carve()) {
                idx = part == "val" ? c->val : c->train;
            }
            ds = ds.select(idx, ds.name + "-" + part);
        }
        EmitMode mode = emit_mode_from_string(emit_mode);
        std::optional<std::vector<Annotation>> anns;
        if (!ann_path.empty()) {
            std::vector<Annotation> all = read_annotations(ann_path, task_of(ds));
            std::unordered_set<std::string> ids;
            for (const auto& e : ds.examples) ids.insert(e.id);
            anns.emplace();
            for (auto& a : all)
                if (split_path.empty() || ids.contains(a.example_id)) anns->push_back(std::move(a));
        }
        auto records = emit_finetune(ds, anns ? &*anns : nullptr, mode);
        write_finetune(out_path, records);
        log::info("emit: " + std::to_string(records.size()) + " records -> " + out_path);
    } else if (*grade_cmd) {
        Dataset ds = load_any(data_path, data_format);
        GradeReport r = grade(load_predictions(pred_path), ds, grade_mode_from_string(grade_mode));
        if (!stats_path.empty()) {
            Json s = Json::parse(read_text(stats_path));
            RetentionStats rs;
            rs.total = s.at("total").get<std::size_t>();
            rs.retained = s.at("retained").get<std::size_t>();
            rs.fallback_used = s.value("fallback_used", std::size_t{0});
            r.retention = rs;
        }
        if (!out_path.empty()) write_text(out_path, dump(to_json(r)));
        std::cout << render_report({r}, report_format_from_string(report_format));
    } else if (*report) {
        std::vector<GradeReport> reports;
        for (const auto& p : report_in)
            for (auto& r : parse_report_json(read_text(p))) reports.push_back(std::move(r));
        ReportFormat f = report_format_from_string(report_format);
        write_text(report_out, no_reference ? render_report(reports, f, {}) : render_report(reports, f));
    } else if (*pipeline) {
        rc.out_dir = rc_out;
        rc.train_path = rc_train;
        rc.test_path = rc_test;
        rc.format = input_format_from_string(rc_format);
        if (!rc_synth.empty()) rc.synth_task = symbolic_task_from_string(rc_synth);
        rc.synth_n = rc_n;
        rc.synth_train_length = rc_train_len;
        rc.synth_ood = rc_ood;
        rc.seed = seed;
        rc.exemplars_path = rc_prompt.exemplars;
        rc.conditioned = !rc_prompt.unconditioned;
        rc.ablation = rc_ablation;
        rc.max_tokens = rc_prompt.max_tokens;
        rc.temperature = Rational::parse(rc_prompt.temperature);
        rc.teacher = rc_teacher.choice();
        rc.val_frac = Rational::parse(rc_val);
        for (const auto& s : rc_subsets) rc.subset_fractions.push_back(Rational::parse(s));
        rc.subset_seed = rc_subset_seed;
        PipelineResult res = run_pipeline(rc);
        std::cout << dump(res.manifest["stats"]);
    }
    return 0;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "cotkd: error: " << category_name(e.category()) << ": " << errc_name(e.code()) << ": " << e.what()
                  << "\n";
        return exit_code(e.category());
    } catch (const Json::exception& e) {
        std::cerr << "cotkd: error: input: ParseError: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "cotkd: error: input: IoError: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "cotkd: error: validation: InvalidArgument: " << e.what() << "\n";
        return 5;
    }
}
