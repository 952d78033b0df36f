#include "cotkd/corpus.hpp"

#include "cotkd/log.hpp"
#include "cotkd/rng.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace cotkd {

namespace fs = std::filesystem;

namespace {

[[noreturn]] void parse_error(std::size_t line_no, const std::string& reason) {
    throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + reason);
}

std::string dump_line(const Json& j) {
    return j.dump(-1, ' ', false, Json::error_handler_t::replace);
}

// Answers may arrive as JSON strings, numbers or booleans.
std::string scalar_text(const Json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_boolean()) return j.get<bool>() ? "yes" : "no";
    if (j.is_number()) return j.dump();
    throw Error(Errc::ParseError, "expected a scalar, got " + j.dump());
}

const Json& require(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) throw Error(Errc::ParseError, std::string("missing field '") + key + "'");
    return *it;
}

std::string require_string(const Json& j, const char* key) {
    const Json& v = require(j, key);
    if (!v.is_string()) throw Error(Errc::ParseError, std::string("field '") + key + "' is not a string");
    return v.get<std::string>();
}

Example parse_gsm8k(const Json& j, const std::string& default_id) {
    Example e;
    e.task = TaskKind::Arithmetic;
    e.id = j.contains("id") ? scalar_text(j["id"]) : default_id;
    e.question = require_string(j, "question");
    std::string answer = require_string(j, "answer");
    auto marker = answer.rfind("####");
    if (marker == std::string::npos) throw Error(Errc::ParseError, "answer has no '####' marker");
    e.gold_answer = AnswerValue::number(normalize_number(std::string_view(answer).substr(marker + 4)));
    e.gold_cot = std::string(trim(std::string_view(answer).substr(0, marker)));
    return e;
}

Example parse_yesno(const Json& j, const std::string& default_id) {
    Example e;
    e.task = TaskKind::YesNo;
    if (j.contains("id")) e.id = scalar_text(j["id"]);
    else if (j.contains("qid")) e.id = scalar_text(j["qid"]);
    else e.id = default_id;
    e.question = require_string(j, "question");
    e.gold_answer = AnswerValue::parse_for_task(scalar_text(require(j, "answer")), TaskKind::YesNo);
    if (auto it = j.find("facts"); it != j.end() && !it->is_null()) {
        std::string cot;
        if (it->is_array()) {
            for (const auto& f : *it) {
                if (!cot.empty()) cot += ' ';
                cot += std::string(trim(f.get<std::string>()));
            }
        } else {
            cot = it->get<std::string>();
        }
        if (!cot.empty()) e.gold_cot = cot;
    } else if (auto ex = j.find("explanation"); ex != j.end() && ex->is_string()) {
        e.gold_cot = ex->get<std::string>();
    }
    return e;
}

void check_example(const Example& e) {
    if (e.id.empty()) throw Error(Errc::ParseError, "empty id");
    if (trim(e.question).empty()) throw Error(Errc::ParseError, "empty question");
    if (e.task == TaskKind::LastLetter || e.task == TaskKind::Coinflip) {
        auto len = e.length();
        if (!len || *len < 1) throw Error(Errc::ParseError, "symbolic example needs integer meta.length >= 1");
    }
}

Json indices_json(const IndexList& idx) { return Json(idx); }

IndexList indices_from(const Json& j) { return j.get<IndexList>(); }

}  // namespace

std::optional<std::size_t> Dataset::find(std::string_view id) const {
    for (std::size_t i = 0; i < examples.size(); ++i)
        if (examples[i].id == id) return i;
    return std::nullopt;
}

Dataset Dataset::select(const std::vector<std::size_t>& indices, std::string new_name) const {
    Dataset out{std::move(new_name), {}, source_path};
    out.examples.reserve(indices.size());
    for (auto i : indices) out.examples.push_back(examples.at(i));
    return out;
}

InputFormat input_format_from_string(std::string_view s) {
    std::string k = to_lower(s);
    if (k == "gsm8k") return InputFormat::Gsm8k;
    if (k == "yesno_jsonl" || k == "yesno") return InputFormat::YesNoJsonl;
    if (k == "generic_jsonl" || k == "generic") return InputFormat::GenericJsonl;
    throw Error(Errc::InvalidArgument, "unknown input format '" + std::string(s) + "'");
}

std::string_view to_string(InputFormat f) {
    switch (f) {
        case InputFormat::Gsm8k: return "gsm8k";
        case InputFormat::YesNoJsonl: return "yesno_jsonl";
        case InputFormat::GenericJsonl: return "generic_jsonl";
    }
    return "gsm8k";
}

// ---------------------------------------------------------------------------
// JSON mapping

Json to_json(const Example& e) {
    Json j;
    j["id"] = e.id;
    j["question"] = e.question;
    j["answer"] = e.gold_answer.serialize();
    if (e.gold_cot) j["cot"] = *e.gold_cot;
    j["task"] = std::string(to_string(e.task));
    if (!e.meta.empty()) {
        Json meta = Json::object();
        for (const auto& [k, v] : e.meta) meta[k] = v;
        j["meta"] = meta;
    }
    return j;
}

Example example_from_json(const Json& j) {
    Example e;
    e.id = scalar_text(require(j, "id"));
    e.question = require_string(j, "question");
    e.task = task_from_string(require_string(j, "task"));
    e.gold_answer = AnswerValue::parse_for_task(scalar_text(require(j, "answer")), e.task);
    if (auto it = j.find("cot"); it != j.end() && it->is_string()) e.gold_cot = it->get<std::string>();
    if (auto it = j.find("meta"); it != j.end() && it->is_object()) {
        for (const auto& [k, v] : it->items()) e.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    check_example(e);
    return e;
}

Json to_json(const Annotation& a) {
    Json j;
    j["example_id"] = a.example_id;
    j["cot"] = a.cot;
    j["extracted"] = a.extracted ? Json(a.extracted->serialize()) : Json(nullptr);
    j["correct"] = a.correct;
    j["teacher_id"] = a.teacher_id;
    j["prompt_hash"] = a.prompt_hash;
    j["conditioned"] = a.conditioned;
    return j;
}

Annotation annotation_from_json(const Json& j, TaskKind task) {
    Annotation a;
    a.example_id = scalar_text(require(j, "example_id"));
    a.cot = j.value("cot", std::string{});
    if (auto it = j.find("extracted"); it != j.end() && !it->is_null())
        a.extracted = AnswerValue::parse_for_task(scalar_text(*it), task);
    a.correct = j.value("correct", false);
    a.teacher_id = j.value("teacher_id", std::string{});
    a.prompt_hash = j.value("prompt_hash", std::string{});
    a.conditioned = j.value("conditioned", false);
    return a;
}

Json to_json(const FinetuneRecord& r) {
    Json j;
    j["id"] = r.example_id;
    j["input"] = r.input;
    j["target"] = r.target;
    return j;
}

FinetuneRecord finetune_from_json(const Json& j) {
    return FinetuneRecord{scalar_text(require(j, "id")), require_string(j, "input"), require_string(j, "target")};
}

// ---------------------------------------------------------------------------
// Files

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!trim(line).empty()) out.push_back(line);
    }
    return out;
}

void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::Io, "cannot write " + path.string());
    for (const auto& l : lines) out << l << '\n';
}

Dataset parse_dataset(std::istream& in, InputFormat format, std::string name) {
    Dataset ds;
    ds.name = std::move(name);
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        Example e;
        try {
            Json j = Json::parse(line);
            if (!j.is_object()) parse_error(line_no, "not a JSON object");
            std::string default_id = ds.name + "-" + std::to_string(ds.examples.size());
            switch (format) {
                case InputFormat::Gsm8k: e = parse_gsm8k(j, default_id); break;
                case InputFormat::YesNoJsonl: e = parse_yesno(j, default_id); break;
                case InputFormat::GenericJsonl: e = example_from_json(j); break;
            }
            check_example(e);
        } catch (const Json::exception& ex) {
            parse_error(line_no, ex.what());
        } catch (const Error& ex) {
            if (ex.code() == Errc::ParseError && std::string_view(ex.what()).starts_with("line ")) throw;
            parse_error(line_no, ex.what());
        }
        if (!seen.insert(e.id).second)
            throw Error(Errc::DuplicateId, "line " + std::to_string(line_no) + ": duplicate id '" + e.id + "'");
        ds.examples.push_back(std::move(e));
    }
    return ds;
}

Dataset load_dataset(const fs::path& path, InputFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    Dataset ds = parse_dataset(in, format, path.stem().string());
    ds.source_path = path.string();
    return ds;
}

void write_examples(const fs::path& path, const Dataset& ds) {
    std::vector<std::string> lines;
    lines.reserve(ds.size());
    for (const auto& e : ds.examples) lines.push_back(dump_line(to_json(e)));
    write_lines(path, lines);
}

void write_annotations(const fs::path& path, const std::vector<Annotation>& anns) {
    std::vector<std::string> lines;
    lines.reserve(anns.size());
    for (const auto& a : anns) lines.push_back(dump_line(to_json(a)));
    write_lines(path, lines);
}

std::vector<Annotation> read_annotations(const fs::path& path, TaskKind task) {
    std::vector<Annotation> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        try {
            out.push_back(annotation_from_json(Json::parse(line), task));
        } catch (const std::exception& e) {
            parse_error(line_no, e.what());
        }
    }
    return out;
}

void write_finetune(const fs::path& path, const std::vector<FinetuneRecord>& records) {
    std::vector<std::string> lines;
    lines.reserve(records.size());
    for (const auto& r : records) lines.push_back(dump_line(to_json(r)));
    write_lines(path, lines);
}

std::vector<FinetuneRecord> read_finetune(const fs::path& path) {
    std::vector<FinetuneRecord> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        try {
            out.push_back(finetune_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            parse_error(line_no, e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splits

namespace {

std::size_t floor_size(const Rational& frac, std::size_t n) {
    Rational scaled = frac * Rational(static_cast<std::int64_t>(n));
    return static_cast<std::size_t>(scaled.floor());
}

IndexList range(std::size_t begin, std::size_t end) {
    IndexList out(end - begin);
    std::iota(out.begin(), out.end(), begin);
    return out;
}

}  // namespace

IndexList KFoldPlan::train(std::size_t fold) const {
    IndexList out;
    for (std::size_t f = 0; f < folds.size(); ++f)
        if (f != fold) out.insert(out.end(), folds[f].begin(), folds[f].end());
    std::sort(out.begin(), out.end());
    return out;
}

SplitPlan holdout_split(std::size_t n, const Rational& train_frac, const Rational& val_frac) {
    if (train_frac <= Rational(0) || val_frac <= Rational(0) || train_frac + val_frac >= Rational(1))
        throw Error(Errc::InvalidArgument, "holdout fractions must be positive and sum to less than 1");
    std::size_t n_train = floor_size(train_frac, n);
    std::size_t n_val = floor_size(val_frac, n);
    std::size_t n_test = n - n_train - n_val;
    if (n >= 3 && (n_train == 0 || n_val == 0 || n_test == 0))
        throw Error(Errc::EmptySplit, "holdout over n=" + std::to_string(n) + " gives sizes " +
                                          std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                                          std::to_string(n_test));
    HoldoutPlan h{range(0, n_train), range(n_train, n_train + n_val), range(n_train + n_val, n), train_frac,
                  val_frac};
    return SplitPlan{n, std::move(h)};
}

SplitPlan kfold_split(std::size_t n, std::size_t k) {
    if (k < 2 || k > n)
        throw Error(Errc::InvalidK, "k=" + std::to_string(k) + " must satisfy 2 <= k <= n=" + std::to_string(n));
    KFoldPlan p;
    p.k = k;
    std::size_t base = n / k, extra = n % k, start = 0;
    for (std::size_t f = 0; f < k; ++f) {
        std::size_t len = base + (f < extra ? 1 : 0);
        p.folds.push_back(range(start, start + len));
        start += len;
    }
    return SplitPlan{n, std::move(p)};
}

Carved carve_validation(const IndexList& train, const Rational& frac) {
    if (frac <= Rational(0) || frac >= Rational(1))
        throw Error(Errc::InvalidArgument, "validation fraction must be in (0, 1)");
    std::size_t n_val = floor_size(frac, train.size());
    if (n_val == 0)
        log::warn("validation carve-out of " + frac.render() + " over " + std::to_string(train.size()) +
                  " training examples is empty");
    auto cut = train.end() - static_cast<std::ptrdiff_t>(n_val);
    return Carved{IndexList(train.begin(), cut), IndexList(cut, train.end())};
}

SplitPlan carve_split(std::size_t n, const Rational& frac) {
    Carved c = carve_validation(range(0, n), frac);
    return SplitPlan{n, CarvePlan{std::move(c.train), std::move(c.val), frac}};
}

Json to_json(const SplitPlan& plan) {
    Json j;
    if (const auto* h = plan.holdout()) {
        j["variant"] = "holdout";
        j["params"] = {{"n", plan.n}, {"train_frac", h->train_frac.exact_string()},
                       {"val_frac", h->val_frac.exact_string()}};
        j["indices"] = {{"train", indices_json(h->train)}, {"val", indices_json(h->val)},
                        {"test", indices_json(h->test)}};
    } else if (const auto* k = plan.kfold()) {
        j["variant"] = "kfold";
        j["params"] = {{"n", plan.n}, {"k", k->k}};
        Json folds = Json::array();
        for (const auto& f : k->folds) folds.push_back(indices_json(f));
        j["indices"] = {{"folds", folds}};
    } else {
        const auto* c = plan.carve();
        j["variant"] = "carve";
        j["params"] = {{"n", plan.n}, {"frac", c->frac.exact_string()}};
        j["indices"] = {{"train", indices_json(c->train)}, {"val", indices_json(c->val)}};
    }
    return j;
}

SplitPlan split_from_json(const Json& j) {
    try {
        std::string variant = j.at("variant").get<std::string>();
        const Json& params = j.at("params");
        const Json& idx = j.at("indices");
        std::size_t n = params.at("n").get<std::size_t>();
        if (variant == "holdout") {
            return SplitPlan{n, HoldoutPlan{indices_from(idx.at("train")), indices_from(idx.at("val")),
                                            indices_from(idx.at("test")),
                                            Rational::parse(params.at("train_frac").get<std::string>()),
                                            Rational::parse(params.at("val_frac").get<std::string>())}};
        }
        if (variant == "kfold") {
            KFoldPlan p;
            p.k = params.at("k").get<std::size_t>();
            for (const auto& f : idx.at("folds")) p.folds.push_back(indices_from(f));
            return SplitPlan{n, std::move(p)};
        }
        if (variant == "carve") {
            return SplitPlan{n, CarvePlan{indices_from(idx.at("train")), indices_from(idx.at("val")),
                                          Rational::parse(params.at("frac").get<std::string>())}};
        }
        throw Error(Errc::ParseError, "unknown split variant '" + variant + "'");
    } catch (const Json::exception& e) {
        throw Error(Errc::ParseError, std::string("split manifest: ") + e.what());
    }
}

IndexList sample_subset(std::size_t n, const SubsetSpec& spec) {
    if (spec.fraction <= Rational(0) || spec.fraction > Rational(1))
        throw Error(Errc::InvalidArgument, "subset fraction must be in (0, 1]");
    Rng rng(spec.seed);
    IndexList out = sample_without_replacement(rng, n, floor_size(spec.fraction, n));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Emission

EmitMode emit_mode_from_string(std::string_view s) {
    std::string k = to_lower(s);
    if (k == "cot") return EmitMode::Cot;
    if (k == "gold_cot") return EmitMode::GoldCot;
    if (k == "answer_only") return EmitMode::AnswerOnly;
    throw Error(Errc::InvalidArgument, "unknown emit mode '" + std::string(s) + "'");
}

std::string_view to_string(EmitMode m) {
    switch (m) {
        case EmitMode::Cot: return "cot";
        case EmitMode::GoldCot: return "gold_cot";
        case EmitMode::AnswerOnly: return "answer_only";
    }
    return "cot";
}

std::vector<FinetuneRecord> emit_finetune(const Dataset& dataset, const std::vector<Annotation>* annotations,
                                          EmitMode mode) {
    std::vector<FinetuneRecord> out;
    if (mode == EmitMode::Cot) {
        if (!annotations) throw Error(Errc::MissingAnnotations, "cot mode needs teacher annotations");
        std::unordered_map<std::string_view, const Annotation*> by_id;
        std::unordered_set<std::string_view> ids;
        for (const auto& e : dataset.examples) ids.insert(e.id);
        for (const auto& a : *annotations) {
            if (!ids.contains(a.example_id))
                throw Error(Errc::IdMismatch, "annotation for unknown example '" + a.example_id + "'");
            if (a.correct) by_id[a.example_id] = &a;
        }
        for (const auto& e : dataset.examples) {
            auto it = by_id.find(e.id);
            if (it == by_id.end()) continue;
            out.push_back({e.id, e.question, with_answer_sentence(it->second->cot, e.gold_answer)});
        }
        return out;
    }
    std::size_t skipped = 0;
    for (const auto& e : dataset.examples) {
        if (mode == EmitMode::AnswerOnly) {
            out.push_back({e.id, e.question, answer_sentence(e.gold_answer)});
        } else if (e.gold_cot && !trim(*e.gold_cot).empty()) {
            out.push_back({e.id, e.question, with_answer_sentence(*e.gold_cot, e.gold_answer)});
        } else {
            ++skipped;
        }
    }
    if (skipped > 0) log::warn(std::to_string(skipped) + " examples without gold CoT skipped");
    return out;
}

}  // namespace cotkd
