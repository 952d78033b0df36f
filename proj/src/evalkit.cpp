#include "cotkd/evalkit.hpp"

#include "cotkd/assets.hpp"
#include "cotkd/calc.hpp"
#include "cotkd/log.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace cotkd {

namespace fs = std::filesystem;

std::vector<Prediction> parse_predictions(std::istream& in) {
    std::vector<Prediction> out;
    std::unordered_map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        Prediction p;
        try {
            Json j = Json::parse(line);
            p.example_id = j.at("id").get<std::string>();
            p.completion = j.at("completion").get<std::string>();
        } catch (const Json::exception& e) {
            throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (auto [it, fresh] = seen.emplace(p.example_id, line_no); !fresh)
            throw Error(Errc::DuplicatePrediction, "line " + std::to_string(line_no) + ": id '" + p.example_id +
                                                       "' already predicted on line " + std::to_string(it->second));
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> load_predictions(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::Io, "cannot open " + path.string());
    return parse_predictions(in);
}

void write_predictions(const fs::path& path, const std::vector<Prediction>& preds) {
    std::vector<std::string> lines;
    lines.reserve(preds.size());
    for (const auto& p : preds) {
        Json j;
        j["id"] = p.example_id;
        j["completion"] = p.completion;
        lines.push_back(j.dump(-1, ' ', false, Json::error_handler_t::replace));
    }
    write_lines(path, lines);
}

GradeMode grade_mode_from_string(std::string_view s) {
    if (s == "plain") return GradeMode::Plain;
    if (s == "with_calc" || s == "calc") return GradeMode::WithCalc;
    if (s == "both") return GradeMode::Both;
    throw Error(Errc::InvalidArgument, "unknown grade mode '" + std::string(s) + "'");
}

std::string_view to_string(GradeMode m) {
    switch (m) {
        case GradeMode::Plain: return "plain";
        case GradeMode::WithCalc: return "with_calc";
        case GradeMode::Both: return "both";
    }
    return "plain";
}

// ---------------------------------------------------------------------------
// Grading

GradeReport grade(const std::vector<Prediction>& predictions, const Dataset& dataset, GradeMode mode) {
    std::unordered_map<std::string_view, std::size_t> index_of;
    for (std::size_t i = 0; i < dataset.size(); ++i) index_of.emplace(dataset.examples[i].id, i);
    std::vector<const Prediction*> by_index(dataset.size(), nullptr);
    for (const auto& p : predictions) {
        auto it = index_of.find(p.example_id);
        if (it == index_of.end()) throw Error(Errc::UnknownId, "prediction for unknown id '" + p.example_id + "'");
        if (by_index[it->second]) throw Error(Errc::DuplicatePrediction, "id '" + p.example_id + "' predicted twice");
        by_index[it->second] = &p;
    }

    GradeReport r;
    r.dataset_name = dataset.name;
    r.mode = mode;
    r.n_total = dataset.size();
    if (!dataset.examples.empty()) r.task = dataset.examples.front().task;
    const bool calc = mode != GradeMode::Plain && r.task == TaskKind::Arithmetic;

    struct Tally {
        std::size_t total = 0, missing = 0, correct = 0, correct_calc = 0;
    };
    Tally all;
    std::map<int, Tally> by_length;
    bool any_length = false;

    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Example& e = dataset.examples[i];
        bool ok = false, ok_calc = false;
        const Prediction* p = by_index[i];
        if (p) {
            Extraction ex = extract_answer_detailed(p->completion, e.task);
            if (ex.used_fallback && ex.value) ++r.diagnostics.extraction_fallbacks;
            if (!ex.value) ++r.diagnostics.no_answer;
            ok = is_correct(ex.value, e.gold_answer);
            if (calc) {
                CalcResult cr = calculator_correct_detailed(p->completion);
                for (const auto& f : cr.flags) ++r.diagnostics.calc_flags[f.reason];
                ok_calc = is_correct(extract_answer(cr.text, e.task), e.gold_answer);
            }
        }
        Tally* slots[2] = {&all, nullptr};
        if (auto len = e.length()) {
            any_length = true;
            slots[1] = &by_length[*len];
        }
        for (Tally* t : slots) {
            if (!t) continue;
            ++t->total;
            t->missing += p == nullptr;
            t->correct += ok;
            t->correct_calc += ok_calc;
        }
    }

    r.n_missing = all.missing;
    r.n_correct = all.correct;
    r.accuracy_pct = percent_string(all.correct, all.total);
    if (calc) {
        r.n_correct_calc = all.correct_calc;
        r.accuracy_calc_pct = percent_string(all.correct_calc, all.total);
    }
    if (any_length) {
        for (const auto& [len, t] : by_length) {
            GroupStats g;
            g.field = "length";
            g.value = std::to_string(len);
            g.n_total = t.total;
            g.n_missing = t.missing;
            g.n_correct = t.correct;
            g.accuracy_pct = percent_string(t.correct, t.total);
            if (calc) {
                g.n_correct_calc = t.correct_calc;
                g.accuracy_calc_pct = percent_string(t.correct_calc, t.total);
            }
            r.groups.push_back(std::move(g));
        }
        std::size_t without = all.total;
        for (const auto& g : r.groups) without -= g.n_total;
        if (without > 0) log::warn("grade: " + std::to_string(without) + " examples have no length and are ungrouped");
    }
    return r;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

template <typename T>
void put_opt(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
}

template <typename T>
std::optional<T> get_opt(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

}  // namespace

Json to_json(const GradeReport& r) {
    Json j;
    j["dataset"] = r.dataset_name;
    j["task"] = to_string(r.task);
    j["mode"] = to_string(r.mode);
    j["n_total"] = r.n_total;
    j["n_missing"] = r.n_missing;
    j["n_correct"] = r.n_correct;
    j["accuracy_pct"] = r.accuracy_pct;
    put_opt(j, "n_correct_calc", r.n_correct_calc);
    put_opt(j, "accuracy_calc_pct", r.accuracy_calc_pct);
    Json groups = Json::array();
    for (const auto& g : r.groups) {
        Json gj;
        gj["field"] = g.field;
        gj["value"] = g.value;
        gj["n_total"] = g.n_total;
        gj["n_missing"] = g.n_missing;
        gj["n_correct"] = g.n_correct;
        gj["accuracy_pct"] = g.accuracy_pct;
        put_opt(gj, "n_correct_calc", g.n_correct_calc);
        put_opt(gj, "accuracy_calc_pct", g.accuracy_calc_pct);
        groups.push_back(std::move(gj));
    }
    j["groups"] = std::move(groups);
    j["retention"] = r.retention ? r.retention->to_json() : Json(nullptr);
    Json d;
    d["extraction_fallbacks"] = r.diagnostics.extraction_fallbacks;
    d["no_answer"] = r.diagnostics.no_answer;
    d["calc_flags"] = Json::object();
    for (const auto& [k, v] : r.diagnostics.calc_flags) d["calc_flags"][k] = v;
    j["diagnostics"] = std::move(d);
    return j;
}

GradeReport grade_report_from_json(const Json& j) {
    try {
        GradeReport r;
        r.dataset_name = j.at("dataset").get<std::string>();
        r.task = task_from_string(j.at("task").get<std::string>());
        r.mode = grade_mode_from_string(j.at("mode").get<std::string>());
        r.n_total = j.at("n_total").get<std::size_t>();
        r.n_missing = j.at("n_missing").get<std::size_t>();
        r.n_correct = j.at("n_correct").get<std::size_t>();
        r.accuracy_pct = j.at("accuracy_pct").get<std::string>();
        r.n_correct_calc = get_opt<std::size_t>(j, "n_correct_calc");
        r.accuracy_calc_pct = get_opt<std::string>(j, "accuracy_calc_pct");
        for (const auto& gj : j.at("groups")) {
            GroupStats g;
            g.field = gj.at("field").get<std::string>();
            g.value = gj.at("value").get<std::string>();
            g.n_total = gj.at("n_total").get<std::size_t>();
            g.n_missing = gj.at("n_missing").get<std::size_t>();
            g.n_correct = gj.at("n_correct").get<std::size_t>();
            g.accuracy_pct = gj.at("accuracy_pct").get<std::string>();
            g.n_correct_calc = get_opt<std::size_t>(gj, "n_correct_calc");
            g.accuracy_calc_pct = get_opt<std::string>(gj, "accuracy_calc_pct");
            r.groups.push_back(std::move(g));
        }
        if (auto it = j.find("retention"); it != j.end() && !it->is_null()) {
            RetentionStats s;
            s.total = it->at("total").get<std::size_t>();
            s.retained = it->at("retained").get<std::size_t>();
            s.fallback_used = it->at("fallback_used").get<std::size_t>();
            r.retention = s;
        }
        const Json& d = j.at("diagnostics");
        r.diagnostics.extraction_fallbacks = d.at("extraction_fallbacks").get<std::size_t>();
        r.diagnostics.no_answer = d.at("no_answer").get<std::size_t>();
        for (const auto& [k, v] : d.at("calc_flags").items()) r.diagnostics.calc_flags[k] = v.get<std::size_t>();
        return r;
    } catch (const Json::exception& e) {
        throw Error(Errc::ParseError, std::string("grade report: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reference rows and rendering

std::vector<ReferenceRow> parse_reference_rows(const Json& j) {
    std::vector<ReferenceRow> out;
    try {
        for (const auto& rj : j.at("rows")) {
            ReferenceRow r;
            r.benchmark = rj.at("benchmark").get<std::string>();
            r.length = get_opt<int>(rj, "length");
            r.system = rj.at("system").get<std::string>();
            r.acc = rj.at("acc").get<std::string>();
            r.acc_calc = get_opt<std::string>(rj, "acc_calc");
            r.train_size = get_opt<std::size_t>(rj, "train_size");
            out.push_back(std::move(r));
        }
    } catch (const Json::exception& e) {
        throw Error(Errc::ParseError, std::string("reference results: ") + e.what());
    }
    return out;
}

std::vector<ReferenceRow> reference_rows() {
    static const std::vector<ReferenceRow> rows =
        parse_reference_rows(Json::parse(assets::get("reference/reference_results.json")));
    return rows;
}

ReportFormat report_format_from_string(std::string_view s) {
    if (s == "markdown" || s == "md") return ReportFormat::Markdown;
    if (s == "csv") return ReportFormat::Csv;
    if (s == "json") return ReportFormat::Json;
    throw Error(Errc::InvalidArgument, "unknown report format '" + std::string(s) + "'");
}

namespace {

std::string canonical_name(std::string_view s) {
    std::string out = to_lower(s);
    for (char& c : out)
        if (c == '-' || c == ' ') c = '_';
    return out;
}

bool row_applies(const ReferenceRow& row, const GradeReport& r) {
    if (canonical_name(r.dataset_name).find(canonical_name(row.benchmark)) == std::string::npos) return false;
    if (!row.length) return true;
    const std::string want = std::to_string(*row.length);
    for (const auto& g : r.groups)
        if (g.field == "length" && g.value == want) return true;
    return false;
}

std::vector<ReferenceRow> matching_rows(const std::vector<GradeReport>& reports,
                                        const std::vector<ReferenceRow>& reference) {
    std::vector<ReferenceRow> out;
    for (const auto& row : reference)
        for (const auto& r : reports)
            if (row_applies(row, r)) {
                out.push_back(row);
                break;
            }
    return out;
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string md_cell(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += '\\';
        out += c;
    }
    return out;
}

struct Line {
    std::string dataset, group;
    std::size_t n = 0, missing = 0;
    std::string acc, acc_calc;
};

std::vector<Line> report_lines(const GradeReport& r) {
    std::vector<Line> out;
    out.push_back({r.dataset_name, "all", r.n_total, r.n_missing, r.show_plain() ? r.accuracy_pct : "",
                   r.accuracy_calc_pct.value_or("")});
    for (const auto& g : r.groups)
        out.push_back({r.dataset_name, g.field + "=" + g.value, g.n_total, g.n_missing, r.show_plain() ? g.accuracy_pct : "",
                       g.accuracy_calc_pct.value_or("")});
    return out;
}

}  // namespace

std::string render_report(const std::vector<GradeReport>& reports, ReportFormat format,
                          const std::vector<ReferenceRow>& reference) {
    const auto refs = matching_rows(reports, reference);
    std::ostringstream out;
    switch (format) {
        case ReportFormat::Markdown: {
            bool any_calc = false;
            for (const auto& r : reports) any_calc |= r.show_calc();
            out << "| Dataset | Group | N | Missing | Acc. |" << (any_calc ? " Acc. with Calc. |" : "") << '\n';
            out << "|---|---|---:|---:|---:|" << (any_calc ? "---:|" : "") << '\n';
            for (const auto& r : reports)
                for (const auto& l : report_lines(r)) {
                    out << "| " << md_cell(l.dataset) << " | " << l.group << " | " << l.n << " | " << l.missing
                        << " | " << (l.acc.empty() ? "-" : l.acc) << " |";
                    if (any_calc) out << ' ' << (l.acc_calc.empty() ? "-" : l.acc_calc) << " |";
                    out << '\n';
                }
            for (const auto& r : reports)
                if (r.retention)
                    out << "\nRetention (" << md_cell(r.dataset_name) << "): " << r.retention->retained << " of "
                        << r.retention->total << " (" << r.retention->retention_pct() << "%)\n";
            if (!refs.empty()) {
                out << "\nPublished reference results\n\n";
                out << "| Benchmark | Length | System | Acc. | Acc. with Calc. | Train size |\n";
                out << "|---|---:|---|---:|---:|---:|\n";
                for (const auto& row : refs)
                    out << "| " << row.benchmark << " | " << (row.length ? std::to_string(*row.length) : "-")
                        << " | " << md_cell(row.system) << " | " << row.acc << " | " << row.acc_calc.value_or("-")
                        << " | " << (row.train_size ? std::to_string(*row.train_size) : "N/A") << " |\n";
            }
            break;
        }
        case ReportFormat::Csv: {
            out << "kind,dataset,group,system,n,missing,acc,acc_calc\n";
            for (const auto& r : reports)
                for (const auto& l : report_lines(r))
                    out << "graded," << csv_field(l.dataset) << ',' << l.group << ",," << l.n << ',' << l.missing << ','
                        << l.acc << ',' << l.acc_calc << '\n';
            for (const auto& row : refs)
                out << "reference," << row.benchmark << ',' << (row.length ? "length=" + std::to_string(*row.length) : "all")
                    << ',' << csv_field(row.system) << ',' << (row.train_size ? std::to_string(*row.train_size) : "")
                    << ",," << row.acc << ',' << row.acc_calc.value_or("") << '\n';
            break;
        }
        case ReportFormat::Json: {
            Json j;
            j["reports"] = Json::array();
            for (const auto& r : reports) j["reports"].push_back(to_json(r));
            j["reference"] = Json::array();
            for (const auto& row : refs) {
                Json rj;
                rj["benchmark"] = row.benchmark;
                put_opt(rj, "length", row.length);
                rj["system"] = row.system;
                rj["acc"] = row.acc;
                put_opt(rj, "acc_calc", row.acc_calc);
                put_opt(rj, "train_size", row.train_size);
                j["reference"].push_back(std::move(rj));
            }
            out << j.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
            break;
        }
    }
    return out.str();
}

std::string render_report(const std::vector<GradeReport>& reports, ReportFormat format) {
    return render_report(reports, format, reference_rows());
}

std::vector<GradeReport> parse_report_json(std::string_view text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw Error(Errc::ParseError, std::string("report: ") + e.what());
    }
    std::vector<GradeReport> out;
    // a bare report (as written by `grade`) or a rendered document
    if (j.is_object() && j.contains("reports")) {
        for (const auto& rj : j.at("reports")) out.push_back(grade_report_from_json(rj));
    } else {
        out.push_back(grade_report_from_json(j));
    }
    return out;
}

}  // namespace cotkd
