#pragma once

#include "cotkd/filtering.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cotkd {

struct Prediction {
    std::string example_id;
    std::string completion;
};

/// JSON-lines {"id","completion"}. Throws Error(ParseError) with the line
/// number and Error(DuplicatePrediction).
std::vector<Prediction> load_predictions(const std::filesystem::path& path);
std::vector<Prediction> parse_predictions(std::istream& in);
void write_predictions(const std::filesystem::path& path, const std::vector<Prediction>& preds);

enum class GradeMode { Plain, WithCalc, Both };
GradeMode grade_mode_from_string(std::string_view s);
std::string_view to_string(GradeMode m);

struct GroupStats {
    std::string field;  // meta key, e.g. "length"
    std::string value;
    std::size_t n_total = 0;
    std::size_t n_missing = 0;
    std::size_t n_correct = 0;
    std::string accuracy_pct;
    std::optional<std::size_t> n_correct_calc;
    std::optional<std::string> accuracy_calc_pct;

    friend bool operator==(const GroupStats&, const GroupStats&) = default;
};

struct GradeDiagnostics {
    std::size_t extraction_fallbacks = 0;
    std::size_t no_answer = 0;  // nothing extractable
    std::map<std::string, std::size_t> calc_flags;  // reason -> count

    friend bool operator==(const GradeDiagnostics&, const GradeDiagnostics&) = default;
};

struct GradeReport {
    std::string dataset_name;
    TaskKind task = TaskKind::Arithmetic;
    GradeMode mode = GradeMode::Plain;
    std::size_t n_total = 0;
    std::size_t n_missing = 0;
    std::size_t n_correct = 0;
    std::string accuracy_pct;
    // Present for arithmetic datasets graded with_calc or both.
    std::optional<std::size_t> n_correct_calc;
    std::optional<std::string> accuracy_calc_pct;
    std::vector<GroupStats> groups;  // by meta "length" when the dataset has it
    std::optional<RetentionStats> retention;
    GradeDiagnostics diagnostics;

    bool show_plain() const { return mode != GradeMode::WithCalc; }
    bool show_calc() const { return accuracy_calc_pct.has_value(); }

    friend bool operator==(const GradeReport&, const GradeReport&) = default;
};

Json to_json(const GradeReport& r);
GradeReport grade_report_from_json(const Json& j);

/// Scores every example of `dataset`; a missing prediction counts as
/// incorrect and is tallied in n_missing. Throws Error(UnknownId) for a
/// prediction whose id is not in the dataset, Error(DuplicatePrediction).
GradeReport grade(const std::vector<Prediction>& predictions, const Dataset& dataset, GradeMode mode);

struct ReferenceRow {
    std::string benchmark;  // "gsm8k", "coinflip", ...
    std::optional<int> length;
    std::string system;
    std::string acc;
    std::optional<std::string> acc_calc;
    std::optional<std::size_t> train_size;
};

/// Published accuracies shipped in data/reference/reference_results.json.
std::vector<ReferenceRow> reference_rows();
std::vector<ReferenceRow> parse_reference_rows(const Json& j);

enum class ReportFormat { Markdown, Csv, Json };
ReportFormat report_format_from_string(std::string_view s);

/// Renders reports plus the reference rows whose benchmark appears in a
/// report's dataset name. JSON output reads back with parse_report_json.
std::string render_report(const std::vector<GradeReport>& reports, ReportFormat format,
                          const std::vector<ReferenceRow>& reference);
std::string render_report(const std::vector<GradeReport>& reports, ReportFormat format);
std::vector<GradeReport> parse_report_json(std::string_view text);

}  // namespace cotkd
