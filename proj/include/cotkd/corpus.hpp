#pragma once

#include "cotkd/core.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace cotkd {

using Json = nlohmann::ordered_json;

struct Dataset {
    std::string name;
    std::vector<Example> examples;  // on-disk order
    std::string source_path;

    std::size_t size() const { return examples.size(); }
    /// Index of the example with this id, if any.
    std::optional<std::size_t> find(std::string_view id) const;
    /// Examples at `indices`, in the given order.
    Dataset select(const std::vector<std::size_t>& indices, std::string name) const;
};

enum class InputFormat { Gsm8k, YesNoJsonl, GenericJsonl };
InputFormat input_format_from_string(std::string_view s);
std::string_view to_string(InputFormat f);

/// Throws Error(ParseError) with the 1-based line number, Error(DuplicateId).
Dataset load_dataset(const std::filesystem::path& path, InputFormat format);
Dataset parse_dataset(std::istream& in, InputFormat format, std::string name);

/// Writes the examples JSON-lines format.
void write_examples(const std::filesystem::path& path, const Dataset& ds);

// JSON mapping for the record types that cross file boundaries.
Json to_json(const Example& e);
Example example_from_json(const Json& j);
Json to_json(const Annotation& a);
Annotation annotation_from_json(const Json& j, TaskKind task);
Json to_json(const FinetuneRecord& r);
FinetuneRecord finetune_from_json(const Json& j);

void write_annotations(const std::filesystem::path& path, const std::vector<Annotation>& anns);
/// The task decides how the "extracted" field is read back.
std::vector<Annotation> read_annotations(const std::filesystem::path& path, TaskKind task);
void write_finetune(const std::filesystem::path& path, const std::vector<FinetuneRecord>& records);
std::vector<FinetuneRecord> read_finetune(const std::filesystem::path& path);

/// Raw nonempty lines of a file, for line-level tools.
std::vector<std::string> read_lines(const std::filesystem::path& path);
void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

// ---------------------------------------------------------------------------
// Splits

using IndexList = std::vector<std::size_t>;

struct HoldoutPlan {
    IndexList train;
    IndexList val;
    IndexList test;
    Rational train_frac;
    Rational val_frac;
};

struct KFoldPlan {
    std::size_t k = 0;
    std::vector<IndexList> folds;

    IndexList test(std::size_t fold) const { return folds.at(fold); }
    /// Every index outside fold `fold`, ascending.
    IndexList train(std::size_t fold) const;
};

/// Validation carved from the tail of an existing train list.
struct CarvePlan {
    IndexList train;
    IndexList val;
    Rational frac;
};

struct SplitPlan {
    std::size_t n = 0;
    std::variant<HoldoutPlan, KFoldPlan, CarvePlan> plan;

    const HoldoutPlan* holdout() const { return std::get_if<HoldoutPlan>(&plan); }
    const KFoldPlan* kfold() const { return std::get_if<KFoldPlan>(&plan); }
    const CarvePlan* carve() const { return std::get_if<CarvePlan>(&plan); }
};

/// train = [0, floor(train_frac*n)), val = the next floor(val_frac*n), test = rest.
/// Throws Error(InvalidArgument) on bad fractions, Error(EmptySplit) when a
/// partition is empty and n >= 3.
SplitPlan holdout_split(std::size_t n, const Rational& train_frac, const Rational& val_frac);

/// Contiguous folds; the first n % k folds get one extra index.
/// Throws Error(InvalidK) unless 2 <= k <= n.
SplitPlan kfold_split(std::size_t n, std::size_t k);

struct Carved {
    IndexList train;
    IndexList val;
};

/// Validation = the last floor(frac*|train|) entries of `train`, order kept.
/// Logs a warning when that is zero.
Carved carve_validation(const IndexList& train, const Rational& frac);
/// carve_validation over [0, n), wrapped as a plan for the split manifest.
SplitPlan carve_split(std::size_t n, const Rational& frac);

/// Split manifest: {"variant","params","indices"}.
Json to_json(const SplitPlan& plan);
SplitPlan split_from_json(const Json& j);

struct SubsetSpec {
    Rational fraction;  // in (0, 1]
    std::uint64_t seed = 0;
};

/// floor(fraction*n) distinct indices, partial Fisher-Yates with Rng(seed),
/// sorted ascending.
IndexList sample_subset(std::size_t n, const SubsetSpec& spec);

// ---------------------------------------------------------------------------
// Finetune emission

enum class EmitMode { Cot, GoldCot, AnswerOnly };
EmitMode emit_mode_from_string(std::string_view s);
std::string_view to_string(EmitMode m);

/// Builds teacher-forcing pairs: input is the question verbatim, target the
/// reasoning ending with "The answer is X." (or that sentence alone for
/// AnswerOnly). In Cot mode only annotations with correct = true are used;
/// GoldCot mode skips examples without a gold CoT.
/// Throws Error(MissingAnnotations) when Cot mode gets no annotation list.
std::vector<FinetuneRecord> emit_finetune(const Dataset& dataset,
                                          const std::vector<Annotation>* annotations,
                                          EmitMode mode);

}  // namespace cotkd
