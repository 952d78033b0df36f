#pragma once

#include "cotkd/corpus.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

namespace cotkd {

/// Keyed sentence templates with {placeholder} slots, read from a
/// "key = text" file (data/templates/symbolic.txt by default).
class Templates {
public:
    static Templates parse(std::string_view text);
    static const Templates& builtin();

    /// Throws Error(ParseError) for an unknown key.
    const std::string& get(std::string_view key) const;
    std::string fill(std::string_view key, const std::map<std::string, std::string>& values) const;
    /// Inverse of fill for a template with exactly one placeholder: the text
    /// that the placeholder matched, or nothing if `text` does not fit.
    std::optional<std::string> match(std::string_view key, std::string_view text) const;

private:
    std::map<std::string, std::string, std::less<>> entries_;
};

std::vector<std::string> builtin_names();
std::vector<std::string> builtin_words();

enum class SymbolicTask { LastLetter, Coinflip };
std::string_view to_string(SymbolicTask t);
SymbolicTask symbolic_task_from_string(std::string_view s);
TaskKind task_kind(SymbolicTask t);

struct GenConfig {
    SymbolicTask task = SymbolicTask::Coinflip;
    std::size_t n = 1000;
    int length = 2;
    std::uint64_t seed = 0;
    /// Label for this draw (e.g. "train", "test"). Selects the PRNG stream
    /// and appears in ids and the dataset name.
    std::string split = "train";
    std::vector<std::string> name_pool = builtin_names();
    std::vector<std::string> word_pool = builtin_words();
    std::shared_ptr<const Templates> templates;  // null = builtin
    /// Questions that must not be generated (dedup against another split).
    const std::unordered_set<std::string>* exclude = nullptr;
};

/// Throws Error(EmptyPool) for an empty pool, Error(InvalidArgument) for
/// length < 1 or the wrong task.
Dataset gen_last_letter(const GenConfig& cfg);
Dataset gen_coinflip(const GenConfig& cfg);
Dataset generate(const GenConfig& cfg);

struct SymbolicSuite {
    Dataset train;                // length = train_length
    Dataset test;                 // same length, deduplicated against train
    std::vector<Dataset> ood;     // one per OOD length, in the order requested
};

struct SuiteConfig {
    SymbolicTask task = SymbolicTask::Coinflip;
    std::uint64_t seed = 0;
    std::size_t n = 1000;
    int train_length = 2;
    std::vector<int> ood_lengths{3, 4};
    std::vector<std::string> name_pool = builtin_names();
    std::vector<std::string> word_pool = builtin_words();
    std::shared_ptr<const Templates> templates;
};

SymbolicSuite gen_ood_suite(const SuiteConfig& cfg);

// Sentence builders shared with the mock teacher.
std::string last_letter_question(const std::vector<std::string>& words, const Templates& t);
std::string last_letter_cot(const std::vector<std::string>& words, const Templates& t);
std::string coinflip_question(const std::vector<std::string>& names, const std::vector<bool>& flips,
                              const Templates& t);
std::string coinflip_cot(const std::vector<std::string>& names, const std::vector<bool>& flips, const Templates& t);

struct CoinflipEvents {
    std::vector<std::string> names;
    std::vector<bool> flips;
};

/// Reads a question produced by the builders above back into its parts.
std::optional<std::vector<std::string>> parse_last_letter_question(std::string_view q, const Templates& t);
std::optional<CoinflipEvents> parse_coinflip_question(std::string_view q, const Templates& t);

}  // namespace cotkd
