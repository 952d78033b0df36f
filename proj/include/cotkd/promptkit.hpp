#pragma once

#include "cotkd/core.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace cotkd {

struct Exemplar {
    std::string question;
    std::string cot;
    AnswerValue answer = AnswerValue::number(0);
};

struct PromptSpec {
    std::vector<Exemplar> exemplars;
    bool conditioned = true;
    std::vector<std::string> stop_sequences{"\nQ:"};
    int max_tokens = 320;
    Rational temperature{0};

    /// Throws Error(InvalidArgument) if there are no exemplars or no stop sequences.
    void validate() const;
};

/// The conditioning hint " (Answer: X)" appended to a question line.
std::string answer_hint(const AnswerValue& answer);

/// Few-shot prompt in the "Q: ...\nA: ..." layout. When conditioned, every
/// question line (exemplars and target) carries the answer hint.
std::string build_prompt(const PromptSpec& spec, const Example& target);

/// JSON-lines {"question","cot","answer"}. The task used to validate each
/// exemplar is inferred from its answer. Throws Error(InconsistentExemplar)
/// with the 0-based index when the CoT's final answer differs from "answer".
std::vector<Exemplar> load_exemplars(const std::filesystem::path& path);
std::vector<Exemplar> parse_exemplars(std::string_view jsonl);

/// Shipped exemplar sets: "arithmetic" and "yesno".
std::vector<Exemplar> default_exemplars(TaskKind task);

}  // namespace cotkd
