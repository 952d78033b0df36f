#pragma once

#include "cotkd/corpus.hpp"
#include "cotkd/synthgen.hpp"
#include "cotkd/teacher.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cotkd {

struct TeacherChoice {
    std::string kind = "mock";  // "mock" or "http"
    TeacherConfig http;
    MockTeacherConfig mock;
};

/// Everything `pipeline` needs. Together with the input files (and a warm
/// teacher cache for http teachers) it determines every artifact.
struct RunConfig {
    std::filesystem::path out_dir = "run";

    // Source: an input corpus, or a synthetic symbolic suite when synth_task is set.
    std::filesystem::path train_path;
    std::filesystem::path test_path;  // optional
    InputFormat format = InputFormat::Gsm8k;
    std::optional<SymbolicTask> synth_task;
    std::size_t synth_n = 1000;
    int synth_train_length = 2;
    std::vector<int> synth_ood{3, 4};
    std::uint64_t seed = 0;

    // Prompting.
    std::filesystem::path exemplars_path;  // empty = shipped set for the task
    bool conditioned = true;
    bool ablation = false;  // also annotate unconditioned and report both retentions
    int max_tokens = 320;
    Rational temperature{0};

    TeacherChoice teacher;

    // Emission.
    Rational val_frac{0};
    std::vector<Rational> subset_fractions;
    std::uint64_t subset_seed = 0;

    /// Throws Error(InvalidArgument) for inconsistent settings.
    void validate() const;
    Json to_json() const;
};

/// Exemplars for a task: the file when given, the shipped sets for
/// arithmetic and yes/no, and 8 freshly generated length-2 examples (their own
/// PRNG stream) for the symbolic tasks.
std::vector<Exemplar> exemplars_for(TaskKind task, const std::filesystem::path& path, std::uint64_t seed);

std::unique_ptr<CompletionBackend> make_backend(const TeacherChoice& choice, const Dataset* answer_key);

struct PipelineResult {
    Json manifest;
    std::vector<std::filesystem::path> artifacts;  // relative to out_dir, sorted
};

/// Runs ingest/synth, split, annotate, filter and emit in order and writes
/// manifest.json: the config, per-stage stats and the SHA-256 of every
/// artifact. No timestamps, so identical inputs give identical bytes.
PipelineResult run_pipeline(const RunConfig& cfg);

}  // namespace cotkd
