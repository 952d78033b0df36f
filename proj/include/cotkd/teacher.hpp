#pragma once

#include "cotkd/corpus.hpp"
#include "cotkd/promptkit.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace cotkd {

struct TeacherConfig {
    std::string endpoint_url;  // e.g. http://localhost:8000/v1/completions
    std::string model_id = "teacher";
    std::string api_key_env = "TEACHER_API_KEY";
    int max_concurrency = 4;
    int retry_max = 5;
    std::filesystem::path cache_dir;  // empty disables caching
    std::chrono::milliseconds backoff_initial{500};
    std::chrono::milliseconds backoff_max{30000};
    std::chrono::seconds timeout{120};
};

/// Body of one completions request. Also the cache key material.
struct CompletionRequest {
    std::string model;
    std::string prompt;
    int max_tokens = 320;
    Rational temperature{0};
    std::vector<std::string> stop;

    /// Wire body: {model, prompt, max_tokens, temperature, stop}.
    Json wire_body() const;
    /// SHA-256 over the canonical request (temperature as exact text).
    std::string cache_key() const;
};

/// Counters shared by every request a client makes.
struct RequestStats {
    std::atomic<std::size_t> network_calls{0};
    std::atomic<std::size_t> cache_hits{0};
    std::atomic<std::size_t> retries{0};
};

class CompletionBackend {
public:
    virtual ~CompletionBackend() = default;
    /// Raw completion text (stop sequences not yet applied).
    virtual std::string complete(const CompletionRequest& req, RequestStats& stats) = 0;
    virtual std::string id() const = 0;
};

/// Completions-compatible HTTP endpoint: POST JSON, reads choices[0].text.
/// 429 and 5xx are retried with exponential backoff up to retry_max times.
class HttpBackend : public CompletionBackend {
public:
    explicit HttpBackend(TeacherConfig cfg);
    std::string complete(const CompletionRequest& req, RequestStats& stats) override;
    std::string id() const override { return "http:" + cfg_.model_id; }

private:
    TeacherConfig cfg_;
    std::string scheme_host_port_;
    std::string path_;
};

enum class ErrorModel { WrongFinalAnswer, SkipStep, ArithmeticSlip };
ErrorModel error_model_from_string(std::string_view s);
std::string_view to_string(ErrorModel m);

struct MockTeacherConfig {
    Rational correct_rate{1};
    ErrorModel error_model = ErrorModel::WrongFinalAnswer;
    std::uint64_t seed = 0;
    /// When false, prompts carrying the answer hint are always answered correctly.
    bool err_when_conditioned = true;
};

/// Deterministic stand-in for a teacher model. Reads the target question
/// (and hint) from the prompt; solves coinflip and last-letter questions
/// itself and looks other questions up in the answer key. Errors are
/// injected per prompt from hash(seed, prompt), so results do not depend on
/// request order.
class MockBackend : public CompletionBackend {
public:
    MockBackend(MockTeacherConfig cfg, const Dataset* answer_key = nullptr);
    std::string complete(const CompletionRequest& req, RequestStats& stats) override;
    std::string id() const override;

private:
    MockTeacherConfig cfg_;
    std::map<std::string, const Example*, std::less<>> key_;
};

/// Content-addressed response cache: <dir>/<64-hex>.json holding the request
/// and response. Writes go to a temp file that is then renamed into place.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir);
    bool enabled() const { return !dir_.empty(); }
    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const CompletionRequest& req, const std::string& text) const;
    std::filesystem::path path_for(const std::string& key) const;

private:
    std::filesystem::path dir_;
};

/// Text up to (not including) the earliest stop sequence.
std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop);

class TeacherClient {
public:
    TeacherClient(TeacherConfig cfg, std::unique_ptr<CompletionBackend> backend);

    /// Completion for `prompt` under the decoding settings of `spec`, truncated
    /// at the first stop sequence. Served from cache when possible.
    std::string complete(const std::string& prompt, const PromptSpec& spec);

    const TeacherConfig& config() const { return cfg_; }
    const RequestStats& stats() const { return stats_; }
    std::string teacher_id() const { return backend_->id(); }

private:
    TeacherConfig cfg_;
    std::unique_ptr<CompletionBackend> backend_;
    ResponseCache cache_;
    RequestStats stats_;
};

struct AnnotationFailure {
    std::string example_id;
    std::string error;
};

struct AnnotationRun {
    std::vector<Annotation> annotations;  // dataset order
    std::vector<AnnotationFailure> failures;
    std::size_t correct = 0;
    std::size_t cache_hits = 0;
    std::size_t network_calls = 0;
    std::size_t retries = 0;

    Json manifest(const TeacherClient& client, bool conditioned) const;
};

/// One annotation per example, in dataset order, using up to
/// client.config().max_concurrency requests in flight. A request that still
/// fails after retries yields an empty, incorrect annotation and a failure
/// entry; an AuthError aborts the run.
AnnotationRun annotate_dataset(TeacherClient& client, const PromptSpec& spec, const Dataset& dataset);

}  // namespace cotkd
