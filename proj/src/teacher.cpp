#include "cotkd/teacher.hpp"

#include "cotkd/calc.hpp"
#include "cotkd/filtering.hpp"
#include "cotkd/hash.hpp"
#include "cotkd/log.hpp"
#include "cotkd/rng.hpp"
#include "cotkd/synthgen.hpp"

#include "httplib.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unistd.h>

namespace cotkd {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Requests and cache

Json CompletionRequest::wire_body() const {
    Json j;
    j["model"] = model;
    j["prompt"] = prompt;
    j["max_tokens"] = max_tokens;
    j["temperature"] = Json::parse(temperature.render());
    j["stop"] = stop;
    return j;
}

std::string CompletionRequest::cache_key() const {
    Json j;
    j["model"] = model;
    j["prompt"] = prompt;
    j["temperature"] = temperature.exact_string();
    j["max_tokens"] = max_tokens;
    j["stop"] = stop;
    return sha256_hex(j.dump(-1, ' ', false, Json::error_handler_t::replace));
}

ResponseCache::ResponseCache(fs::path dir) : dir_(std::move(dir)) {
    if (enabled()) fs::create_directories(dir_);
}

fs::path ResponseCache::path_for(const std::string& key) const { return dir_ / (key + ".json"); }

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    if (!enabled()) return std::nullopt;
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    try {
        Json j = Json::parse(in);
        return j.at("response").at("text").get<std::string>();
    } catch (const Json::exception& e) {
        log::warn("ignoring unreadable cache entry " + path_for(key).string() + ": " + e.what());
        return std::nullopt;
    }
}

void ResponseCache::put(const std::string& key, const CompletionRequest& req, const std::string& text) const {
    if (!enabled()) return;
    const fs::path target = path_for(key);
    if (fs::exists(target)) return;
    Json j;
    j["key"] = key;
    j["request"] = req.wire_body();
    j["response"] = {{"text", text}};
    std::ostringstream tmp_name;
    tmp_name << key << ".tmp." << ::getpid() << "." << std::this_thread::get_id();
    const fs::path tmp = dir_ / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(Errc::Io, "cannot write cache file " + tmp.string());
        out << j.dump(2, ' ', false, Json::error_handler_t::replace) << '\n';
    }
    fs::rename(tmp, target);
}

std::string truncate_at_stop(std::string_view text, const std::vector<std::string>& stop) {
    std::size_t cut = text.size();
    for (const auto& s : stop) {
        if (s.empty()) continue;
        auto p = text.find(s);
        if (p != std::string_view::npos) cut = std::min(cut, p);
    }
    return std::string(text.substr(0, cut));
}

// ---------------------------------------------------------------------------
// HTTP backend

HttpBackend::HttpBackend(TeacherConfig cfg) : cfg_(std::move(cfg)) {
    const std::string& url = cfg_.endpoint_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error(Errc::InvalidArgument, "endpoint url needs a scheme: " + url);
    auto path_begin = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_begin);
    path_ = path_begin == std::string::npos ? "/" : url.substr(path_begin);
}

std::string HttpBackend::complete(const CompletionRequest& req, RequestStats& stats) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (!key || !*key) throw Error(Errc::AuthError, "environment variable " + cfg_.api_key_env + " is not set");

    httplib::Client cli(scheme_host_port_);
    cli.set_connection_timeout(cfg_.timeout);
    cli.set_read_timeout(cfg_.timeout);
    cli.set_write_timeout(cfg_.timeout);
    httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};
    const std::string body = req.wire_body().dump(-1, ' ', false, Json::error_handler_t::replace);

    Errc last = Errc::TransportError;
    std::string last_detail;
    auto backoff = cfg_.backoff_initial;
    for (int attempt = 0; attempt <= cfg_.retry_max; ++attempt) {
        if (attempt > 0) {
            stats.retries.fetch_add(1);
            std::this_thread::sleep_for(backoff);
            backoff = std::min(backoff * 2, cfg_.backoff_max);
        }
        stats.network_calls.fetch_add(1);
        auto res = cli.Post(path_, headers, body, "application/json");
        if (!res) {
            last = Errc::TransportError;
            last_detail = "request to " + cfg_.endpoint_url + " failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            try {
                Json j = Json::parse(res->body);
                return j.at("choices").at(0).at("text").get<std::string>();
            } catch (const Json::exception& e) {
                throw Error(Errc::MalformedResponse, std::string("unexpected response body: ") + e.what());
            }
        }
        if (res->status == 401 || res->status == 403)
            throw Error(Errc::AuthError, "endpoint rejected credentials (HTTP " + std::to_string(res->status) + ")");
        if (res->status == 429) {
            last = Errc::RateLimited;
            last_detail = "rate limited (HTTP 429)";
            continue;
        }
        if (res->status >= 500) {
            last = Errc::TransportError;
            last_detail = "server error (HTTP " + std::to_string(res->status) + ")";
            continue;
        }
        throw Error(Errc::TransportError, "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    throw Error(last, last_detail + " after " + std::to_string(cfg_.retry_max) + " retries");
}

// ---------------------------------------------------------------------------
// Mock backend

ErrorModel error_model_from_string(std::string_view s) {
    std::string k = to_lower(s);
    if (k == "wrong_final_answer") return ErrorModel::WrongFinalAnswer;
    if (k == "skip_step") return ErrorModel::SkipStep;
    if (k == "arithmetic_slip") return ErrorModel::ArithmeticSlip;
    throw Error(Errc::InvalidArgument, "unknown error model '" + std::string(s) + "'");
}

std::string_view to_string(ErrorModel m) {
    switch (m) {
        case ErrorModel::WrongFinalAnswer: return "wrong_final_answer";
        case ErrorModel::SkipStep: return "skip_step";
        case ErrorModel::ArithmeticSlip: return "arithmetic_slip";
    }
    return "wrong_final_answer";
}

namespace {

struct TargetBlock {
    std::string question;
    std::optional<std::string> hint;
};

// The last "Q: ...\nA:" block of a prompt.
std::optional<TargetBlock> read_target(std::string_view prompt) {
    std::size_t q = prompt.rfind("\n\nQ: ");
    q = q == std::string_view::npos ? (prompt.starts_with("Q: ") ? 0 : std::string_view::npos) : q + 2;
    if (q == std::string_view::npos) return std::nullopt;
    std::size_t a = prompt.find("\nA:", q);
    if (a == std::string_view::npos) return std::nullopt;
    std::string_view line = prompt.substr(q + 3, a - q - 3);
    TargetBlock t;
    constexpr std::string_view open = " (Answer: ";
    auto h = line.rfind(open);
    if (h != std::string_view::npos && line.ends_with(")")) {
        t.hint = std::string(line.substr(h + open.size(), line.size() - h - open.size() - 1));
        line = line.substr(0, h);
    }
    t.question = std::string(line);
    return t;
}

struct Solution {
    TaskKind task;
    AnswerValue answer;
    std::string cot;  // ends with the answer sentence
    std::optional<CoinflipEvents> coin;
    std::optional<std::vector<std::string>> words;
};

AnswerValue wrong_answer(const AnswerValue& gold, Rng& rng) {
    if (const auto* n = gold.as_number())
        return AnswerValue::number(*n + Rational(static_cast<std::int64_t>(1 + rng.below(9))));
    if (const auto* b = gold.as_yes_no()) return AnswerValue::yes_no(!*b);
    std::string t = gold.render();
    if (t.empty()) return AnswerValue::text("x");
    t.back() = t.back() == 'z' ? 'a' : static_cast<char>(t.back() + 1);
    return AnswerValue::text(t);
}

// cot with its trailing answer sentence replaced.
std::string restate(std::string_view cot, const AnswerValue& old_answer, const AnswerValue& new_answer) {
    std::string body(trim(cot));
    const std::string sentence = answer_sentence(old_answer);
    if (body.ends_with(sentence)) body.erase(body.size() - sentence.size());
    return with_answer_sentence(body, new_answer);
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find(". ", pos);
        if (end == std::string_view::npos) {
            out.emplace_back(text.substr(pos));
            break;
        }
        out.emplace_back(text.substr(pos, end + 1 - pos));
        pos = end + 2;
    }
    return out;
}

std::string wrong_final(const Solution& s, Rng& rng) { return restate(s.cot, s.answer, wrong_answer(s.answer, rng)); }

std::string skip_step(const Solution& s, Rng& rng) {
    const Templates& t = Templates::builtin();
    if (s.coin) {
        CoinflipEvents ev = *s.coin;
        // drop one flipper, or invent one when nobody flipped
        std::vector<std::size_t> flipped;
        for (std::size_t i = 0; i < ev.flips.size(); ++i)
            if (ev.flips[i]) flipped.push_back(i);
        if (flipped.empty()) ev.flips[rng.below(ev.flips.size())] = true;
        else ev.flips[flipped[rng.below(flipped.size())]] = false;
        return coinflip_cot(ev.names, ev.flips, t);
    }
    if (s.words && s.words->size() > 1) {
        auto words = *s.words;
        words.erase(words.begin() + static_cast<std::ptrdiff_t>(rng.below(words.size())));
        return last_letter_cot(words, t);
    }
    auto sentences = split_sentences(s.cot);
    if (sentences.size() > 2) sentences.erase(sentences.begin() + static_cast<std::ptrdiff_t>(rng.below(sentences.size() - 1)));
    std::string body;
    for (const auto& x : sentences) body += (body.empty() ? "" : " ") + x;
    return restate(body, s.answer, wrong_answer(s.answer, rng));
}

std::string arithmetic_slip(const Solution& s, Rng& rng) {
    if (s.coin) {
        // miscount by one: the parity and the conclusion follow the miscount
        std::size_t f = static_cast<std::size_t>(std::count(s.coin->flips.begin(), s.coin->flips.end(), true));
        const Templates& t = Templates::builtin();
        std::size_t wrong = f + 1;
        bool even = wrong % 2 == 0;
        std::vector<std::string> flippers;
        for (std::size_t i = 0; i < s.coin->names.size(); ++i)
            if (s.coin->flips[i]) flippers.push_back(s.coin->names[i]);
        std::string out = flippers.empty() ? t.get("coinflip.no_flippers") : t.fill("coinflip.flippers", {{"names", [&] {
            std::string n;
            for (std::size_t i = 0; i < flippers.size(); ++i)
                n += (i == 0 ? "" : (i + 1 == flippers.size() ? " and " : ", ")) + flippers[i];
            return n;
        }()}});
        out += " " + t.fill("coinflip.count", {{"count", std::to_string(wrong)}, {"times", "times"},
                                               {"parity", even ? "even" : "odd"}});
        out += " " + t.get(even ? "coinflip.even" : "coinflip.odd");
        out += " " + t.fill("coinflip.answer", {{"answer", even ? "yes" : "no"}});
        return out;
    }
    if (s.task == TaskKind::Arithmetic) {
        auto statements = parse_statements(s.cot);
        if (!statements.empty()) {
            // bump the first result, then recompute everything after it so the slip propagates
            const auto& first = statements.front();
            Rational slipped = first.stated_result + Rational(static_cast<std::int64_t>(1 + rng.below(3)));
            std::string text = s.cot;
            const Span core = first.stated.core;
            std::string before = text.substr(0, core.begin);
            std::string tail = text.substr(core.end);
            // every later mention of the original value now reads as the slipped one
            std::string replaced;
            std::size_t pos = 0;
            for (const auto& tok : find_numbers(tail)) {
                if (tok.value != first.stated_result || tail[tok.pos + tok.len - 1] == '%') continue;
                std::string_view tok_text = std::string_view(tail).substr(tok.pos, tok.len);
                replaced += tail.substr(pos, tok.pos - pos) + (tok_text.starts_with("$") ? "$" : "") + slipped.render();
                pos = tok.pos + tok.len;
            }
            replaced += tail.substr(pos);
            std::string cot = before + slipped.render() + calculator_correct(replaced);
            if (!is_correct(extract_answer(cot, s.task), s.answer)) return cot;
        }
    }
    return wrong_final(s, rng);
}

}  // namespace

MockBackend::MockBackend(MockTeacherConfig cfg, const Dataset* answer_key) : cfg_(std::move(cfg)) {
    if (answer_key)
        for (const auto& e : answer_key->examples) key_.emplace(e.question, &e);
}

std::string MockBackend::id() const {
    return "mock:" + std::string(to_string(cfg_.error_model)) + ":rate=" + cfg_.correct_rate.render() +
           ":seed=" + std::to_string(cfg_.seed);
}

std::string MockBackend::complete(const CompletionRequest& req, RequestStats& stats) {
    stats.network_calls.fetch_add(1);
    auto target = read_target(req.prompt);
    if (!target) throw Error(Errc::MalformedResponse, "mock teacher could not find a target question in the prompt");

    const Templates& t = Templates::builtin();
    std::optional<Solution> sol;
    if (auto it = key_.find(target->question); it != key_.end()) {
        const Example& e = *it->second;
        std::string cot = e.gold_cot ? with_answer_sentence(*e.gold_cot, e.gold_answer)
                                     : "Let me think step by step. " + answer_sentence(e.gold_answer);
        sol = Solution{e.task, e.gold_answer, cot, std::nullopt, std::nullopt};
    }
    if (auto ev = parse_coinflip_question(target->question, t)) {
        std::size_t f = static_cast<std::size_t>(std::count(ev->flips.begin(), ev->flips.end(), true));
        sol = Solution{TaskKind::Coinflip, AnswerValue::yes_no(f % 2 == 0), coinflip_cot(ev->names, ev->flips, t), ev,
                       std::nullopt};
    } else if (auto words = parse_last_letter_question(target->question, t)) {
        std::string answer;
        for (const auto& w : *words) answer += w.back();
        sol = Solution{TaskKind::LastLetter, AnswerValue::text(answer), last_letter_cot(*words, t), std::nullopt,
                       words};
    } else if (!sol && target->hint) {
        AnswerValue a = AnswerValue::text(*target->hint);
        TaskKind task = TaskKind::LastLetter;
        if (auto n = try_normalize_number(*target->hint)) {
            a = AnswerValue::number(*n);
            task = TaskKind::Arithmetic;
        } else if (auto b = parse_yes_no(*target->hint)) {
            a = AnswerValue::yes_no(*b);
            task = TaskKind::YesNo;
        }
        sol = Solution{task, a, "Working backwards from the question. " + answer_sentence(a), std::nullopt,
                       std::nullopt};
    }
    if (!sol) return " I am not sure how to solve this.";

    Rng rng(cfg_.seed, fnv1a64(req.prompt));
    const bool conditioned = target->hint.has_value();
    bool err = false;
    if (!conditioned || cfg_.err_when_conditioned) {
        // err with probability 1 - correct_rate, using 53 bits of the stream
        const Rational::Int scale = Rational::Int(1) << 53;
        const Rational::Int threshold = (cfg_.correct_rate * Rational(scale, 1)).floor();
        err = Rational::Int(rng.next() >> 11) >= threshold;
    }
    std::string cot = sol->cot;
    if (err) {
        switch (cfg_.error_model) {
            case ErrorModel::WrongFinalAnswer: cot = wrong_final(*sol, rng); break;
            case ErrorModel::SkipStep: cot = skip_step(*sol, rng); break;
            case ErrorModel::ArithmeticSlip: cot = arithmetic_slip(*sol, rng); break;
        }
        if (is_correct(extract_answer(cot, sol->task), sol->answer)) cot = wrong_final(*sol, rng);
    }
    // what a completions endpoint returns: leading space, then it keeps going
    return " " + cot + "\n\nQ: What comes next?";
}

// ---------------------------------------------------------------------------
// Client

TeacherClient::TeacherClient(TeacherConfig cfg, std::unique_ptr<CompletionBackend> backend)
    : cfg_(std::move(cfg)), backend_(std::move(backend)), cache_(cfg_.cache_dir) {
    if (cfg_.max_concurrency < 1) throw Error(Errc::InvalidArgument, "max_concurrency must be >= 1");
}

std::string TeacherClient::complete(const std::string& prompt, const PromptSpec& spec) {
    CompletionRequest req{cfg_.model_id, prompt, spec.max_tokens, spec.temperature, spec.stop_sequences};
    const std::string key = req.cache_key();
    if (auto hit = cache_.get(key)) {
        stats_.cache_hits.fetch_add(1);
        return *hit;
    }
    std::string text = truncate_at_stop(backend_->complete(req, stats_), spec.stop_sequences);
    cache_.put(key, req, text);
    return text;
}

Json AnnotationRun::manifest(const TeacherClient& client, bool conditioned) const {
    Json j;
    j["teacher_id"] = client.teacher_id();
    j["model"] = client.config().model_id;
    j["conditioned"] = conditioned;
    j["total"] = annotations.size();
    j["correct"] = correct;
    j["retention_pct"] = percent_string(correct, annotations.size());
    Json failed = Json::array();
    for (const auto& f : failures) failed.push_back({{"id", f.example_id}, {"error", f.error}});
    j["failed"] = failed;
    j["cache_hits"] = cache_hits;
    j["network_calls"] = network_calls;
    j["retries"] = retries;
    return j;
}

AnnotationRun annotate_dataset(TeacherClient& client, const PromptSpec& spec, const Dataset& dataset) {
    spec.validate();
    const std::size_t n = dataset.size();
    AnnotationRun run;
    run.annotations.resize(n);
    std::vector<std::optional<std::string>> errors(n);
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0};
    std::atomic<bool> abort{false};
    std::mutex mu;
    std::optional<Error> fatal;

    const std::size_t before_hits = client.stats().cache_hits.load();
    const std::size_t before_calls = client.stats().network_calls.load();
    const std::size_t before_retries = client.stats().retries.load();
    const std::string teacher_id = client.teacher_id();

    auto worker = [&] {
        for (std::size_t i = next.fetch_add(1); i < n && !abort.load(); i = next.fetch_add(1)) {
            const Example& e = dataset.examples[i];
            Annotation a;
            a.example_id = e.id;
            a.teacher_id = teacher_id;
            a.conditioned = spec.conditioned;
            const std::string prompt = build_prompt(spec, e);
            a.prompt_hash = sha256_hex(prompt);
            try {
                a.cot = std::string(trim(client.complete(prompt, spec)));
                grade_annotation(a, e);
            } catch (const Error& err) {
                if (err.code() == Errc::AuthError) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (!fatal) fatal = err;
                    abort.store(true);
                    return;
                }
                a.cot.clear();
                a.extracted.reset();
                a.correct = false;
                errors[i] = std::string(errc_name(err.code())) + ": " + err.what();
            }
            run.annotations[i] = std::move(a);
            std::size_t d = done.fetch_add(1) + 1;
            if (n >= 10 && d % (n / 10) == 0) log::info("annotated " + std::to_string(d) + "/" + std::to_string(n));
        }
    };

    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(client.config().max_concurrency),
                                                      std::max<std::size_t>(n, 1));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (fatal) throw *fatal;

    for (std::size_t i = 0; i < n; ++i) {
        if (errors[i]) {
            run.failures.push_back({dataset.examples[i].id, *errors[i]});
            log::warn("annotation failed for " + dataset.examples[i].id + ": " + *errors[i]);
        }
        if (run.annotations[i].correct) ++run.correct;
    }
    run.cache_hits = client.stats().cache_hits.load() - before_hits;
    run.network_calls = client.stats().network_calls.load() - before_calls;
    run.retries = client.stats().retries.load() - before_retries;
    return run;
}

}  // namespace cotkd
