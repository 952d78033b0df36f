#include "cotkd/synthgen.hpp"

#include "cotkd/assets.hpp"
#include "cotkd/rng.hpp"

namespace cotkd {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

// "A", "A and B", "A, B and C"
std::string join_names(const std::vector<std::string>& names) {
    if (names.size() <= 1) return join(names, "");
    std::vector<std::string> head(names.begin(), names.end() - 1);
    return join(head, ", ") + " and " + names.back();
}

const Templates& templates_of(const std::shared_ptr<const Templates>& t) { return t ? *t : Templates::builtin(); }

std::vector<std::string> draw(Rng& rng, const std::vector<std::string>& pool, int count) {
    std::vector<std::string> out;
    auto n = static_cast<std::size_t>(count);
    if (pool.size() >= n) {
        for (auto i : sample_without_replacement(rng, pool.size(), n)) out.push_back(pool[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i) out.push_back(pool[rng.below(pool.size())]);
    }
    return out;
}

void check_config(const GenConfig& cfg, SymbolicTask expected) {
    if (cfg.task != expected) throw Error(Errc::InvalidArgument, "generator called with the wrong task");
    if (cfg.length < 1) throw Error(Errc::InvalidArgument, "length must be >= 1");
    const auto& pool = expected == SymbolicTask::LastLetter ? cfg.word_pool : cfg.name_pool;
    if (pool.empty()) throw Error(Errc::EmptyPool, std::string(to_string(expected)) + " pool is empty");
    for (const auto& s : pool)
        if (s.empty()) throw Error(Errc::EmptyPool, "pool contains an empty entry");
}

// Shared driver: `make` draws one (question, cot, answer) from the stream.
template <typename Make>
Dataset run_generator(const GenConfig& cfg, Make make) {
    const std::string task = std::string(to_string(cfg.task));
    const std::string len = std::to_string(cfg.length);
    Rng rng(cfg.seed, fnv1a64(task + "/" + cfg.split + "/L" + len));
    Dataset ds;
    ds.name = task + "-" + cfg.split;
    ds.examples.reserve(cfg.n);
    const std::size_t max_attempts = 1000 * (cfg.n + 1);
    std::size_t attempts = 0;
    while (ds.examples.size() < cfg.n) {
        if (++attempts > max_attempts)
            throw Error(Errc::EmptyPool, "pool too small to draw " + std::to_string(cfg.n) + " unseen questions");
        Example e = make(rng);
        if (cfg.exclude && cfg.exclude->contains(e.question)) continue;
        e.id = task + "-" + cfg.split + "-L" + len + "-s" + std::to_string(cfg.seed) + "-" +
               std::to_string(ds.examples.size());
        e.task = task_kind(cfg.task);
        e.meta["length"] = len;
        ds.examples.push_back(std::move(e));
    }
    return ds;
}

}  // namespace

// ---------------------------------------------------------------------------
// Templates

Templates Templates::parse(std::string_view text) {
    Templates t;
    for (const auto& line : assets::lines(text)) {
        auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(Errc::ParseError, "template line without '=': " + line);
        t.entries_[std::string(trim(std::string_view(line).substr(0, eq)))] =
            std::string(trim(std::string_view(line).substr(eq + 1)));
    }
    return t;
}

const Templates& Templates::builtin() {
    static const Templates t = parse(assets::get("templates/symbolic.txt"));
    return t;
}

const std::string& Templates::get(std::string_view key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw Error(Errc::ParseError, "missing template '" + std::string(key) + "'");
    return it->second;
}

std::string Templates::fill(std::string_view key, const std::map<std::string, std::string>& values) const {
    const std::string& tpl = get(key);
    std::string out;
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        auto open = tpl.find('{', pos);
        if (open == std::string::npos) break;
        auto close = tpl.find('}', open);
        if (close == std::string::npos) break;
        out.append(tpl, pos, open - pos);
        std::string name = tpl.substr(open + 1, close - open - 1);
        auto it = values.find(name);
        if (it == values.end())
            throw Error(Errc::ParseError, "template '" + std::string(key) + "' has unbound {" + name + "}");
        out += it->second;
        pos = close + 1;
    }
    out.append(tpl, pos);
    return out;
}

std::optional<std::string> Templates::match(std::string_view key, std::string_view text) const {
    const std::string& tpl = get(key);
    auto open = tpl.find('{');
    auto close = tpl.find('}', open);
    if (open == std::string::npos || close == std::string::npos) return std::nullopt;
    std::string_view prefix(tpl.data(), open);
    std::string_view suffix(tpl.data() + close + 1, tpl.size() - close - 1);
    if (text.size() <= prefix.size() + suffix.size()) return std::nullopt;
    if (!text.starts_with(prefix) || !text.ends_with(suffix)) return std::nullopt;
    return std::string(text.substr(prefix.size(), text.size() - prefix.size() - suffix.size()));
}

std::vector<std::string> builtin_names() { return assets::lines(assets::get("pools/names.txt")); }
std::vector<std::string> builtin_words() { return assets::lines(assets::get("pools/words.txt")); }

std::string_view to_string(SymbolicTask t) { return t == SymbolicTask::LastLetter ? "last_letter" : "coinflip"; }

SymbolicTask symbolic_task_from_string(std::string_view s) {
    switch (task_from_string(s)) {
        case TaskKind::LastLetter: return SymbolicTask::LastLetter;
        case TaskKind::Coinflip: return SymbolicTask::Coinflip;
        default: throw Error(Errc::InvalidArgument, "not a symbolic task: '" + std::string(s) + "'");
    }
}

TaskKind task_kind(SymbolicTask t) { return t == SymbolicTask::LastLetter ? TaskKind::LastLetter : TaskKind::Coinflip; }

// ---------------------------------------------------------------------------
// Sentence builders

std::string last_letter_question(const std::vector<std::string>& words, const Templates& t) {
    return t.fill("last_letter.question", {{"words", join(words, " ")}});
}

std::string last_letter_cot(const std::vector<std::string>& words, const Templates& t) {
    std::vector<std::string> parts;
    std::string answer;
    for (const auto& w : words) {
        std::string letter(1, w.back());
        answer += letter;
        parts.push_back(t.fill("last_letter.step", {{"word", w}, {"letter", letter}}));
    }
    parts.push_back(t.fill("last_letter.conclusion", {{"answer", answer}}));
    parts.push_back(t.fill("last_letter.answer", {{"answer", answer}}));
    return join(parts, " ");
}

std::string coinflip_question(const std::vector<std::string>& names, const std::vector<bool>& flips,
                              const Templates& t) {
    std::vector<std::string> parts{t.get("coinflip.start")};
    for (std::size_t i = 0; i < names.size(); ++i)
        parts.push_back(t.fill(flips[i] ? "coinflip.flip" : "coinflip.no_flip", {{"name", names[i]}}));
    parts.push_back(t.get("coinflip.ask"));
    return join(parts, " ");
}

std::string coinflip_cot(const std::vector<std::string>& names, const std::vector<bool>& flips, const Templates& t) {
    std::vector<std::string> flippers;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (flips[i]) flippers.push_back(names[i]);
    const std::size_t f = flippers.size();
    const bool even = f % 2 == 0;
    std::vector<std::string> parts;
    parts.push_back(flippers.empty() ? t.get("coinflip.no_flippers")
                                     : t.fill("coinflip.flippers", {{"names", join_names(flippers)}}));
    parts.push_back(t.fill("coinflip.count", {{"count", std::to_string(f)},
                                              {"times", f == 1 ? "time" : "times"},
                                              {"parity", even ? "even" : "odd"}}));
    parts.push_back(t.get(even ? "coinflip.even" : "coinflip.odd"));
    parts.push_back(t.fill("coinflip.answer", {{"answer", even ? "yes" : "no"}}));
    return join(parts, " ");
}

std::optional<std::vector<std::string>> parse_last_letter_question(std::string_view q, const Templates& t) {
    auto words = t.match("last_letter.question", q);
    if (!words) return std::nullopt;
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < words->size()) {
        auto sp = words->find(' ', pos);
        if (sp == std::string::npos) sp = words->size();
        if (sp > pos) out.push_back(words->substr(pos, sp - pos));
        pos = sp + 1;
    }
    if (out.empty()) return std::nullopt;
    return out;
}

std::optional<CoinflipEvents> parse_coinflip_question(std::string_view q, const Templates& t) {
    const std::string start = t.get("coinflip.start") + " ";
    const std::string ask = " " + t.get("coinflip.ask");
    if (!q.starts_with(start) || !q.ends_with(ask) || q.size() < start.size() + ask.size()) return std::nullopt;
    std::string_view body = q.substr(start.size(), q.size() - start.size() - ask.size());
    CoinflipEvents ev;
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto end = body.find(". ", pos);
        std::string_view sentence = end == std::string_view::npos ? body.substr(pos) : body.substr(pos, end + 1 - pos);
        if (auto name = t.match("coinflip.no_flip", sentence)) {
            ev.names.push_back(*name);
            ev.flips.push_back(false);
        } else if (auto name2 = t.match("coinflip.flip", sentence)) {
            ev.names.push_back(*name2);
            ev.flips.push_back(true);
        } else {
            return std::nullopt;
        }
        if (end == std::string_view::npos) break;
        pos = end + 2;
    }
    if (ev.names.empty()) return std::nullopt;
    return ev;
}

// ---------------------------------------------------------------------------
// Generators

Dataset gen_last_letter(const GenConfig& cfg) {
    check_config(cfg, SymbolicTask::LastLetter);
    const Templates& t = templates_of(cfg.templates);
    return run_generator(cfg, [&](Rng& rng) {
        auto words = draw(rng, cfg.word_pool, cfg.length);
        std::string answer;
        for (const auto& w : words) answer += w.back();
        Example e;
        e.question = last_letter_question(words, t);
        e.gold_cot = last_letter_cot(words, t);
        e.gold_answer = AnswerValue::text(answer);
        return e;
    });
}

Dataset gen_coinflip(const GenConfig& cfg) {
    check_config(cfg, SymbolicTask::Coinflip);
    const Templates& t = templates_of(cfg.templates);
    return run_generator(cfg, [&](Rng& rng) {
        auto names = draw(rng, cfg.name_pool, cfg.length);
        std::vector<bool> flips;
        std::size_t f = 0;
        for (int i = 0; i < cfg.length; ++i) {
            flips.push_back(rng.coin());
            f += flips.back() ? 1 : 0;
        }
        Example e;
        e.question = coinflip_question(names, flips, t);
        e.gold_cot = coinflip_cot(names, flips, t);
        e.gold_answer = AnswerValue::yes_no(f % 2 == 0);
        return e;
    });
}

Dataset generate(const GenConfig& cfg) {
    return cfg.task == SymbolicTask::LastLetter ? gen_last_letter(cfg) : gen_coinflip(cfg);
}

SymbolicSuite gen_ood_suite(const SuiteConfig& cfg) {
    GenConfig g;
    g.task = cfg.task;
    g.n = cfg.n;
    g.seed = cfg.seed;
    g.name_pool = cfg.name_pool;
    g.word_pool = cfg.word_pool;
    g.templates = cfg.templates;

    SymbolicSuite suite;
    g.length = cfg.train_length;
    g.split = "train";
    suite.train = generate(g);

    std::unordered_set<std::string> seen;
    for (const auto& e : suite.train.examples) seen.insert(e.question);
    g.split = "test";
    g.exclude = &seen;
    suite.test = generate(g);

    for (int len : cfg.ood_lengths) {
        g.length = len;
        g.split = "ood" + std::to_string(len);
        g.exclude = len == cfg.train_length ? &seen : nullptr;
        suite.ood.push_back(generate(g));
    }
    return suite;
}

}  // namespace cotkd
