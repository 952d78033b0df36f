#include "cotkd/promptkit.hpp"

#include "cotkd/assets.hpp"
#include "cotkd/filtering.hpp"

#include "json.hpp"

namespace cotkd {

namespace {

TaskKind inferred_task(const AnswerValue& a) {
    switch (a.kind()) {
        case AnswerValue::Kind::Number: return TaskKind::Arithmetic;
        case AnswerValue::Kind::YesNo: return TaskKind::YesNo;
        case AnswerValue::Kind::Text: return TaskKind::LastLetter;
    }
    return TaskKind::Arithmetic;
}

AnswerValue exemplar_answer(const nlohmann::json& j) {
    if (j.is_boolean()) return AnswerValue::yes_no(j.get<bool>());
    if (j.is_number()) return AnswerValue::number(normalize_number(j.dump()));
    std::string s = j.get<std::string>();
    if (auto b = parse_yes_no(s)) return AnswerValue::yes_no(*b);
    if (auto n = try_normalize_number(s)) return AnswerValue::number(*n);
    return AnswerValue::text(s);
}

std::string question_line(std::string_view question, const AnswerValue& answer, bool conditioned) {
    std::string out = "Q: ";
    out += question;
    if (conditioned) out += answer_hint(answer);
    return out;
}

}  // namespace

void PromptSpec::validate() const {
    if (exemplars.empty()) throw Error(Errc::InvalidArgument, "prompt needs at least one exemplar");
    if (stop_sequences.empty()) throw Error(Errc::InvalidArgument, "prompt needs at least one stop sequence");
}

std::string answer_hint(const AnswerValue& answer) { return " (Answer: " + answer.render() + ")"; }

std::string build_prompt(const PromptSpec& spec, const Example& target) {
    std::string out;
    for (const auto& ex : spec.exemplars) {
        out += question_line(ex.question, ex.answer, spec.conditioned);
        out += "\nA: ";
        out += with_answer_sentence(ex.cot, ex.answer);
        out += "\n\n";
    }
    out += question_line(target.question, target.gold_answer, spec.conditioned);
    out += "\nA:";
    return out;
}

std::vector<Exemplar> parse_exemplars(std::string_view jsonl) {
    std::vector<Exemplar> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t nl = jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = jsonl.size();
        std::string_view line = trim(jsonl.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        Exemplar ex;
        try {
            auto j = nlohmann::json::parse(line);
            ex.question = j.at("question").get<std::string>();
            ex.cot = j.at("cot").get<std::string>();
            ex.answer = exemplar_answer(j.at("answer"));
        } catch (const std::exception& e) {
            throw Error(Errc::ParseError, "exemplar line " + std::to_string(line_no) + ": " + e.what());
        }
        auto extracted = extract_answer(ex.cot, inferred_task(ex.answer));
        if (!is_correct(extracted, ex.answer))
            throw Error(Errc::InconsistentExemplar,
                        "exemplar " + std::to_string(out.size()) + ": CoT concludes " +
                            (extracted ? extracted->render() : std::string("nothing")) + ", answer is " +
                            ex.answer.render());
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<Exemplar> load_exemplars(const std::filesystem::path& path) {
    return parse_exemplars(assets::load_text(path.string(), ""));
}

std::vector<Exemplar> default_exemplars(TaskKind task) {
    switch (task) {
        case TaskKind::Arithmetic: return parse_exemplars(assets::get("exemplars/arithmetic.jsonl"));
        case TaskKind::YesNo: return parse_exemplars(assets::get("exemplars/yesno.jsonl"));
        default: throw Error(Errc::InvalidArgument, "no default exemplars for " + std::string(to_string(task)));
    }
}

}  // namespace cotkd
