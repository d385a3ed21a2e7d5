#include "folio/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "folio/errors.hpp"
#include "folio/prompts.hpp"
#include "folio/schema.hpp"

namespace folio::assess {
namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : ", ") + i;
    return out;
}

// Resolves an anchor id to its text in the rendered document.
std::optional<std::string> anchor_text(const doc::SourceDocument& material, const std::string& anchor_id) {
    if (const auto* s = material.find_section(anchor_id)) return doc::SourceDocument::section_text(*s);
    if (const auto* b = material.find_block(anchor_id)) return b->text;
    return std::nullopt;
}

MCQuestion build_question(const Json& j, const std::string& grounding_ref, std::string_view salt) {
    MCQuestion q;
    q.stem = j["stem"].get<std::string>();
    q.options = j["options"].get<std::vector<std::string>>();
    q.correct_index = j["correct_index"].get<int>();
    q.difficulty = difficulty_from_string(j["difficulty"].get<std::string>());
    q.topic_tag = j["topic_tag"].get<std::string>();
    if (j.contains("feedback") && j["feedback"].is_string()) q.feedback = j["feedback"].get<std::string>();
    q.grounding_ref = grounding_ref;
    q.id = content_id("mcq", grounding_ref + "\x1f" + std::string(salt) + "\x1f" + q.stem);
    return q;
}

}  // namespace

std::string_view to_string(Difficulty d) {
    switch (d) {
        case Difficulty::easy: return "easy";
        case Difficulty::medium: return "medium";
        case Difficulty::hard: return "hard";
    }
    return "easy";
}

Difficulty difficulty_from_string(std::string_view s) {
    if (s == "easy") return Difficulty::easy;
    if (s == "medium") return Difficulty::medium;
    if (s == "hard") return Difficulty::hard;
    throw ValidationError("InvalidQuestion", "unknown difficulty '" + std::string(s) + "'");
}

Json to_json(const MCQuestion& q, bool redact) {
    Json j = {{"id", q.id},
              {"stem", q.stem},
              {"options", q.options},
              {"difficulty", to_string(q.difficulty)},
              {"topic_tag", q.topic_tag},
              {"grounding_ref", q.grounding_ref}};
    if (!redact) {
        j["correct_index"] = q.correct_index;
        j["feedback"] = q.feedback ? Json(*q.feedback) : Json(nullptr);
    }
    return j;
}

Json to_json(const Quiz& quiz, bool redact) {
    Json qs = Json::array();
    for (const auto& q : quiz.questions) qs.push_back(to_json(q, redact));
    return {{"id", quiz.id}, {"section_ref", quiz.section_ref}, {"questions", qs}};
}

Json to_json(const QuizResult& r) {
    return {{"score", r.score},
            {"per_question", r.per_question},
            {"glows", r.glows},
            {"grows", r.grows},
            {"feedback", r.feedback}};
}

MCQuestion question_from_json(const Json& j) {
    std::vector<std::string> violations;
    gateway::validate_question(j, "question", violations);
    if (!violations.empty()) throw ValidationError("InvalidQuestion", violations.front());
    try {
        MCQuestion q = build_question(j, j.at("grounding_ref").get<std::string>(), "");
        q.id = j.at("id").get<std::string>();
        return q;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidQuestion", e.what());
    }
}

Quiz quiz_from_json(const Json& j) {
    try {
        Quiz quiz;
        quiz.id = j.at("id").get<std::string>();
        quiz.section_ref = j.at("section_ref").get<std::string>();
        for (const auto& q : j.at("questions")) quiz.questions.push_back(question_from_json(q));
        return quiz;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidQuiz", e.what());
    }
}

QuizResult quiz_result_from_json(const Json& j) {
    try {
        QuizResult r;
        r.score = j.at("score").get<double>();
        r.per_question = j.at("per_question").get<std::vector<bool>>();
        r.glows = j.at("glows").get<std::vector<std::string>>();
        r.grows = j.at("grows").get<std::vector<std::string>>();
        r.feedback = j.value("feedback", std::string{});
        return r;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidQuizResult", e.what());
    }
}

std::vector<std::string> question_violations(const Json& question, std::string_view anchor) {
    std::vector<std::string> out;
    gateway::validate_question(question, "question", out);
    if (out.empty() && !text::shares_content_word(question["stem"].get<std::string>(), anchor))
        out.push_back("question stem shares no content word with its anchor text");
    return out;
}

MCQuestion generate_embedded_question(const std::string& anchor_id, const personalize::PersonalizedDocument& pdoc,
                                      const gateway::Gateway& gateway, const Config& cfg) {
    const auto material = pdoc.rendered();
    auto anchor = anchor_text(material, anchor_id);
    if (!anchor) throw ValidationError("UnknownAnchor", "anchor " + anchor_id + " does not resolve");

    auto req = prompts::make_request(gateway::TaskTag::embedded_question, cfg.seed, "embedded/" + anchor_id);
    req.add(std::string(prompts::kAnchor), *anchor);
    req.params["anchor_id"] = anchor_id;
    auto response = gateway.generate(std::move(req), [&](const Json& p) { return question_violations(p, *anchor); });
    return build_question(response.payload, anchor_id, "embedded");
}

Quiz generate_quiz(const std::string& section_id, const personalize::PersonalizedDocument& pdoc,
                   const gateway::Gateway& gateway, const Config& cfg) {
    const auto material = pdoc.rendered();
    const auto* section = material.find_section(section_id);
    if (section == nullptr) throw ValidationError("UnknownAnchor", "section " + section_id + " does not resolve");
    const std::string body = doc::SourceDocument::section_text(*section);

    auto req = prompts::make_request(gateway::TaskTag::quiz, cfg.seed, "quiz/" + section_id);
    req.add(std::string(prompts::kSection), section->heading + "\n\n" + body);
    req.params["section_id"] = section_id;
    auto response = gateway.generate(std::move(req), [&](const Json& p) {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < p["questions"].size(); ++i)
            if (!text::shares_content_word(p["questions"][i]["stem"].get<std::string>(), body))
                out.push_back("questions[" + std::to_string(i) + "] is not grounded in the section");
        return out;
    });

    Quiz quiz;
    quiz.section_ref = section_id;
    quiz.id = "quiz-" + section_id;
    const auto& qs = response.payload["questions"];
    for (std::size_t i = 0; i < qs.size(); ++i)
        quiz.questions.push_back(build_question(qs[i], section_id, "quiz" + std::to_string(i)));
    return quiz;
}

QuizResult grade_quiz(const Quiz& quiz, const std::vector<int>& answers) {
    if (answers.size() != quiz.questions.size())
        throw ValidationError("AnswerShapeMismatch", "expected " + std::to_string(quiz.questions.size()) +
                                                         " answers, got " + std::to_string(answers.size()));
    QuizResult result;
    std::vector<std::string> tag_order;
    std::map<std::string, bool> all_correct;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const auto& q = quiz.questions[i];
        if (answers[i] < 0 || answers[i] >= static_cast<int>(q.options.size()))
            throw ValidationError("AnswerShapeMismatch", "answer " + std::to_string(i) + " is out of option bounds");
        bool ok = answers[i] == q.correct_index;
        result.per_question.push_back(ok);
        correct += ok ? 1 : 0;
        auto [it, inserted] = all_correct.emplace(q.topic_tag, ok);
        if (inserted) tag_order.push_back(q.topic_tag);
        else it->second = it->second && ok;
    }
    result.score = quiz.questions.empty() ? 0.0
                                          : static_cast<double>(correct) / static_cast<double>(quiz.questions.size());
    for (const auto& tag : tag_order) (all_correct[tag] ? result.glows : result.grows).push_back(tag);
    result.feedback = template_quiz_feedback(result);
    return result;
}

EmbeddedGrade grade_embedded(const MCQuestion& question, int answer_index) {
    if (answer_index < 0 || answer_index >= static_cast<int>(question.options.size()))
        throw ValidationError("IndexOutOfBounds", "answer index " + std::to_string(answer_index) + " with " +
                                                      std::to_string(question.options.size()) + " options");
    EmbeddedGrade grade;
    grade.correct = answer_index == question.correct_index;
    if (grade.correct) {
        grade.feedback = "Correct! " + question.options[static_cast<std::size_t>(question.correct_index)];
    } else if (question.feedback && !text::trim(*question.feedback).empty()) {
        grade.feedback = "Not quite. " + *question.feedback;
    } else {
        grade.feedback = "Not quite. The answer is: " + question.options[static_cast<std::size_t>(question.correct_index)];
    }
    return grade;
}

std::string template_quiz_feedback(const QuizResult& result) {
    std::string out = "You scored " + std::to_string(static_cast<int>(std::lround(result.score * 100.0))) + "%.";
    if (!result.glows.empty()) out += " Glows: " + join(result.glows) + ".";
    if (!result.grows.empty()) out += " Grows: " + join(result.grows) + ".";
    return out;
}

std::string quiz_feedback(const QuizResult& result, const gateway::Gateway* gateway, const Config& cfg) {
    if (gateway == nullptr) return template_quiz_feedback(result);
    try {
        auto req = prompts::make_request(gateway::TaskTag::quiz_feedback, cfg.seed, "feedback");
        req.add(std::string(prompts::kResult), to_json(result).dump());
        return gateway->generate(std::move(req)).payload["text"].get<std::string>();
    } catch (const Error&) {
        return template_quiz_feedback(result);
    }
}

}  // namespace folio::assess
