#pragma once

#include <optional>
#include <string>
#include <vector>

#include "folio/gateway.hpp"
#include "folio/personalization.hpp"

namespace folio::assess {

enum class Difficulty { easy, medium, hard };

std::string_view to_string(Difficulty d);
Difficulty difficulty_from_string(std::string_view s);

struct MCQuestion {
    std::string id;
    std::string stem;
    std::vector<std::string> options;
    int correct_index = 0;
    Difficulty difficulty = Difficulty::easy;
    std::string topic_tag;
    std::string grounding_ref;  // section or block id
    std::optional<std::string> feedback;

    friend bool operator==(const MCQuestion&, const MCQuestion&) = default;
};

struct Quiz {
    std::string id;
    std::string section_ref;
    std::vector<MCQuestion> questions;

    friend bool operator==(const Quiz&, const Quiz&) = default;
};

struct QuizResult {
    double score = 0.0;
    std::vector<bool> per_question;
    std::vector<std::string> glows;
    std::vector<std::string> grows;
    std::string feedback;

    friend bool operator==(const QuizResult&, const QuizResult&) = default;
};

struct EmbeddedGrade {
    bool correct = false;
    std::string feedback;
};

struct Config {
    std::uint64_t seed = 0;
};

// Learner-facing serialization omits correct_index and feedback until the
// learner has submitted (redact = true).
Json to_json(const MCQuestion& q, bool redact = false);
Json to_json(const Quiz& quiz, bool redact = false);
Json to_json(const QuizResult& result);
MCQuestion question_from_json(const Json& j);
Quiz quiz_from_json(const Json& j);
QuizResult quiz_result_from_json(const Json& j);

// Violations of the single-question invariants, including the grounding
// rule: some content word of the stem occurs in `anchor_text`.
std::vector<std::string> question_violations(const Json& question, std::string_view anchor_text);

/// Anchor may be a section id or a block id of the personalized document.
/// Throws ValidationError("UnknownAnchor") when it does not resolve.
MCQuestion generate_embedded_question(const std::string& anchor_id, const personalize::PersonalizedDocument& pdoc,
                                      const gateway::Gateway& gateway, const Config& cfg);

Quiz generate_quiz(const std::string& section_id, const personalize::PersonalizedDocument& pdoc,
                   const gateway::Gateway& gateway, const Config& cfg);

// Throws ValidationError("AnswerShapeMismatch").
QuizResult grade_quiz(const Quiz& quiz, const std::vector<int>& answers);

// Throws ValidationError("IndexOutOfBounds").
EmbeddedGrade grade_embedded(const MCQuestion& question, int answer_index);

std::string template_quiz_feedback(const QuizResult& result);

// Asks the provider for feedback text; falls back to the template on any
// provider or validation failure.
std::string quiz_feedback(const QuizResult& result, const gateway::Gateway* gateway, const Config& cfg);

}  // namespace folio::assess
