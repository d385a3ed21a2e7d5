#pragma once

#include <string>
#include <vector>

#include "folio/text.hpp"

namespace folio::gateway {

// Multiple-choice question shape shared by embedded questions and quizzes:
// 3-5 distinct options, one in-bounds correct_index, a difficulty of
// easy/medium/hard and a topic tag.
void validate_question(const Json& question, const std::string& where, std::vector<std::string>& out);

}  // namespace folio::gateway
