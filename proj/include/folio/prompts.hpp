#pragma once

#include <string>
#include <string_view>

#include "folio/document.hpp"
#include "folio/gateway.hpp"

// Context-part conventions shared by the generators and the mock provider.
// Prompt wording is an implementation asset; only the labels are relied on.
namespace folio::prompts {

inline constexpr std::string_view kInstruction = "instruction";
inline constexpr std::string_view kInterest = "interest";
inline constexpr std::string_view kHeading = "section_heading";
inline constexpr std::string_view kOutline = "outline";
inline constexpr std::string_view kSegment = "segment";
inline constexpr std::string_view kSurrounding = "surrounding";
inline constexpr std::string_view kSlide = "slide";
inline constexpr std::string_view kSource = "source";
inline constexpr std::string_view kConcepts = "concepts";
inline constexpr std::string_view kHistory = "history";
inline constexpr std::string_view kItems = "items";
inline constexpr std::string_view kSection = "section";
inline constexpr std::string_view kAnchor = "anchor";
inline constexpr std::string_view kResult = "result";
inline constexpr std::string_view kRelevelFeedback = "relevel_feedback";
inline constexpr std::string_view kBlockPrefix = "block:";

std::string instruction(gateway::TaskTag tag);

// JSON outline of a document: [{id, heading, depth, text, blocks:[{id, kind, text}]}].
Json outline(const doc::SourceDocument& doc);

gateway::GenerationRequest make_request(gateway::TaskTag tag, std::uint64_t seed, std::string_view salt);

}  // namespace folio::prompts
