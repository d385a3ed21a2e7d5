#pragma once

#include <optional>
#include <string>
#include <vector>

#include "folio/errors.hpp"
#include "folio/gateway.hpp"
#include "folio/personalization.hpp"

namespace folio::views {

struct Config {
    int max_bullets = 5;
    double words_per_second = 2.5;
    int max_turns = 20;
    double coverage_threshold = 0.9;
    int reveal_per_turn = 2;
    std::uint64_t seed = 0;
    bool parallel = true;
};

Json to_json(const Config& cfg);

// ---------------------------------------------------------------------------
// Slides

struct Slide {
    std::string title;
    std::vector<std::string> bullets;
    std::optional<std::string> visual_brief;
    std::optional<std::string> opener_question;
    std::optional<std::string> activity;
    std::vector<std::string> section_refs;
    friend bool operator==(const Slide&, const Slide&) = default;
};

struct SlideDeck {
    std::vector<Slide> slides;
    // Sections deliberately left out; disjoint from the referenced ones.
    std::vector<std::string> omissions;

    std::vector<std::string> referenced_sections() const;
    friend bool operator==(const SlideDeck&, const SlideDeck&) = default;
};

struct NarrationSegment {
    std::size_t slide_index = 0;
    std::string text;
    double estimated_seconds = 0.0;
    friend bool operator==(const NarrationSegment&, const NarrationSegment&) = default;
};

struct NarrationTrack {
    std::vector<NarrationSegment> segments;
    friend bool operator==(const NarrationTrack&, const NarrationTrack&) = default;
};

SlideDeck generate_slides(const personalize::PersonalizedDocument& pdoc, const gateway::Gateway& gateway,
                          const Config& cfg);

// One segment per slide; throws PreconditionViolation for an empty deck.
NarrationTrack generate_narration(const SlideDeck& deck, const gateway::Gateway& gateway, const Config& cfg);

double estimate_seconds(std::string_view text, double words_per_second);

// Plain-text outline of a deck for inspection.
std::string slide_outline(const SlideDeck& deck);

// ---------------------------------------------------------------------------
// Audio-graphic lesson

struct ConceptNode {
    std::string id;
    std::string label;
    std::string summary;
    friend bool operator==(const ConceptNode&, const ConceptNode&) = default;
};

struct ConceptEdge {
    std::string from;
    std::string to;
    std::string relation_label;
    friend bool operator==(const ConceptEdge&, const ConceptEdge&) = default;
};

struct ConceptGraph {
    std::vector<ConceptNode> nodes;
    std::vector<ConceptEdge> edges;
    bool contains(std::string_view id) const;
    friend bool operator==(const ConceptGraph&, const ConceptGraph&) = default;
};

enum class Speaker { teacher, student };
enum class Termination { coverage_met, max_turns };

struct DialogueTurn {
    Speaker speaker = Speaker::teacher;
    std::string text;
    std::vector<std::string> revealed_concepts;
    friend bool operator==(const DialogueTurn&, const DialogueTurn&) = default;
};

struct DialogueLesson {
    std::vector<DialogueTurn> turns;
    ConceptGraph concept_graph;
    Termination termination = Termination::max_turns;
    friend bool operator==(const DialogueLesson&, const DialogueLesson&) = default;
};

struct IsolationViolation : ValidationError {
    explicit IsolationViolation(const std::string& what) : ValidationError("IsolationViolation", what) {}
};

ConceptGraph generate_concept_graph(const personalize::PersonalizedDocument& pdoc, const gateway::Gateway& gateway,
                                    const Config& cfg);

/// Teacher turns see the personalized text plus the history; student turns
/// see the history only. Every student request is checked against the
/// material and IsolationViolation is thrown before it is sent if any
/// block of the material appears in it. Stops once the revealed-concept
/// fraction reaches coverage_threshold or after max_turns turns.
DialogueLesson generate_dialogue_lesson(const personalize::PersonalizedDocument& pdoc,
                                        const gateway::Gateway& gateway, const Config& cfg);

// ---------------------------------------------------------------------------
// Mind map

struct Annotation {
    enum class Kind { text, image_ref };
    Kind kind = Kind::text;
    std::string value;
    friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct MindNode {
    std::string id;
    std::string label;
    std::optional<std::string> section_ref;
    std::optional<Annotation> annotation;  // leaves only
    bool expanded = false;
    std::vector<MindNode> children;
    friend bool operator==(const MindNode&, const MindNode&) = default;
};

struct MindMap {
    MindNode root;

    const MindNode* find(std::string_view id) const;
    std::size_t node_count() const;
    friend bool operator==(const MindMap&, const MindMap&) = default;
};

/// First-level children follow the document's top-level sections in order.
/// Initially only the root is expanded.
MindMap generate_mind_map(const personalize::PersonalizedDocument& pdoc, const gateway::Gateway& gateway,
                          const Config& cfg);

// Flips one node's expanded flag. Throws ValidationError("UnknownNode").
MindMap toggle_node(MindMap map, std::string_view node_id);

Json to_json(const SlideDeck& deck);
Json to_json(const NarrationTrack& track);
Json to_json(const ConceptGraph& graph);
Json to_json(const DialogueLesson& lesson);
Json to_json(const MindMap& map);
SlideDeck slide_deck_from_json(const Json& j);
NarrationTrack narration_from_json(const Json& j);
DialogueLesson lesson_from_json(const Json& j);
MindMap mind_map_from_json(const Json& j);

}  // namespace folio::views
