#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "folio/assessment.hpp"
#include "folio/immersive.hpp"
#include "folio/personalization.hpp"
#include "folio/transformations.hpp"

namespace folio::pipeline {

struct Config {
    personalize::Config personalization;
    views::Config views;
    immersive::Config immersive;
    std::uint64_t seed = 0;  // overrides the per-stage seeds
    bool concurrent = true;
};

Json to_json(const Config& cfg);
// Unknown keys are rejected with ValidationError("UnknownConfigKey").
Config config_from_json(const Json& j);

struct ArtifactFailure {
    std::string code;
    std::string message;
    friend bool operator==(const ArtifactFailure&, const ArtifactFailure&) = default;
};

/// Output of one end-to-end run. Stage-2 artifacts that failed are absent
/// and listed in `failures` under their artifact name.
struct ContentBundle {
    std::string id;
    personalize::PersonalizedDocument pdoc;
    std::optional<immersive::ImmersiveDocument> immersive;
    std::optional<views::SlideDeck> slides;
    std::optional<views::NarrationTrack> narration;
    std::optional<views::DialogueLesson> lesson;
    std::optional<views::MindMap> mindmap;
    std::vector<assess::Quiz> quizzes;          // per section, reading order
    std::vector<assess::MCQuestion> embedded;   // per anchor, reading order
    std::map<std::string, ArtifactFailure> failures;
    Json manifest;
    // Wall-clock milliseconds per stage; kept out of the manifest so that
    // serialized bundles stay byte-identical across runs.
    std::map<std::string, double> timings_ms;
};

/// Stage 1 runs once; every Stage-2 generator consumes its output. Stage-2
/// failures become per-artifact markers; a Stage-1 failure propagates.
ContentBundle run_pipeline(const doc::SourceDocument& doc, const doc::LearnerProfile& profile,
                           const gateway::Gateway& gateway, const Config& cfg,
                           immersive::ImageProvider* images = nullptr);

// Canonical hash of a personalized document, shared by all manifest entries.
std::string pdoc_hash(const personalize::PersonalizedDocument& pdoc);

// Whole bundle as one JSON value (timings excluded).
Json to_json(const ContentBundle& bundle);
ContentBundle bundle_from_json(const Json& j);

/// Directory layout: manifest.json, pdoc.json, immersive.json, slides.json,
/// slides.txt, narration.json, lesson.json, mindmap.json, quizzes.json,
/// embedded.json, timings.json. Failed artifacts have no file.
void write_bundle(const ContentBundle& bundle, const std::filesystem::path& dir);
ContentBundle read_bundle(const std::filesystem::path& dir);

}  // namespace folio::pipeline
