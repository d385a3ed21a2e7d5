#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "folio/document.hpp"
#include "folio/gateway.hpp"

namespace folio::personalize {

// ---------------------------------------------------------------------------
// Readability

struct ReadabilityStats {
    std::size_t words = 0;
    std::size_t sentences = 0;
    std::size_t syllables = 0;
    double fkg = 0.0;
};

// Flesch-Kincaid grade: 0.39 * words/sentences + 11.8 * syllables/words - 15.59.
double fkg_from_counts(double words, double sentences, double syllables);

/// Syllable heuristic: number of vowel groups (a, e, i, o, u, y), minus one
/// for a word-final silent 'e' (a final 'e' after a non-vowel) when more
/// than one group remains; at least 1. Non-letters are ignored.
std::size_t count_syllables(std::string_view word);

/// Words are whitespace tokens holding a letter or digit. Sentences follow
/// text::sentences (terminator followed by whitespace or end; a trailing
/// unterminated run counts as one). Throws ValidationError("EmptyText")
/// when there are no words.
ReadabilityStats readability(std::string_view text);

// ---------------------------------------------------------------------------
// Stage 1

struct Config {
    double tolerance = 1.5;
    int max_relevel_attempts = 3;
    double max_fraction = 0.30;
    int max_segments = 3;
    std::uint64_t seed = 0;
    bool parallel = true;
};

Json to_json(const Config& cfg);

struct CharRange {
    std::size_t begin = 0;  // half-open, byte offsets
    std::size_t end = 0;
    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const CharRange&, const CharRange&) = default;
};

struct SegmentRef {
    std::string block_id;
    CharRange range;
    friend bool operator==(const SegmentRef&, const SegmentRef&) = default;
};

struct PersonalizationSpan {
    std::string block_id;
    CharRange range;  // in the releveled block text
    std::string original_text;
    std::string personalized_text;
    std::string interest;
    friend bool operator==(const PersonalizationSpan&, const PersonalizationSpan&) = default;
};

struct RelevelReport {
    doc::GradeLevel target;
    double achieved_fkg = 0.0;
    int attempts = 0;
    bool accepted = false;
    bool coverage_ok = false;
};

struct RelevelResult {
    doc::SourceDocument releveled;
    RelevelReport report;
};

/// Stage-1 output: releveled base text plus the interest-rewritten spans.
/// Text outside spans is exactly the releveled text.
struct PersonalizedDocument {
    doc::SourceDocument base;
    std::vector<PersonalizationSpan> spans;  // sorted by reading order
    doc::LearnerProfile profile;
    RelevelReport relevel_report;

    std::string final_block_text(const doc::Block& block) const;
    // Base structure with every span applied.
    doc::SourceDocument rendered() const;
};

// Body text used for FKG measurement: block texts joined by blank lines.
std::string body_text(const doc::SourceDocument& doc);

// Every heading with content words shares at least one with its subtree text.
bool headings_covered(const doc::SourceDocument& source, const doc::SourceDocument& candidate);

RelevelResult relevel(const doc::SourceDocument& doc, doc::GradeLevel target, const gateway::Gateway& gateway,
                      const Config& cfg);

// Violations for a proposed segment set; empty when valid.
std::vector<std::string> validate_segments(const doc::SourceDocument& doc, const std::vector<SegmentRef>& segments,
                                           double max_fraction);

std::vector<SegmentRef> select_personalizable_segments(const doc::SourceDocument& releveled,
                                                       const std::string& interest,
                                                       const gateway::Gateway& gateway, const Config& cfg);

// Splices spans (any order, non-overlapping) into `base`.
std::string apply_spans(std::string_view base, std::vector<PersonalizationSpan> spans);

PersonalizedDocument personalize(const doc::SourceDocument& doc, const doc::LearnerProfile& profile,
                                 const gateway::Gateway& gateway, const Config& cfg,
                                 const std::vector<std::string>& catalog = doc::default_interest_catalog());

Json to_json(const PersonalizedDocument& pdoc);
PersonalizedDocument personalized_from_json(const Json& j);

}  // namespace folio::personalize
