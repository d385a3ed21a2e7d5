#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "folio/errors.hpp"
#include "folio/text.hpp"

namespace folio::doc {

enum class BlockKind { paragraph, list, figure_caption, table_text };

std::string_view to_string(BlockKind kind);
BlockKind block_kind_from_string(std::string_view name);

struct Block {
    std::string id;
    BlockKind kind = BlockKind::paragraph;
    std::string text;

    // Length in bytes of the UTF-8 text.
    std::size_t char_length() const noexcept { return text.size(); }

    friend bool operator==(const Block&, const Block&) = default;
};

struct Section {
    std::string id;
    std::string heading;
    int depth = 1;
    std::vector<Block> blocks;

    friend bool operator==(const Section&, const Section&) = default;
};

/// Ingested source-of-truth material. Sections are stored flat in reading
/// order; nesting is carried by `depth` (a section's parent is the nearest
/// preceding section one level shallower).
struct SourceDocument {
    std::string id;
    std::string title;
    std::vector<Section> sections;
    std::optional<std::string> source_uri;

    const Section* find_section(std::string_view section_id) const;
    const Block* find_block(std::string_view block_id) const;
    // Section owning the given block, or nullptr.
    const Section* section_of_block(std::string_view block_id) const;
    // Block texts of one section joined by blank lines.
    static std::string section_text(const Section& section);
    std::size_t total_chars() const;

    friend bool operator==(const SourceDocument&, const SourceDocument&) = default;
};

/// Parses heading-marker plain text ("# Title", "## Sub") into a document.
/// Paragraph whitespace is normalized; list and table lines are trimmed and
/// kept one per line. Throws EmptyInput, MalformedHeadingNesting, or
/// ValidationError("EmptySection") for a heading with nothing under it.
SourceDocument ingest(std::string_view raw_text, std::optional<std::string> source_uri = {});

// Headings and block texts in reading order separated by single blank lines,
// without heading markers.
std::string flatten_text(const SourceDocument& doc);

// Same content with heading markers restored; ingest(render_marked(d)) == d.
std::string render_marked(const SourceDocument& doc);

Json to_json(const SourceDocument& doc);
SourceDocument document_from_json(const Json& j);

// ---------------------------------------------------------------------------
// Learner profile

/// Reading grade 1-12, or undergraduate (numeric value 13).
class GradeLevel {
public:
    static constexpr int kUndergraduate = 13;

    GradeLevel() = default;
    explicit GradeLevel(int value);
    static GradeLevel parse(std::string_view text);  // "7" or "undergraduate"

    int value() const noexcept { return value_; }
    double numeric() const noexcept { return static_cast<double>(value_); }
    std::string to_string() const;

    friend bool operator==(const GradeLevel&, const GradeLevel&) = default;

private:
    int value_ = 7;
};

const std::vector<std::string>& default_interest_catalog();

struct LearnerProfile {
    GradeLevel grade;
    std::string interest;

    friend bool operator==(const LearnerProfile&, const LearnerProfile&) = default;
};

// Throws ValidationError("UnknownInterest") when interest is not catalogued.
void validate_profile(const LearnerProfile& profile, const std::vector<std::string>& catalog);

Json to_json(const LearnerProfile& profile);
LearnerProfile profile_from_json(const Json& j);

}  // namespace folio::doc
