#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "folio/assessment.hpp"
#include "folio/errors.hpp"
#include "folio/gateway.hpp"
#include "folio/personalization.hpp"

namespace folio::immersive {

struct Config {
    int min_timeline_items = 3;
    std::uint64_t seed = 0;
    bool parallel = true;
};

struct TimelineItem {
    std::string label;
    std::string description;
    friend bool operator==(const TimelineItem&, const TimelineItem&) = default;
};

struct Timeline {
    std::string id;
    std::string anchor_section;
    std::vector<TimelineItem> items;  // canonical order
    bool exercise_enabled = true;

    std::vector<std::string> labels() const;
    friend bool operator==(const Timeline&, const Timeline&) = default;
};

struct Mnemonic {
    std::string id;
    std::string anchor_section;
    std::vector<std::string> items;
    std::string sentence;
    friend bool operator==(const Mnemonic&, const Mnemonic&) = default;
};

inline constexpr std::string_view kPendingImage = "pending";

struct IllustrationSpec {
    std::string id;
    std::string anchor_block;
    std::string brief;
    std::string caption;
    std::string image_ref{kPendingImage};
    friend bool operator==(const IllustrationSpec&, const IllustrationSpec&) = default;
};

/// External image model. render() returns an opaque handle and throws a
/// folio::Error when the image cannot be produced.
class ImageProvider {
public:
    virtual ~ImageProvider() = default;
    virtual std::string render(const IllustrationSpec& spec) = 0;
};

// Deterministic handle derived from the brief; `available = false` makes
// every call fail with ProviderUnavailable.
class MockImageProvider : public ImageProvider {
public:
    explicit MockImageProvider(bool available = true) : available_(available) {}
    std::string render(const IllustrationSpec& spec) override;

private:
    bool available_;
};

struct DanglingAnchor : ValidationError {
    explicit DanglingAnchor(const std::string& what) : ValidationError("DanglingAnchor", what) {}
};

/// Timelines proposed by the provider. A candidate is kept only if its
/// section exists, it has at least min_timeline_items unique labels, and
/// every label occurs (case-folded) in that section's text. At most one
/// timeline per section; invalid candidates are dropped.
std::vector<Timeline> detect_sequences(const personalize::PersonalizedDocument& pdoc,
                                       const gateway::Gateway& gateway, const Config& cfg);

// Fraction of positions matching the canonical order. Throws
// ValidationError("NotAPermutation").
double grade_timeline_submission(const Timeline& timeline, const std::vector<std::string>& submitted);

/// True iff the sentence has at least items.size() words and word i starts,
/// case-insensitively, with the first letter of item i.
bool validate_mnemonic(const std::vector<std::string>& items, std::string_view sentence);

// Throws PreconditionViolation unless 2 <= facts.size() <= 10.
Mnemonic generate_mnemonic(const std::vector<std::string>& facts, const gateway::Gateway& gateway,
                           const Config& cfg, const std::string& anchor_section = {});

/// Lets the provider pick the key terms of one section, then composes the
/// mnemonic for them. Sections holding a list block are the candidates.
Mnemonic generate_section_mnemonic(const std::string& section_id, const personalize::PersonalizedDocument& pdoc,
                                   const gateway::Gateway& gateway, const Config& cfg);
std::vector<std::string> mnemonic_candidate_sections(const doc::SourceDocument& material);

/// Specs anchored to existing blocks, at most one per section. Images are
/// then requested from `images`; a failure leaves image_ref "pending".
std::vector<IllustrationSpec> plan_illustrations(const personalize::PersonalizedDocument& pdoc,
                                                 const gateway::Gateway& gateway, ImageProvider* images,
                                                 const Config& cfg);

struct Addons {
    std::vector<Timeline> timelines;
    std::vector<Mnemonic> mnemonics;
    std::vector<IllustrationSpec> illustrations;
};

struct Assessments {
    std::vector<assess::MCQuestion> embedded;
    std::vector<assess::Quiz> quizzes;
};

enum class AddonKind { timeline, mnemonic, illustration, embedded_question, quiz };
std::string_view to_string(AddonKind kind);

struct Placement {
    AddonKind kind = AddonKind::timeline;
    std::string ref;  // id of the artifact
    friend bool operator==(const Placement&, const Placement&) = default;
};

struct SectionAddons {
    std::string section_id;
    std::vector<Placement> placements;
    friend bool operator==(const SectionAddons&, const SectionAddons&) = default;
};

struct ImmersiveDocument {
    personalize::PersonalizedDocument pdoc;
    Addons addons;
    Assessments assessments;
    std::vector<SectionAddons> sections;  // one entry per section, reading order

    const assess::Quiz* find_quiz(std::string_view id) const;
    const assess::MCQuestion* find_question(std::string_view id) const;
    const Timeline* find_timeline(std::string_view id) const;
};

/// Places every artifact after its section in the order timelines,
/// mnemonics, illustrations, embedded questions, quiz. Throws
/// DanglingAnchor when an anchor does not resolve.
ImmersiveDocument assemble_immersive(const personalize::PersonalizedDocument& pdoc, Addons addons,
                                     Assessments assessments);

Json to_json(const Timeline& t);
Json to_json(const Mnemonic& m);
Json to_json(const IllustrationSpec& s);
// `redact` hides answers: question keys, and the canonical timeline order
// (items are listed alphabetically instead).
Json to_json(const ImmersiveDocument& doc, bool redact = false);
ImmersiveDocument immersive_from_json(const Json& j);

}  // namespace folio::immersive
