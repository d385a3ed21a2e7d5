#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "folio/errors.hpp"
#include "folio/text.hpp"

namespace folio::eval {

enum class Criterion {
    Accuracy,
    Coverage,
    Emphasis,
    Engagement,
    CognitiveLoad,
    ActiveLearning,
    DeepenMetacognition,
    MotivationCuriosity,
    AdaptabilityPersonalization,
    ClarityOfLearningIntentions,
};

inline constexpr std::array<Criterion, 10> kAllCriteria = {
    Criterion::Accuracy,           Criterion::Coverage,
    Criterion::Emphasis,           Criterion::Engagement,
    Criterion::CognitiveLoad,      Criterion::ActiveLearning,
    Criterion::DeepenMetacognition, Criterion::MotivationCuriosity,
    Criterion::AdaptabilityPersonalization, Criterion::ClarityOfLearningIntentions,
};

struct CriterionInfo {
    Criterion id;
    std::string_view name;
    std::string_view summary;
    std::string_view agree;
    std::string_view neutral;
    std::string_view disagree;
};

const CriterionInfo& info(Criterion c);
std::string_view to_string(Criterion c);
// Accepts the canonical names and loose spellings such as "Cognitive load".
Criterion criterion_from_string(std::string_view s);

// The first four criteria form the high-level group, the rest the additional group.
enum class MetricGroup { high_level, additional };
MetricGroup group_of(Criterion c);
std::string_view to_string(MetricGroup g);

struct UnknownCriterion : ValidationError {
    explicit UnknownCriterion(const std::string& what) : ValidationError("UnknownCriterion", what) {}
};
struct InvalidRating : ValidationError {
    explicit InvalidRating(const std::string& what) : ValidationError("InvalidRating", what) {}
};

struct Rating {
    std::string component;
    std::string material;
    std::string rater;
    Criterion criterion = Criterion::Accuracy;
    std::optional<double> value;  // 1.0, 0.5 or 0.0; empty for N/A
};

// Accepts "1", "1.0", "0.5", "0", "0.0", "NA", "N/A" (case-insensitive).
std::optional<double> parse_rating_value(std::string_view s);

// CSV with a header naming component, material, rater, criterion, value
// in any order; or a JSON array of objects with those keys. Empty input is
// EmptyInput.
std::vector<Rating> parse_ratings_csv(std::string_view text);
std::vector<Rating> parse_ratings_json(const Json& j);
std::vector<Rating> load_ratings(const std::filesystem::path& path);

enum class Dimension { component, material, rater, criterion };
Dimension dimension_from_string(std::string_view s);
std::string_view to_string(Dimension d);

struct AggregateRow {
    std::vector<std::string> key;  // one entry per grouping dimension
    std::optional<double> mean;    // empty when every rating is N/A
    std::size_t n = 0;             // numeric ratings
    std::size_t n_na = 0;
};

/// Means of the numeric ratings per group, N/A excluded from both sums.
/// Rows are ordered by key.
std::vector<AggregateRow> aggregate_ratings(const std::vector<Rating>& ratings, const std::vector<Dimension>& group_by);

struct GroupSummary {
    // Mean of the per-criterion means.
    std::optional<double> per_axis_mean;
    // Mean of every numeric rating in the group.
    std::optional<double> pooled_mean;
    std::size_t n = 0;
    std::size_t n_na = 0;
};

struct ComponentReport {
    std::string component;
    std::map<Criterion, AggregateRow> criteria;  // all ten, averaged over raters and materials
    GroupSummary high_level;
    GroupSummary additional;
    GroupSummary overall;
};

struct RubricReport {
    std::vector<ComponentReport> components;
    ComponentReport all;  // every component pooled; component = "*"
};

RubricReport rubric_report(const std::vector<Rating>& ratings);

Json to_json(const AggregateRow& r, const std::vector<Dimension>& group_by);
Json to_json(const RubricReport& r);
// Aligned text table: one row per criterion under its group heading, one
// column per component.
std::string format_table(const RubricReport& r);

}  // namespace folio::eval
