#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "folio/errors.hpp"
#include "folio/text.hpp"

namespace folio::eval {

enum class Alternative { two_sided, greater, less };
enum class Method { mann_whitney_exact, mann_whitney_normal_approx, shapiro_wilk };

std::string_view to_string(Alternative a);
std::string_view to_string(Method m);
Alternative alternative_from_string(std::string_view s);

struct TestResult {
    double statistic = 0.0;  // U of the first sample, or W
    double p_value = 1.0;
    Method method = Method::mann_whitney_exact;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    bool tie_correction_applied = false;
};

struct RankData {
    std::vector<double> values;
    std::vector<double> ranks;        // 1-based, average rank within ties
    std::vector<std::size_t> tie_groups;  // sizes of groups with more than one member
};

struct SampleSizeOutOfRange : ValidationError {
    explicit SampleSizeOutOfRange(const std::string& what) : ValidationError("SampleSizeOutOfRange", what) {}
};
struct DegenerateSample : ValidationError {
    explicit DegenerateSample(const std::string& what) : ValidationError("DegenerateSample", what) {}
};

// Throws EmptyInput for an empty sequence.
RankData rank_with_ties(std::span<const double> values);

// Largest pooled size for which the exact null distribution is used.
inline constexpr std::size_t kExactLimit = 16;

/// U of `a` from joint average ranks. Exact p-value from the null
/// distribution of U when n1 + n2 <= kExactLimit and there are no ties;
/// otherwise the normal approximation with tie and continuity correction.
/// "greater" tests whether `a` tends to exceed `b`.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          Alternative alternative = Alternative::two_sided);

// Number of arrangements of n1 + n2 distinct values giving each U in
// [0, n1*n2]; entry u counts U = u.
std::vector<double> u_distribution(std::size_t n1, std::size_t n2);

/// W and p-value by Royston's approximation (valid for 3 <= n <= 5000).
/// Throws SampleSizeOutOfRange, or DegenerateSample for zero range.
TestResult shapiro_wilk(std::span<const double> sample);

struct EfficacyReport {
    double alpha = 0.05;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double mean_a = 0.0;
    double mean_b = 0.0;
    // Normality tests; empty when a group cannot be tested (n < 3 or zero range).
    std::optional<TestResult> normality_a;
    std::optional<TestResult> normality_b;
    bool normality_rejected = false;
    std::string method;  // "mann_whitney" or "none"
    std::optional<TestResult> test;
    bool significant = false;
    std::vector<std::string> notes;
};

/// Normality gate followed by Mann-Whitney U when either group departs
/// from normality (or cannot be shown normal). When both groups look
/// normal no test is run and the report says a parametric test would be
/// needed.
EfficacyReport efficacy_analysis(std::span<const double> group_a, std::span<const double> group_b, double alpha = 0.05);

Json to_json(const TestResult& r);
Json to_json(const RankData& r);
Json to_json(const EfficacyReport& r);

}  // namespace folio::eval
