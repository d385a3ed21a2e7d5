#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "folio/statistics.hpp"
#include "mw_oracle.hpp"
#include "test_support.hpp"

using namespace folio;
using namespace folio::eval;
using folio::testing::enumerate_exact;

namespace {

double binomial(std::size_t n, std::size_t k) {
    double r = 1;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

}  // namespace

TEST(Ranks, Examples) {
    EXPECT_EQ(rank_with_ties(std::vector<double>{1, 2, 2, 3}).ranks, (std::vector<double>{1, 2.5, 2.5, 4}));
    auto all = rank_with_ties(std::vector<double>{5, 5, 5});
    EXPECT_EQ(all.ranks, (std::vector<double>{2, 2, 2}));
    EXPECT_EQ(all.tie_groups, std::vector<std::size_t>{3});
    EXPECT_EQ(rank_with_ties(std::vector<double>{10, 20, 30}).ranks, (std::vector<double>{1, 2, 3}));
    EXPECT_THROW(rank_with_ties(std::vector<double>{}), EmptyInput);
}

TEST(RanksProperty, SumConserved) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> v(1 + rng() % 40);
        for (auto& x : v) x = static_cast<double>(rng() % 8);
        auto r = rank_with_ties(v);
        double n = static_cast<double>(v.size());
        EXPECT_DOUBLE_EQ(std::accumulate(r.ranks.begin(), r.ranks.end(), 0.0), n * (n + 1) / 2);
    }
}

TEST(MannWhitney, CompleteSeparation) {
    std::vector<double> a{1, 2}, b{3, 4};
    auto r = mann_whitney_u(a, b);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.method, Method::mann_whitney_exact);
    EXPECT_NEAR(r.p_value, enumerate_exact(a, b).p_two_sided, 1e-15);
    EXPECT_NEAR(r.p_value, 2.0 / 6.0, 1e-15);
}

TEST(MannWhitney, AllTied) {
    std::vector<double> a{5, 5, 5}, b{5, 5, 5};
    auto r = mann_whitney_u(a, b);
    EXPECT_EQ(r.statistic, 4.5);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_EQ(r.method, Method::mann_whitney_normal_approx);
    EXPECT_TRUE(r.tie_correction_applied);
}

TEST(MannWhitney, EmptySample) {
    std::vector<double> a{1}, none;
    EXPECT_THROW(mann_whitney_u(a, none), EmptyInput);
    EXPECT_THROW(mann_whitney_u(none, a), EmptyInput);
}

TEST(MannWhitney, DistributionCountsAreBinomial) {
    for (std::size_t n1 = 1; n1 <= 8; ++n1)
        for (std::size_t n2 = 1; n1 + n2 <= kExactLimit; ++n2) {
            auto f = u_distribution(n1, n2);
            ASSERT_EQ(f.size(), n1 * n2 + 1);
            EXPECT_DOUBLE_EQ(std::accumulate(f.begin(), f.end(), 0.0), binomial(n1 + n2, n1));
            for (std::size_t u = 0; u < f.size(); ++u) EXPECT_EQ(f[u], f[f.size() - 1 - u]);
        }
}

TEST(MannWhitneyProperty, ExactMatchesEnumeration) {
    std::mt19937_64 rng(2024);
    for (std::size_t n1 = 1; n1 <= 7; ++n1)
        for (std::size_t n2 = 1; n2 <= 7; ++n2)
            for (int rep = 0; rep < 3; ++rep) {
                std::vector<double> pool(n1 + n2);
                std::iota(pool.begin(), pool.end(), 1.0);
                std::shuffle(pool.begin(), pool.end(), rng);
                std::vector<double> a(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(n1));
                std::vector<double> b(pool.begin() + static_cast<std::ptrdiff_t>(n1), pool.end());
                auto oracle = enumerate_exact(a, b);
                auto two = mann_whitney_u(a, b, Alternative::two_sided);
                auto gt = mann_whitney_u(a, b, Alternative::greater);
                auto lt = mann_whitney_u(a, b, Alternative::less);
                ASSERT_EQ(two.method, Method::mann_whitney_exact);
                EXPECT_EQ(two.statistic, oracle.u1);
                EXPECT_NEAR(two.p_value, oracle.p_two_sided, 1e-12) << n1 << "," << n2;
                EXPECT_NEAR(gt.p_value, oracle.p_greater, 1e-12);
                EXPECT_NEAR(lt.p_value, oracle.p_less, 1e-12);
            }
}

TEST(MannWhitneyProperty, IdentityAndBounds) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 400; ++trial) {
        std::vector<double> a(1 + rng() % 25), b(1 + rng() % 25);
        for (auto& x : a) x = static_cast<double>(rng() % 10);
        for (auto& x : b) x = static_cast<double>(rng() % 12);
        auto ab = mann_whitney_u(a, b);
        auto ba = mann_whitney_u(b, a);
        EXPECT_DOUBLE_EQ(ab.statistic + ba.statistic, static_cast<double>(a.size() * b.size()));
        auto gt = mann_whitney_u(a, b, Alternative::greater);
        auto lt = mann_whitney_u(a, b, Alternative::less);
        for (double p : {ab.p_value, gt.p_value, lt.p_value}) {
            EXPECT_GE(p, 0.0);
            EXPECT_LE(p, 1.0);
        }
        EXPECT_GE(ab.p_value + 1e-12, std::min(gt.p_value, lt.p_value));
    }
}

TEST(MannWhitney, NormalApproximationMatchesReference) {
    auto ref = folio::testing::load_json("eval/reference_stats.json");
    for (const auto& c : ref["mann_whitney_normal"]) {
        auto a = c["a"].get<std::vector<double>>();
        auto b = c["b"].get<std::vector<double>>();
        auto r = mann_whitney_u(a, b, alternative_from_string(c["alternative"].get<std::string>()));
        EXPECT_EQ(r.method, Method::mann_whitney_normal_approx) << c["name"];
        EXPECT_DOUBLE_EQ(r.statistic, c["U"].get<double>()) << c["name"];
        EXPECT_NEAR(r.p_value, c["p"].get<double>(), 1e-9) << c["name"] << " " << c["alternative"];
    }
}

TEST(ShapiroWilk, MatchesReference) {
    auto ref = folio::testing::load_json("eval/reference_stats.json");
    ASSERT_GE(ref["shapiro_wilk"].size(), 5u);
    for (const auto& c : ref["shapiro_wilk"]) {
        auto r = shapiro_wilk(c["sample"].get<std::vector<double>>());
        EXPECT_NEAR(r.statistic, c["W"].get<double>(), 1e-4) << c["name"];
        EXPECT_NEAR(r.p_value, c["p"].get<double>(), 1e-3) << c["name"];
    }
}

TEST(ShapiroWilk, DocumentedCases) {
    std::vector<double> progression;
    for (int i = 0; i < 20; ++i) progression.push_back(3.0 + 0.5 * i);
    auto r = shapiro_wilk(progression);
    EXPECT_GE(r.statistic, 0.95);
    EXPECT_LE(r.statistic, 1.0);

    std::vector<double> skewed{1, 1, 1, 1, 1, 2, 2, 3, 10, 40};
    EXPECT_LT(shapiro_wilk(skewed).p_value, 0.05);

    EXPECT_THROW(shapiro_wilk(std::vector<double>{4, 4, 4}), DegenerateSample);
    EXPECT_THROW(shapiro_wilk(std::vector<double>{1, 2}), SampleSizeOutOfRange);
    EXPECT_THROW(shapiro_wilk(std::vector<double>(5001, 1.0)), SampleSizeOutOfRange);
}

TEST(Efficacy, SeparatedNonNormalGroups) {
    // Heavily skewed scores; the second group sits well above the first.
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
        a.push_back(i < 20 ? 50 + i % 3 : 60 + (i - 20) * 4);
        b.push_back(i < 20 ? 70 + i % 3 : 80 + (i - 20) * 2);
    }
    auto r = efficacy_analysis(a, b);
    EXPECT_TRUE(r.normality_rejected);
    EXPECT_EQ(r.method, "mann_whitney");
    ASSERT_TRUE(r.test.has_value());
    EXPECT_LT(r.test->p_value, 0.05);
    EXPECT_TRUE(r.significant);
    EXPECT_LT(r.mean_a, r.mean_b);
}

TEST(Efficacy, IdenticalGroupsNotSignificant) {
    std::vector<double> a{1, 1, 1, 1, 2, 2, 3, 9, 20, 40};
    auto r = efficacy_analysis(a, a);
    ASSERT_TRUE(r.test.has_value());
    EXPECT_FALSE(r.significant);
    EXPECT_NEAR(r.test->p_value, 1.0, 1e-9);
}

TEST(Efficacy, NormalLookingGroupsFlagged) {
    std::vector<double> a{4.1, 5.0, 5.2, 5.9, 6.0, 6.1, 6.8, 7.0, 7.9};
    std::vector<double> b{5.1, 6.0, 6.2, 6.9, 7.0, 7.1, 7.8, 8.0, 8.9};
    auto r = efficacy_analysis(a, b);
    EXPECT_FALSE(r.normality_rejected);
    EXPECT_EQ(r.method, "none");
    EXPECT_FALSE(r.test.has_value());
    EXPECT_FALSE(r.notes.empty());
}

TEST(Efficacy, Preconditions) {
    std::vector<double> a{1, 2, 3}, none;
    EXPECT_THROW(efficacy_analysis(a, none), EmptyInput);
    EXPECT_THROW(efficacy_analysis(a, a, 1.5), ValidationError);
    EXPECT_EQ(to_json(efficacy_analysis(a, a))["alpha"], 0.05);
}
