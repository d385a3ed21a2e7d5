#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "folio/immersive.hpp"
#include "test_support.hpp"

using namespace folio;
using namespace folio::immersive;
using folio::testing::mock_gateway;

namespace {

personalize::PersonalizedDocument plain(doc::SourceDocument d, std::string interest = "basketball") {
    personalize::PersonalizedDocument p;
    p.base = std::move(d);
    p.profile = folio::testing::profile(7, std::move(interest));
    return p;
}

personalize::PersonalizedDocument plain(std::string_view name) { return plain(folio::testing::load_doc(name)); }

gateway::MockScript timeline_script(const std::string& section_id, const std::vector<std::string>& labels) {
    Json items = Json::array();
    for (const auto& l : labels) items.push_back({{"label", l}, {"description", "step " + l}});
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::timeline, {}, {}, {}, {Json{{"candidates", {{{"section_id", section_id}, {"items", items}}}}}.dump()}, {}});
    return s;
}

Timeline abc() {
    Timeline t;
    t.id = "tl-x";
    t.anchor_section = "sec-x";
    t.items = {{"A", ""}, {"B", ""}, {"C", ""}};
    return t;
}

std::string swap_case(std::string s) {
    for (auto& c : s) c = std::isupper(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c))
                                                                         : static_cast<char>(std::toupper(c));
    return s;
}

}  // namespace

TEST(Timeline, GroundedSequenceKept) {
    auto pdoc = plain("newtons_third_law");
    const auto& carts = pdoc.base.sections[2];
    auto gw = mock_gateway(timeline_script(carts.id, {"attach a spring", "let go", "measure", "compare"}));
    auto tls = detect_sequences(pdoc, *gw, {});
    ASSERT_EQ(tls.size(), 1u);
    EXPECT_EQ(tls[0].anchor_section, carts.id);
    EXPECT_EQ(tls[0].labels(), (std::vector<std::string>{"attach a spring", "let go", "measure", "compare"}));
}

TEST(Timeline, UngroundedLabelDropped) {
    auto pdoc = plain("newtons_third_law");
    auto gw = mock_gateway(timeline_script(pdoc.base.sections[2].id, {"attach a spring", "launch a rocket", "compare"}));
    EXPECT_TRUE(detect_sequences(pdoc, *gw, {}).empty());
}

TEST(Timeline, TwoItemsDropped) {
    auto pdoc = plain("newtons_third_law");
    auto gw = mock_gateway(timeline_script(pdoc.base.sections[2].id, {"let go", "compare"}));
    EXPECT_TRUE(detect_sequences(pdoc, *gw, {}).empty());
}

TEST(Timeline, MockFindsCartsSequence) {
    auto pdoc = plain("newtons_third_law");
    auto tls = detect_sequences(pdoc, *mock_gateway(), {});
    ASSERT_FALSE(tls.empty());
    EXPECT_EQ(tls[0].anchor_section, pdoc.base.sections[2].id);
    EXPECT_GE(tls[0].items.size(), 3u);
}

TEST(TimelineGrading, Examples) {
    auto t = abc();
    EXPECT_DOUBLE_EQ(grade_timeline_submission(t, {"A", "B", "C"}), 1.0);
    EXPECT_DOUBLE_EQ(grade_timeline_submission(t, {"A", "C", "B"}), 1.0 / 3.0);
    EXPECT_THROW(grade_timeline_submission(t, {"A", "A", "B"}), ValidationError);
    EXPECT_THROW(grade_timeline_submission(t, {"A", "B"}), ValidationError);
}

TEST(TimelineGradingProperty, AllPermutations) {
    for (std::size_t n : {3u, 4u, 5u, 6u}) {
        Timeline t;
        for (std::size_t i = 0; i < n; ++i) t.items.push_back({std::string(1, static_cast<char>('A' + i)), ""});
        auto perm = t.labels();
        std::sort(perm.begin(), perm.end());
        do {
            double s = grade_timeline_submission(t, perm);
            double k = s * static_cast<double>(n);
            EXPECT_NEAR(k, std::round(k), 1e-12);
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0);
            EXPECT_EQ(s == 1.0, perm == t.labels());
            EXPECT_NE(std::round(k), static_cast<double>(n - 1));
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
}

TEST(Mnemonic, ValidationExamples) {
    EXPECT_TRUE(validate_mnemonic({"Kingdom", "Phylum", "Class"}, "King Philip Came Over"));
    EXPECT_FALSE(validate_mnemonic({"Red", "Orange"}, "Every Good Boy"));
    EXPECT_TRUE(validate_mnemonic({"mercury", "Venus"}, "My Very"));
    EXPECT_FALSE(validate_mnemonic({"a", "b", "c"}, "Apples Bake"));
}

TEST(MnemonicProperty, CaseInvariant) {
    std::mt19937_64 rng(17);
    const std::vector<std::string> words = {"Kingdom", "phylum", "Class", "order", "Family", "genus", "Species",
                                            "Mercury", "venus", "Earth", "mars", "King", "philip", "came"};
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> items;
        std::string sentence;
        for (std::size_t i = 0, n = 2 + rng() % 4; i < n; ++i) items.push_back(words[rng() % words.size()]);
        for (std::size_t i = 0, n = 1 + rng() % 6; i < n; ++i) sentence += words[rng() % words.size()] + " ";
        bool base = validate_mnemonic(items, sentence);
        std::vector<std::string> flipped;
        for (const auto& i : items) flipped.push_back(swap_case(i));
        EXPECT_EQ(validate_mnemonic(flipped, sentence), base);
        EXPECT_EQ(validate_mnemonic(items, swap_case(sentence)), base);
    }
}

TEST(Mnemonic, ScriptedSentence) {
    auto gw = mock_gateway(folio::testing::script_json(
        R"({"rules": [{"task": "mnemonic", "responses": [{"sentence": "King Philip Came"}]}]})"));
    auto m = generate_mnemonic({"Kingdom", "Phylum", "Class"}, *gw, {});
    EXPECT_EQ(m.sentence, "King Philip Came");
    EXPECT_TRUE(validate_mnemonic(m.items, m.sentence));
}

TEST(Mnemonic, RetriedUntilLettersMatch) {
    auto gw = mock_gateway(folio::testing::script_json(
        R"({"rules": [{"task": "mnemonic", "responses": [{"sentence": "Every Good Boy"}, {"sentence": "King Philip Came"}]}]})"));
    auto m = generate_mnemonic({"Kingdom", "Phylum", "Class"}, *gw, {});
    EXPECT_EQ(m.sentence, "King Philip Came");
    EXPECT_EQ(gw->stats().attempts, 2u);
}

TEST(Mnemonic, NeedsTwoFacts) {
    EXPECT_THROW(generate_mnemonic({"Kingdom"}, *mock_gateway(), {}), PreconditionViolation);
}

TEST(Mnemonic, MockSectionMnemonic) {
    auto pdoc = plain("newtons_third_law");
    auto candidates = mnemonic_candidate_sections(pdoc.base);
    ASSERT_EQ(candidates, std::vector<std::string>{pdoc.base.sections[3].id});
    auto m = generate_section_mnemonic(candidates[0], pdoc, *mock_gateway(), {});
    EXPECT_TRUE(validate_mnemonic(m.items, m.sentence));
    EXPECT_EQ(m.anchor_section, candidates[0]);
}

TEST(Illustration, EconomiesSoccerBrief) {
    auto pdoc = plain(folio::testing::load_doc("economies"), "soccer");
    const auto& market = pdoc.base.sections[3].blocks[0];
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::illustration_brief, {}, {}, {}, {Json{{"illustrations", {{{"block_id", market.id},
        {"brief", "A soccer team selling jerseys at a market stall"}, {"caption", "Market Economies"}}}}}.dump()}, {}});
    MockImageProvider images;
    auto specs = plan_illustrations(pdoc, *mock_gateway(s), &images, {});
    ASSERT_EQ(specs.size(), 1u);
    EXPECT_EQ(specs[0].anchor_block, market.id);
    EXPECT_NE(specs[0].brief.find("soccer"), std::string::npos);
    EXPECT_NE(specs[0].image_ref, kPendingImage);
}

TEST(Illustration, ImageProviderDownLeavesPending) {
    auto pdoc = plain("economies");
    MockImageProvider down(false);
    auto specs = plan_illustrations(pdoc, *mock_gateway(), &down, {});
    ASSERT_FALSE(specs.empty());
    std::set<std::string> sections;
    for (const auto& s : specs) {
        EXPECT_EQ(s.image_ref, kPendingImage);
        ASSERT_NE(pdoc.base.find_block(s.anchor_block), nullptr);
        EXPECT_TRUE(sections.insert(pdoc.base.section_of_block(s.anchor_block)->id).second);
    }
    Addons addons;
    addons.illustrations = specs;
    EXPECT_NO_THROW(assemble_immersive(pdoc, addons, {}));
}

TEST(Illustration, NoneWorthy) {
    auto gw = mock_gateway(folio::testing::script_json(
        R"({"rules": [{"task": "illustration_brief", "responses": [{"illustrations": []}]}]})"));
    EXPECT_TRUE(plan_illustrations(plain("economies"), *gw, nullptr, {}).empty());
}

TEST(Assembly, OrderingRule) {
    auto pdoc = plain(doc::ingest("# Carts\n\nFirst push. Then roll. Next stop."));
    const auto sid = pdoc.base.sections[0].id;
    Addons addons;
    auto t = abc();
    t.anchor_section = sid;
    addons.timelines.push_back(t);
    Assessments as;
    assess::Quiz quiz;
    quiz.id = "quiz-" + sid;
    quiz.section_ref = sid;
    as.quizzes.push_back(quiz);
    auto im = assemble_immersive(pdoc, addons, as);
    ASSERT_EQ(im.sections.size(), 1u);
    EXPECT_EQ(im.sections[0].placements,
              (std::vector<Placement>{{AddonKind::timeline, t.id}, {AddonKind::quiz, quiz.id}}));
}

TEST(Assembly, DanglingAnchor) {
    auto pdoc = plain("economies");
    Addons addons;
    addons.timelines.push_back(abc());
    EXPECT_THROW(assemble_immersive(pdoc, addons, {}), DanglingAnchor);
    Addons ill;
    ill.illustrations.push_back({"ill-1", "blk-missing", "brief", "", "pending"});
    EXPECT_THROW(assemble_immersive(pdoc, ill, {}), DanglingAnchor);
}

TEST(Assembly, NoAddonsIsIdentity) {
    auto pdoc = plain("economies");
    auto im = assemble_immersive(pdoc, {}, {});
    EXPECT_EQ(im.pdoc.rendered(), pdoc.rendered());
    ASSERT_EQ(im.sections.size(), pdoc.base.sections.size());
    for (std::size_t i = 0; i < im.sections.size(); ++i) {
        EXPECT_EQ(im.sections[i].section_id, pdoc.base.sections[i].id);
        EXPECT_TRUE(im.sections[i].placements.empty());
    }
}

TEST(Assembly, DeterministicAndRoundTrips) {
    auto pdoc = plain("newtons_third_law");
    auto gw = mock_gateway();
    auto build = [&] {
        Addons addons;
        addons.timelines = detect_sequences(pdoc, *gw, {});
        addons.mnemonics.push_back(generate_section_mnemonic(pdoc.base.sections[3].id, pdoc, *gw, {}));
        MockImageProvider images;
        addons.illustrations = plan_illustrations(pdoc, *gw, &images, {});
        Assessments as;
        as.embedded.push_back(assess::generate_embedded_question(pdoc.base.sections[1].blocks[0].id, pdoc, *gw, {}));
        as.quizzes.push_back(assess::generate_quiz(pdoc.base.sections[1].id, pdoc, *gw, {}));
        return assemble_immersive(pdoc, addons, as);
    };
    auto a = build();
    EXPECT_EQ(canonical_dump(to_json(a)), canonical_dump(to_json(build())));
    EXPECT_EQ(canonical_dump(to_json(immersive_from_json(to_json(a)))), canonical_dump(to_json(a)));

    const auto& placements = a.sections[1].placements;
    ASSERT_GE(placements.size(), 2u);
    EXPECT_EQ(placements.back().kind, AddonKind::quiz);

    auto redacted = to_json(a, true);
    for (const auto& s : redacted["sections"])
        for (const auto& addon : s["addons"]) {
            if (addon["kind"] == "quiz")
                for (const auto& q : addon["content"]["questions"]) EXPECT_FALSE(q.contains("correct_index"));
            if (addon["kind"] == "timeline") {
                std::vector<std::string> labels;
                for (const auto& i : addon["content"]["items"]) labels.push_back(i["label"]);
                EXPECT_TRUE(std::is_sorted(labels.begin(), labels.end()));
            }
        }
}
