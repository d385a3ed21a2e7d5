#include <gtest/gtest.h>

#include <functional>
#include <map>
#include <random>
#include <set>

#include "folio/transformations.hpp"
#include "test_support.hpp"

using namespace folio;
using namespace folio::views;
using folio::testing::mock_gateway;
using folio::testing::script_json;

namespace {

personalize::PersonalizedDocument plain(doc::SourceDocument d, std::string interest = "basketball") {
    personalize::PersonalizedDocument p;
    p.base = std::move(d);
    p.profile = folio::testing::profile(7, std::move(interest));
    return p;
}

personalize::PersonalizedDocument plain(std::string_view name) { return plain(folio::testing::load_doc(name)); }

const std::string kThreeTop =
    "# Plants\n\nPlants make food from light.\n\n# Animals\n\nAnimals eat plants or other animals.\n\n"
    "# Fungi\n\nFungi break down dead material.";

gateway::MockScript four_concepts() {
    return script_json(R"({"rules": [
      {"task": "concept_graph", "responses": [{"nodes": [
          {"id": "a", "label": "Force", "summary": "A push or pull."},
          {"id": "b", "label": "Pair", "summary": "Forces come in pairs."},
          {"id": "c", "label": "Direction", "summary": "Opposite directions."},
          {"id": "d", "label": "Objects", "summary": "Different objects."}],
        "edges": [{"from": "a", "to": "b", "relation": "forms"}, {"from": "b", "to": "c", "relation": "has"},
                  {"from": "b", "to": "d", "relation": "acts on"}]}]},
      {"task": "dialogue_turn", "persona": "teacher", "params": {"turn_index": "0"},
       "responses": [{"text": "Let us start with force and pairs.", "revealed_concepts": ["a", "b"]}]},
      {"task": "dialogue_turn", "persona": "teacher", "params": {"turn_index": "2"},
       "responses": [{"text": "Now direction and objects.", "revealed_concepts": ["c", "d"]}]}
    ]})");
}

void check_tree(const MindNode& n, std::set<std::string>& ids, std::size_t& edges) {
    EXPECT_TRUE(ids.insert(n.id).second) << "duplicate node " << n.id;
    if (!n.children.empty()) EXPECT_FALSE(n.annotation.has_value()) << n.id;
    for (const auto& c : n.children) {
        ++edges;
        check_tree(c, ids, edges);
    }
}

void collect_ids(const MindNode& n, std::vector<std::string>& out) {
    out.push_back(n.id);
    for (const auto& c : n.children) collect_ids(c, out);
}

}  // namespace

TEST(Slides, EconomiesCoverage) {
    auto pdoc = plain(folio::testing::load_doc("economies"), "soccer");
    auto gw = mock_gateway();
    auto deck = generate_slides(pdoc, *gw, {});
    std::set<std::string> referenced;
    for (const auto& r : deck.referenced_sections()) referenced.insert(r);
    std::set<std::string> all;
    for (const auto& s : pdoc.base.sections) all.insert(s.id);
    EXPECT_EQ(referenced, all);
    EXPECT_TRUE(deck.omissions.empty());
    for (const auto& s : deck.slides) {
        EXPECT_LE(s.bullets.size(), 5u);
        for (const auto& b : s.bullets) EXPECT_FALSE(b.empty());
    }
    EXPECT_EQ(slide_deck_from_json(to_json(deck)), deck);
    EXPECT_NE(slide_outline(deck).find("1. Types of Economies"), std::string::npos);
}

TEST(Slides, SingleSection) {
    auto pdoc = plain(doc::ingest("# Light\n\nLight travels fast."));
    auto deck = generate_slides(pdoc, *mock_gateway(), {});
    ASSERT_GE(deck.slides.size(), 1u);
    EXPECT_EQ(deck.referenced_sections(), std::vector<std::string>{pdoc.base.sections[0].id});
}

TEST(Slides, EmptyBulletsRetried) {
    auto pdoc = plain(doc::ingest("# Light\n\nLight travels fast."));
    const auto id = pdoc.base.sections[0].id;
    Json bad = {{"slides", {{{"title", "Light"}, {"bullets", Json::array()}, {"section_refs", {id}}}}}};
    Json good = {{"slides", {{{"title", "Light"}, {"bullets", {"Light is fast"}}, {"section_refs", {id}}}}}};
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::slides, {}, {}, {}, {bad.dump(), good.dump()}, {}});
    auto gw = mock_gateway(s);
    auto deck = generate_slides(pdoc, *gw, {});
    EXPECT_EQ(deck.slides.at(0).bullets, std::vector<std::string>{"Light is fast"});
    EXPECT_EQ(gw->stats().schema_failures, 1u);
}

TEST(Slides, UncoveredSectionRetriedAndOmissionsAccepted) {
    auto pdoc = plain(doc::ingest(kThreeTop));
    const auto& secs = pdoc.base.sections;
    auto slide = [](const std::string& id) {
        return Json{{"title", "t"}, {"bullets", {"b"}}, {"section_refs", {id}}};
    };
    Json missing = {{"slides", {slide(secs[0].id), slide(secs[1].id)}}};
    Json omitted = {{"slides", {slide(secs[0].id), slide(secs[1].id)}}, {"omissions", {secs[2].id}}};
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::slides, {}, {}, {}, {missing.dump(), omitted.dump()}, {}});
    auto gw = mock_gateway(s);
    auto deck = generate_slides(pdoc, *gw, {});
    EXPECT_EQ(deck.omissions, std::vector<std::string>{secs[2].id});
    EXPECT_EQ(gw->stats().schema_failures, 1u);
}

TEST(Slides, TooManyBulletsRetried) {
    auto pdoc = plain(doc::ingest("# Light\n\nLight travels fast."));
    const auto id = pdoc.base.sections[0].id;
    Json six = {{"slides", {{{"title", "L"}, {"bullets", {"1", "2", "3", "4", "5", "6"}}, {"section_refs", {id}}}}}};
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::slides, {}, {}, {}, {six.dump()}, {}});
    EXPECT_THROW(generate_slides(pdoc, *mock_gateway(s), {}), SchemaViolationExhausted);
}

TEST(Narration, OneSegmentPerSlide) {
    SlideDeck deck;
    for (int i = 0; i < 3; ++i) deck.slides.push_back({"Slide " + std::to_string(i), {"point"}, {}, {}, {}, {"s"}});
    auto gw = mock_gateway();
    auto track = generate_narration(deck, *gw, {});
    ASSERT_EQ(track.segments.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(track.segments[i].slide_index, i);
        EXPECT_DOUBLE_EQ(track.segments[i].estimated_seconds, estimate_seconds(track.segments[i].text, 2.5));
    }
    EXPECT_EQ(narration_from_json(to_json(track)), track);
}

TEST(Narration, TimingArithmetic) {
    std::string words;
    for (int i = 0; i < 150; ++i) words += "word ";
    EXPECT_DOUBLE_EQ(estimate_seconds(words, 2.5), 60.0);
}

TEST(Narration, EmptyDeckRejected) {
    EXPECT_THROW(generate_narration(SlideDeck{}, *mock_gateway(), {}), PreconditionViolation);
}

TEST(Dialogue, CoverageMetAfterTwoTeacherTurns) {
    auto pdoc = plain("newtons_third_law");
    Config cfg;
    cfg.coverage_threshold = 1.0;
    auto lesson = generate_dialogue_lesson(pdoc, *mock_gateway(four_concepts()), cfg);
    ASSERT_EQ(lesson.turns.size(), 3u);
    EXPECT_EQ(lesson.turns[0].speaker, Speaker::teacher);
    EXPECT_EQ(lesson.turns[1].speaker, Speaker::student);
    EXPECT_EQ(lesson.turns[2].speaker, Speaker::teacher);
    EXPECT_EQ(lesson.termination, Termination::coverage_met);
    EXPECT_EQ(lesson.turns[2].revealed_concepts, (std::vector<std::string>{"c", "d"}));
    EXPECT_EQ(lesson_from_json(to_json(lesson)), lesson);
}

TEST(Dialogue, MaxTurnsCap) {
    auto pdoc = plain("newtons_third_law");
    auto script = four_concepts();
    // Later teacher turns reveal nothing so coverage stays at one half.
    script.rules.erase(script.rules.begin() + 2);
    script.rules.push_back(script_json(R"({"rules": [{"task": "dialogue_turn", "persona": "teacher",
        "responses": [{"text": "Let us review.", "revealed_concepts": []}]}]})").rules[0]);
    Config cfg;
    cfg.max_turns = 6;
    auto lesson = generate_dialogue_lesson(pdoc, *mock_gateway(script), cfg);
    EXPECT_EQ(lesson.turns.size(), 6u);
    EXPECT_EQ(lesson.termination, Termination::max_turns);
}

TEST(Dialogue, UnknownOrRepeatedConceptRetried) {
    auto pdoc = plain("newtons_third_law");
    auto script = four_concepts();
    script.rules[1].responses.insert(script.rules[1].responses.begin(),
                                     R"({"text": "x", "revealed_concepts": ["zzz"]})");
    auto gw = mock_gateway(script);
    Config cfg;
    cfg.coverage_threshold = 1.0;
    auto lesson = generate_dialogue_lesson(pdoc, *gw, cfg);
    EXPECT_EQ(lesson.turns[0].revealed_concepts, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(gw->stats().schema_failures, 1u);
}

TEST(Dialogue, StudentRequestsNeverSeeSource) {
    auto pdoc = plain("newtons_third_law");
    auto recorder = std::make_shared<gateway::RecordingProvider>(std::make_shared<gateway::MockProvider>());
    auto gw = folio::testing::make_gateway(recorder);
    auto lesson = generate_dialogue_lesson(pdoc, *gw, {});
    const std::string source = doc::flatten_text(pdoc.rendered());
    int students = 0;
    for (const auto& req : recorder->requests()) {
        if (req.persona != gateway::Persona::student) continue;
        ++students;
        for (const auto& part : req.context) EXPECT_FALSE(text::shares_window(part.text, source, 20)) << part.text;
    }
    EXPECT_GT(students, 0);
}

TEST(Dialogue, LeakyTeacherTriggersIsolationViolation) {
    auto pdoc = plain("newtons_third_law");
    const std::string block = pdoc.base.sections[1].blocks[0].text;
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::dialogue_turn, gateway::Persona::teacher, {}, {},
                       {Json{{"text", "As the book says: " + block}}.dump()}, {}});
    EXPECT_THROW(generate_dialogue_lesson(pdoc, *mock_gateway(s), {}), IsolationViolation);
}

TEST(DialogueProperty, AlternationAndRevealInvariants) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        auto pdoc = plain(doc::ingest(folio::testing::random_document(rng)));
        Config cfg;
        cfg.max_turns = 1 + static_cast<int>(rng() % 12);
        cfg.reveal_per_turn = 1 + static_cast<int>(rng() % 3);
        cfg.seed = trial;
        auto lesson = generate_dialogue_lesson(pdoc, *mock_gateway(), cfg);
        ASSERT_LE(static_cast<int>(lesson.turns.size()), cfg.max_turns);
        std::set<std::string> seen;
        for (std::size_t i = 0; i < lesson.turns.size(); ++i) {
            EXPECT_EQ(lesson.turns[i].speaker == Speaker::teacher, i % 2 == 0);
            for (const auto& c : lesson.turns[i].revealed_concepts) {
                EXPECT_TRUE(lesson.concept_graph.contains(c));
                EXPECT_TRUE(seen.insert(c).second);
            }
        }
    }
}

TEST(ConceptGraph, DisconnectedGraphRetried) {
    auto pdoc = plain("economies");
    auto gw = mock_gateway(script_json(R"({"rules": [{"task": "concept_graph", "responses": [
        {"nodes": [{"id": "a", "label": "A", "summary": ""}, {"id": "b", "label": "B", "summary": ""}], "edges": []},
        {"nodes": [{"id": "a", "label": "A", "summary": ""}, {"id": "b", "label": "B", "summary": ""}],
         "edges": [{"from": "a", "to": "b", "relation": "r"}]}]}]})"));
    auto g = generate_concept_graph(pdoc, *gw, {});
    EXPECT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(gw->stats().schema_failures, 1u);
}

TEST(MindMap, TopLevelChildrenInOrder) {
    auto pdoc = plain(doc::ingest(kThreeTop));
    auto map = generate_mind_map(pdoc, *mock_gateway(), {});
    ASSERT_EQ(map.root.children.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(map.root.children[i].section_ref, pdoc.base.sections[i].id);
    EXPECT_TRUE(map.root.expanded);
    for (const auto& c : map.root.children) EXPECT_FALSE(c.expanded);
}

TEST(MindMap, TreeShapeAndLeafAnnotations) {
    auto pdoc = plain("early_human_evolution");
    auto map = generate_mind_map(pdoc, *mock_gateway(), {});
    std::set<std::string> ids;
    std::size_t edges = 0;
    check_tree(map.root, ids, edges);
    EXPECT_EQ(edges + 1, map.node_count());
    std::function<void(const MindNode&, int&)> leaves = [&](const MindNode& n, int& annotated) {
        if (n.children.empty() && n.annotation) ++annotated;
        for (const auto& c : n.children) leaves(c, annotated);
    };
    int annotated = 0;
    leaves(map.root, annotated);
    EXPECT_GT(annotated, 0);
    EXPECT_EQ(mind_map_from_json(to_json(map)), map);
}

TEST(MindMap, WrongTopLevelShapeRetried) {
    auto pdoc = plain(doc::ingest(kThreeTop));
    gateway::MockScript s;
    s.rules.push_back({gateway::TaskTag::mindmap, {}, {}, {}, {R"({"root": {"label": "x", "children": [{"label": "y"}]}})"}, {}});
    EXPECT_THROW(generate_mind_map(pdoc, *mock_gateway(s), {}), SchemaViolationExhausted);
}

TEST(MindMap, ToggleRules) {
    auto map = generate_mind_map(plain("early_human_evolution"), *mock_gateway(), {});
    EXPECT_EQ(toggle_node(toggle_node(map, map.root.id), map.root.id), map);
    auto flipped = toggle_node(map, map.root.id);
    EXPECT_FALSE(flipped.root.expanded);
    ASSERT_EQ(flipped.root.children.size(), map.root.children.size());
    for (std::size_t i = 0; i < map.root.children.size(); ++i)
        EXPECT_EQ(flipped.root.children[i], map.root.children[i]);
    EXPECT_THROW(toggle_node(map, "nope"), ValidationError);
}

TEST(MindMapProperty, TogglesPreserveShape) {
    auto map = generate_mind_map(plain("early_human_evolution"), *mock_gateway(), {});
    std::vector<std::string> ids;
    collect_ids(map.root, ids);
    std::mt19937_64 rng(3);
    auto current = map;
    std::map<std::string, int> flips;
    for (int i = 0; i < 200; ++i) {
        const auto& id = ids[rng() % ids.size()];
        current = toggle_node(current, id);
        ++flips[id];
        std::vector<std::string> now;
        collect_ids(current.root, now);
        ASSERT_EQ(now, ids);
    }
    for (const auto& id : ids) {
        bool expect = map.find(id)->expanded ^ (flips[id] % 2 == 1);
        EXPECT_EQ(current.find(id)->expanded, expect) << id;
    }
}
