#include <gtest/gtest.h>
#include <httplib.h>

#include <filesystem>
#include <random>
#include <thread>

#include <unistd.h>

#include "folio/session.hpp"
#include "folio/session_server.hpp"
#include "session_fuzz.hpp"

using namespace folio;
using namespace folio::session;
using folio::testing::fixture_bundle;
using folio::testing::random_log;

namespace {

const immersive::ImmersiveDocument& fixture_doc() { return *fixture_bundle()->immersive; }

std::shared_ptr<SessionStore> store_with_bundle(std::optional<std::filesystem::path> dir = {}) {
    std::int64_t tick = 1'000'000;
    auto store = std::make_shared<SessionStore>(dir, [tick]() mutable { return tick += 10; });
    store->add_bundle(fixture_bundle());
    return store;
}

SessionEvent event(std::int64_t seq, EventKind kind, Json payload, Timestamp at = 100) {
    return {seq, at, kind, std::move(payload)};
}

std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("folio-test-" + name + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

Json post(httplib::Client& c, const std::string& path, const Json& body, int& status) {
    auto res = c.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    status = res->status;
    return Json::parse(res->body);
}

Json get(httplib::Client& c, const std::string& path, int& status) {
    auto res = c.Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    status = res->status;
    return Json::parse(res->body);
}

}  // namespace

TEST(Session, CreateInitialState) {
    auto store = store_with_bundle();
    auto s = store->create_session(folio::testing::profile(7, "basketball"), fixture_bundle()->id);
    EXPECT_TRUE(s.event_log.empty());
    EXPECT_EQ(s.state.current_view, ViewKind::immersive);
    EXPECT_EQ(s.state.views_visited, std::set<ViewKind>{ViewKind::immersive});
    auto t = store->create_session(folio::testing::profile(7, "basketball"), fixture_bundle()->id);
    EXPECT_NE(s.id, t.id);
    EXPECT_THROW(store->create_session(folio::testing::profile(7, "art"), "doc-nope"), UnknownDocument);
}

TEST(Session, ViewSwitch) {
    auto state = fold(initial_state(0), event(1, EventKind::view_switch, {{"view", "mindmap"}}), fixture_doc());
    EXPECT_EQ(state.current_view, ViewKind::mindmap);
    EXPECT_EQ(state.views_visited, (std::set<ViewKind>{ViewKind::immersive, ViewKind::mindmap}));
    EXPECT_THROW(fold(initial_state(0), event(1, EventKind::view_switch, {{"view", "podcast"}}), fixture_doc()), InvalidPayload);
}

TEST(Session, QuizSubmissionStoresResult) {
    // Built on a quiz of eight questions, six answered correctly.
    auto d = fixture_doc();
    assess::Quiz quiz;
    quiz.id = "quiz-eight";
    quiz.section_ref = d.pdoc.base.sections[0].id;
    for (int i = 0; i < 8; ++i)
        quiz.questions.push_back({"q" + std::to_string(i), "stem", {"a", "b", "c"}, i % 3, assess::Difficulty::easy,
                                  "tag" + std::to_string(i % 2), quiz.section_ref, std::nullopt});
    d.assessments.quizzes.push_back(quiz);
    Json answers = Json::array();
    for (int i = 0; i < 8; ++i) answers.push_back(i < 6 ? i % 3 : (i + 1) % 3);
    auto state = fold(initial_state(0), event(1, EventKind::quiz_submitted, {{"quiz_id", "quiz-eight"}, {"answers", answers}}), d);
    EXPECT_DOUBLE_EQ(state.quiz_results.at("quiz-eight").score, 0.75);
}

TEST(Session, SequenceGapAndInvalidPayload) {
    EXPECT_THROW(fold(initial_state(0), event(2, EventKind::view_switch, {{"view", "slides"}}), fixture_doc()), SequenceGap);
    EXPECT_THROW(fold(initial_state(0), event(1, EventKind::quiz_submitted, {{"quiz_id", "nope"}, {"answers", Json::array()}}), fixture_doc()),
                 InvalidPayload);
    EXPECT_THROW(fold(initial_state(0), event(1, EventKind::section_opened, Json::object()), fixture_doc()), InvalidPayload);
    auto s1 = fold(initial_state(0), event(1, EventKind::view_switch, {{"view", "slides"}}, 500), fixture_doc());
    EXPECT_THROW(fold(s1, event(2, EventKind::view_switch, {{"view", "slides"}}, 400), fixture_doc()), InvalidPayload);
}

TEST(Session, EmptyReplayIsInitialState) { EXPECT_EQ(replay({}, fixture_doc(), 42), initial_state(42)); }

TEST(SessionProperty, ReplayMatchesIncrementalFold) {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        auto log = random_log(rng, fixture_doc(), 1 + rng() % 100);
        Session s;
        s.state = initial_state(0);
        for (const auto& e : log) {
            auto before = s.event_log;
            s = apply_event(std::move(s), e, fixture_doc());
            // Append-only: the earlier prefix is untouched.
            ASSERT_TRUE(std::equal(before.begin(), before.end(), s.event_log.begin()));
            ASSERT_EQ(s.state, replay(s.event_log, fixture_doc()));
        }
        EXPECT_EQ(replay(log, fixture_doc()), replay(log, fixture_doc()));
    }
}

TEST(Session, FailedAppendLeavesLogUntouched) {
    auto store = store_with_bundle();
    auto s = store->create_session({}, fixture_bundle()->id);
    store->append(s.id, event(0, EventKind::view_switch, {{"view", "slides"}}, 0));
    EXPECT_THROW(store->append(s.id, event(5, EventKind::view_switch, {{"view", "slides"}}, 0)), SequenceGap);
    EXPECT_THROW(store->append(s.id, event(0, EventKind::embedded_answered, {{"question_id", "x"}}, 0)), InvalidPayload);
    EXPECT_EQ(store->get(s.id).event_log.size(), 1u);
}

TEST(Session, ConcurrentAppendsAreLinearized) {
    auto store = store_with_bundle();
    auto s = store->create_session({}, fixture_bundle()->id);
    auto other = store->create_session({}, fixture_bundle()->id);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t] {
            for (int i = 0; i < 50; ++i) {
                store->append(s.id, event(0, EventKind::view_switch, {{"view", t % 2 ? "slides" : "mindmap"}}, 0));
                if (i % 10 == 0) store->append(other.id, event(0, EventKind::view_switch, {{"view", "slides"}}, 0));
            }
        });
    for (auto& th : threads) th.join();
    auto final_state = store->get(s.id);
    ASSERT_EQ(final_state.event_log.size(), 200u);
    for (std::size_t i = 0; i < 200; ++i) EXPECT_EQ(final_state.event_log[i].seq, static_cast<std::int64_t>(i + 1));
    EXPECT_EQ(store->get(other.id).event_log.size(), 20u);
    EXPECT_EQ(final_state.state, replay(final_state.event_log, fixture_doc(), final_state.created_at));
}

TEST(Session, PersistenceReload) {
    auto dir = temp_dir("reload");
    std::string id;
    DerivedState state;
    {
        auto store = store_with_bundle(dir);
        auto s = store->create_session(folio::testing::profile(5, "music"), fixture_bundle()->id);
        id = s.id;
        std::mt19937_64 rng(1);
        for (auto& e : random_log(rng, fixture_doc(), 30, 2'000'000)) state = store->append(id, e).state;
    }
    auto fresh = store_with_bundle(dir);
    EXPECT_EQ(fresh->load_sessions(), 1u);
    auto back = fresh->get(id);
    EXPECT_EQ(back.state, state);
    EXPECT_EQ(back.profile, folio::testing::profile(5, "music"));
    std::filesystem::remove_all(dir);
}

TEST(Usage, Rules) {
    Session only_immersive;
    only_immersive.id = "a";
    Session quizzed;
    quizzed.id = "b";
    quizzed.event_log.push_back(event(1, EventKind::quiz_submitted, {}));
    auto r = usage_report({only_immersive, quizzed});
    EXPECT_FALSE(r.sessions[0].used_any_transformation);
    EXPECT_FALSE(r.sessions[0].used_quiz);
    EXPECT_TRUE(r.sessions[1].used_quiz);
}

TEST(Usage, CohortMajority) {
    // Cohort of ten: eight open the slides, two stay on the immersive text.
    std::vector<Session> cohort(10);
    std::size_t expected_used = 0;
    for (std::size_t i = 0; i < cohort.size(); ++i) {
        cohort[i].id = "s" + std::to_string(i);
        if (i < 8) cohort[i].state.views_visited.insert(ViewKind::slides);
        bool used = false;
        for (auto v : cohort[i].state.views_visited) used = used || v != ViewKind::immersive;
        expected_used += used ? 1 : 0;
    }
    auto r = usage_report(cohort);
    EXPECT_DOUBLE_EQ(r.fraction_used_transformation, static_cast<double>(expected_used) / 10.0);
    EXPECT_TRUE(r.majority_used_transformation);
}

TEST(SessionHttp, RoundTrip) {
    auto store = store_with_bundle();
    SessionServer server(store);
    const int port = server.start("127.0.0.1", 0);
    httplib::Client c("127.0.0.1", port);
    const auto& bundle = *fixture_bundle();
    int status = 0;

    auto created = post(c, "/sessions", {{"profile", {{"grade", 7}, {"interest", "basketball"}}}, {"document_id", bundle.id}}, status);
    ASSERT_EQ(status, 200) << created.dump();
    const std::string sid = created["id"];
    EXPECT_EQ(created["state"]["current_view"], "immersive");

    post(c, "/sessions", {{"document_id", "doc-missing"}}, status);
    EXPECT_EQ(status, 404);
    get(c, "/sessions/ses-missing", status);
    EXPECT_EQ(status, 404);

    auto ev = post(c, "/sessions/" + sid + "/events", {{"kind", "view_switch"}, {"payload", {{"view", "slides"}}}}, status);
    EXPECT_EQ(status, 200);
    EXPECT_EQ(ev["state"]["current_view"], "slides");
    post(c, "/sessions/" + sid + "/events", {{"kind", "view_switch"}, {"seq", 9}, {"payload", {{"view", "slides"}}}}, status);
    EXPECT_EQ(status, 409);
    post(c, "/sessions/" + sid + "/events", {{"kind", "dance"}}, status);
    EXPECT_EQ(status, 400);

    auto view = get(c, "/documents/" + bundle.id + "/views/immersive", status);
    EXPECT_EQ(status, 200);
    EXPECT_EQ(view.dump().find("correct_index"), std::string::npos);
    get(c, "/documents/" + bundle.id + "/views/hologram", status);
    EXPECT_EQ(status, 404);

    const auto& quiz = bundle.quizzes.at(0);
    Json answers = Json::array();
    for (const auto& q : quiz.questions) answers.push_back(q.correct_index);
    auto result = post(c, "/sessions/" + sid + "/quizzes/" + quiz.id + "/submit", {{"answers", answers}}, status);
    EXPECT_EQ(status, 200);
    EXPECT_DOUBLE_EQ(result["score"].get<double>(), 1.0);
    EXPECT_EQ(result["correct_indices"], answers);
    EXPECT_TRUE(result["grows"].empty());

    auto report = get(c, "/reports/usage", status);
    EXPECT_EQ(status, 200);
    ASSERT_EQ(report["sessions"].size(), 1u);
    EXPECT_TRUE(report["sessions"][0]["used_any_transformation"]);
    EXPECT_TRUE(report["sessions"][0]["used_quiz"]);

    auto fetched = get(c, "/sessions/" + sid, status);
    EXPECT_EQ(fetched["event_count"], 2);
    server.stop();
}

TEST(SessionHttp, FailedArtifactIs503) {
    auto b = std::make_shared<pipeline::ContentBundle>(*fixture_bundle());
    b->id = "doc-nomap";
    b->mindmap.reset();
    b->failures["mindmap"] = {"ProviderUnavailable", "down"};
    auto store = std::make_shared<SessionStore>();
    store->add_bundle(b);
    SessionServer server(store);
    httplib::Client c("127.0.0.1", server.start("127.0.0.1", 0));
    int status = 0;
    auto body = get(c, "/documents/doc-nomap/views/mindmap", status);
    EXPECT_EQ(status, 503);
    EXPECT_EQ(body["error"], "ArtifactUnavailable");
    get(c, "/documents/doc-nomap/views/slides", status);
    EXPECT_EQ(status, 200);
    server.stop();
}
