#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <random>

#include "folio/pipeline.hpp"
#include "folio/session.hpp"
#include "test_support.hpp"

namespace folio::testing {

// Mock-provider bundle for one fixture document, built once per process.
inline std::shared_ptr<const pipeline::ContentBundle> fixture_bundle(std::string_view name = "newtons_third_law") {
    static std::map<std::string, std::shared_ptr<const pipeline::ContentBundle>, std::less<>> cache;
    static std::mutex mu;
    std::lock_guard lock(mu);
    if (auto it = cache.find(name); it != cache.end()) return it->second;
    auto gw = mock_gateway();
    pipeline::Config cfg;
    cfg.seed = 7;
    immersive::MockImageProvider images;
    auto b = std::make_shared<pipeline::ContentBundle>(
        pipeline::run_pipeline(load_doc(name), profile(7, "basketball"), *gw, cfg, &images));
    cache.emplace(std::string(name), b);
    return b;
}

/// Random event that folds cleanly against `doc`; seq and timestamp are
/// left for the caller.
inline session::SessionEvent random_event(std::mt19937_64& rng, const immersive::ImmersiveDocument& doc) {
    using session::EventKind;
    auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
    session::SessionEvent e;
    for (;;) {
        switch (pick(5)) {
            case 0: {
                static const char* kViews[] = {"immersive", "slides", "narrated_slides", "audio_lesson", "mindmap"};
                e.kind = EventKind::view_switch;
                e.payload = {{"view", kViews[pick(5)]}};
                return e;
            }
            case 1: {
                if (doc.assessments.embedded.empty()) continue;
                const auto& q = doc.assessments.embedded[pick(doc.assessments.embedded.size())];
                e.kind = EventKind::embedded_answered;
                e.payload = {{"question_id", q.id}, {"answer_index", pick(q.options.size())}};
                return e;
            }
            case 2: {
                if (doc.assessments.quizzes.empty()) continue;
                const auto& quiz = doc.assessments.quizzes[pick(doc.assessments.quizzes.size())];
                Json answers = Json::array();
                for (const auto& q : quiz.questions) answers.push_back(pick(q.options.size()));
                e.kind = EventKind::quiz_submitted;
                e.payload = {{"quiz_id", quiz.id}, {"answers", answers}};
                return e;
            }
            case 3: {
                if (doc.addons.timelines.empty()) continue;
                const auto& t = doc.addons.timelines[pick(doc.addons.timelines.size())];
                auto order = t.labels();
                std::shuffle(order.begin(), order.end(), rng);
                e.kind = EventKind::timeline_attempted;
                e.payload = {{"timeline_id", t.id}, {"order", order}};
                return e;
            }
            default: {
                const auto& secs = doc.pdoc.base.sections;
                e.kind = EventKind::section_opened;
                e.payload = {{"section_id", secs[pick(secs.size())].id}};
                return e;
            }
        }
    }
}

inline std::vector<session::SessionEvent> random_log(std::mt19937_64& rng, const immersive::ImmersiveDocument& doc,
                                                     std::size_t n, session::Timestamp start = 1000) {
    std::vector<session::SessionEvent> log;
    session::Timestamp at = start;
    for (std::size_t i = 0; i < n; ++i) {
        auto e = random_event(rng, doc);
        e.seq = static_cast<std::int64_t>(i + 1);
        at += static_cast<session::Timestamp>(rng() % 5000);
        e.at = at;
        log.push_back(std::move(e));
    }
    return log;
}

}  // namespace folio::testing
