#include "folio/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>

#include <spdlog/spdlog.h>

namespace folio::session {
namespace {

namespace fs = std::filesystem;

constexpr std::array<ViewKind, 5> kViews = {ViewKind::immersive, ViewKind::slides, ViewKind::narrated_slides,
                                             ViewKind::audio_lesson, ViewKind::mindmap};
constexpr std::array<EventKind, 5> kEvents = {EventKind::view_switch, EventKind::embedded_answered,
                                              EventKind::quiz_submitted, EventKind::timeline_attempted,
                                              EventKind::section_opened};

Timestamp system_now() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// Typed payload field access; every mismatch is an InvalidPayload.
template <class T>
T field(const Json& payload, const char* key) {
    if (!payload.is_object() || !payload.contains(key))
        throw InvalidPayload(std::string("payload field '") + key + "' is required");
    try {
        return payload[key].get<T>();
    } catch (const Json::exception&) {
        throw InvalidPayload(std::string("payload field '") + key + "' has the wrong type");
    }
}

Json views_json(const std::set<ViewKind>& views) {
    Json out = Json::array();
    for (auto v : views) out.push_back(to_string(v));
    return out;
}

Json header_json(const Session& s) {
    return {{"type", "session"},
            {"id", s.id},
            {"profile", doc::to_json(s.profile)},
            {"document_id", s.document_id},
            {"created_at", s.created_at}};
}

void append_line(const fs::path& path, const Json& j) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append to " + path.string());
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

std::string_view to_string(ViewKind v) {
    switch (v) {
        case ViewKind::immersive: return "immersive";
        case ViewKind::slides: return "slides";
        case ViewKind::narrated_slides: return "narrated_slides";
        case ViewKind::audio_lesson: return "audio_lesson";
        case ViewKind::mindmap: return "mindmap";
    }
    return "immersive";
}

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::view_switch: return "view_switch";
        case EventKind::embedded_answered: return "embedded_answered";
        case EventKind::quiz_submitted: return "quiz_submitted";
        case EventKind::timeline_attempted: return "timeline_attempted";
        case EventKind::section_opened: return "section_opened";
    }
    return "view_switch";
}

ViewKind view_kind_from_string(std::string_view s) {
    for (auto v : kViews)
        if (to_string(v) == s) return v;
    throw ValidationError("UnknownViewKind", "unknown view kind '" + std::string(s) + "'");
}

EventKind event_kind_from_string(std::string_view s) {
    for (auto k : kEvents)
        if (to_string(k) == s) return k;
    throw InvalidPayload("unknown event kind '" + std::string(s) + "'");
}

DerivedState initial_state(Timestamp created_at) {
    DerivedState s;
    s.last_at = created_at;
    return s;
}

DerivedState fold(DerivedState state, const SessionEvent& e, const immersive::ImmersiveDocument& doc) {
    if (e.seq != state.last_seq + 1)
        throw SequenceGap("expected seq " + std::to_string(state.last_seq + 1) + ", got " + std::to_string(e.seq));
    if (e.at < state.last_at)
        throw InvalidPayload("event timestamp " + std::to_string(e.at) + " precedes " + std::to_string(state.last_at));

    switch (e.kind) {
        case EventKind::view_switch: {
            ViewKind v;
            try {
                v = view_kind_from_string(field<std::string>(e.payload, "view"));
            } catch (const ValidationError& err) {
                throw InvalidPayload(err.what());
            }
            state.current_view = v;
            state.views_visited.insert(v);
            break;
        }
        case EventKind::embedded_answered: {
            auto qid = field<std::string>(e.payload, "question_id");
            auto answer = field<int>(e.payload, "answer_index");
            const auto* q = doc.find_question(qid);
            if (q == nullptr) throw InvalidPayload("unknown question " + qid);
            try {
                state.answers[qid] = {answer, assess::grade_embedded(*q, answer).correct};
            } catch (const ValidationError& err) {
                throw InvalidPayload(err.code() + ": " + err.what());
            }
            break;
        }
        case EventKind::quiz_submitted: {
            auto quiz_id = field<std::string>(e.payload, "quiz_id");
            auto answers = field<std::vector<int>>(e.payload, "answers");
            const auto* quiz = doc.find_quiz(quiz_id);
            if (quiz == nullptr) throw InvalidPayload("unknown quiz " + quiz_id);
            try {
                state.quiz_results[quiz_id] = assess::grade_quiz(*quiz, answers);
            } catch (const ValidationError& err) {
                throw InvalidPayload(err.code() + ": " + err.what());
            }
            break;
        }
        case EventKind::timeline_attempted: {
            auto tid = field<std::string>(e.payload, "timeline_id");
            auto order = field<std::vector<std::string>>(e.payload, "order");
            const auto* t = doc.find_timeline(tid);
            if (t == nullptr) throw InvalidPayload("unknown timeline " + tid);
            try {
                state.timeline_attempts[tid].push_back(immersive::grade_timeline_submission(*t, order));
            } catch (const ValidationError& err) {
                throw InvalidPayload(err.code() + ": " + err.what());
            }
            break;
        }
        case EventKind::section_opened: {
            auto sid = field<std::string>(e.payload, "section_id");
            if (doc.pdoc.base.find_section(sid) == nullptr) throw InvalidPayload("unknown section " + sid);
            state.sections_opened.insert(sid);
            break;
        }
    }
    state.last_seq = e.seq;
    state.last_at = e.at;
    return state;
}

Session apply_event(Session session, const SessionEvent& event, const immersive::ImmersiveDocument& doc) {
    session.state = fold(std::move(session.state), event, doc);
    session.event_log.push_back(event);
    return session;
}

DerivedState replay(const std::vector<SessionEvent>& log, const immersive::ImmersiveDocument& doc,
                    Timestamp created_at) {
    DerivedState state = initial_state(created_at);
    for (const auto& e : log) state = fold(std::move(state), e, doc);
    return state;
}

UsageReport usage_report(const std::vector<Session>& sessions) {
    UsageReport r;
    std::size_t used = 0;
    for (const auto& s : sessions) {
        UsageEntry u;
        u.session_id = s.id;
        u.views_visited = s.state.views_visited;
        u.used_any_transformation =
            std::any_of(u.views_visited.begin(), u.views_visited.end(), [](ViewKind v) { return v != ViewKind::immersive; });
        u.used_quiz = std::any_of(s.event_log.begin(), s.event_log.end(),
                                  [](const SessionEvent& e) { return e.kind == EventKind::quiz_submitted; });
        u.duration_ms = s.event_log.empty() ? 0 : s.event_log.back().at - s.created_at;
        used += u.used_any_transformation ? 1 : 0;
        r.sessions.push_back(std::move(u));
    }
    if (!sessions.empty()) {
        r.fraction_used_transformation = static_cast<double>(used) / static_cast<double>(sessions.size());
        r.majority_used_transformation = 2 * used > sessions.size();
    }
    return r;
}

Json to_json(const SessionEvent& e) {
    return {{"seq", e.seq}, {"at", e.at}, {"kind", to_string(e.kind)}, {"payload", e.payload}};
}

SessionEvent event_from_json(const Json& j) {
    if (!j.is_object()) throw InvalidPayload("event must be an object");
    SessionEvent e;
    e.seq = j.contains("seq") ? field<std::int64_t>(j, "seq") : 0;
    e.at = j.contains("at") ? field<Timestamp>(j, "at") : 0;
    e.kind = event_kind_from_string(field<std::string>(j, "kind"));
    e.payload = j.value("payload", Json::object());
    return e;
}

Json to_json(const DerivedState& s) {
    Json answers = Json::object();
    for (const auto& [id, a] : s.answers) answers[id] = {{"answer_index", a.answer_index}, {"correct", a.correct}};
    Json quizzes = Json::object();
    for (const auto& [id, r] : s.quiz_results) quizzes[id] = assess::to_json(r);
    Json timelines = Json::object();
    for (const auto& [id, scores] : s.timeline_attempts) timelines[id] = scores;
    return {{"current_view", to_string(s.current_view)},
            {"views_visited", views_json(s.views_visited)},
            {"answers", answers},
            {"quiz_results", quizzes},
            {"timeline_attempts", timelines},
            {"sections_opened", s.sections_opened},
            {"last_seq", s.last_seq},
            {"last_at", s.last_at}};
}

Json to_json(const Session& s) {
    return {{"id", s.id},
            {"profile", doc::to_json(s.profile)},
            {"document_id", s.document_id},
            {"created_at", s.created_at},
            {"event_count", s.event_log.size()},
            {"state", to_json(s.state)}};
}

Json to_json(const UsageReport& r) {
    Json sessions = Json::array();
    for (const auto& u : r.sessions)
        sessions.push_back({{"session_id", u.session_id},
                            {"views_visited", views_json(u.views_visited)},
                            {"used_any_transformation", u.used_any_transformation},
                            {"used_quiz", u.used_quiz},
                            {"duration_ms", u.duration_ms}});
    return {{"sessions", sessions},
            {"fraction_used_transformation", r.fraction_used_transformation},
            {"majority_used_transformation", r.majority_used_transformation}};
}

// ---------------------------------------------------------------------------
// SessionStore

SessionStore::SessionStore(std::optional<fs::path> session_dir, Clock clock)
    : dir_(std::move(session_dir)), clock_(clock ? std::move(clock) : Clock(system_now)) {
    if (dir_) {
        std::error_code ec;
        fs::create_directories(*dir_, ec);
        if (ec) throw IoError("cannot create " + dir_->string() + ": " + ec.message());
    }
}

void SessionStore::add_bundle(std::shared_ptr<const pipeline::ContentBundle> bundle) {
    std::shared_ptr<const immersive::ImmersiveDocument> doc;
    if (bundle->immersive) {
        doc = std::make_shared<immersive::ImmersiveDocument>(*bundle->immersive);
    } else {
        // Without the assembled text, sessions can still grade assessments.
        doc = std::make_shared<immersive::ImmersiveDocument>(
            immersive::assemble_immersive(bundle->pdoc, {}, {bundle->embedded, bundle->quizzes}));
    }
    std::unique_lock lock(mu_);
    documents_[bundle->id] = std::move(doc);
    bundles_[bundle->id] = std::move(bundle);
}

std::size_t SessionStore::load_bundles(const fs::path& dir) {
    if (!fs::exists(dir)) return 0;
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) found.push_back(entry.path());
    std::sort(found.begin(), found.end());
    for (const auto& p : found) add_bundle(std::make_shared<pipeline::ContentBundle>(pipeline::read_bundle(p)));
    return found.size();
}

std::shared_ptr<const pipeline::ContentBundle> SessionStore::bundle(const std::string& document_id) const {
    std::shared_lock lock(mu_);
    auto it = bundles_.find(document_id);
    if (it == bundles_.end()) throw UnknownDocument("no document " + document_id);
    return it->second;
}

std::shared_ptr<const immersive::ImmersiveDocument> SessionStore::immersive_of(const std::string& document_id) const {
    std::shared_lock lock(mu_);
    auto it = documents_.find(document_id);
    if (it == documents_.end()) throw UnknownDocument("no document " + document_id);
    return it->second;
}

Session SessionStore::create_session(const doc::LearnerProfile& profile, const std::string& document_id) {
    immersive_of(document_id);
    auto e = std::make_shared<Entry>();
    auto& s = e->session;
    s.profile = profile;
    s.document_id = document_id;
    s.created_at = clock_();
    s.state = initial_state(s.created_at);
    {
        std::unique_lock lock(mu_);
        static thread_local std::random_device rd;
        do {
            s.id = content_id("ses", document_id + "\x1f" + std::to_string(s.created_at) + "\x1f" +
                                         std::to_string(++counter_) + "\x1f" + std::to_string(rd()));
        } while (sessions_.contains(s.id));
        persist_header(s);
        sessions_[s.id] = e;
    }
    return s;
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& session_id) const {
    std::shared_lock lock(mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw UnknownSession("no session " + session_id);
    return it->second;
}

Session SessionStore::get(const std::string& session_id) const {
    auto e = entry(session_id);
    std::shared_lock lock(e->mu);
    return e->session;
}

std::vector<Session> SessionStore::all() const {
    std::vector<std::shared_ptr<Entry>> entries;
    {
        std::shared_lock lock(mu_);
        for (const auto& [_, e] : sessions_) entries.push_back(e);
    }
    std::vector<Session> out;
    for (const auto& e : entries) {
        std::shared_lock lock(e->mu);
        out.push_back(e->session);
    }
    return out;
}

Session SessionStore::append(const std::string& session_id, SessionEvent event) {
    auto e = entry(session_id);
    std::unique_lock lock(e->mu);
    auto doc = immersive_of(e->session.document_id);
    if (event.seq == 0) event.seq = e->session.state.last_seq + 1;
    if (event.at == 0) event.at = std::max(clock_(), e->session.state.last_at);
    Session next = apply_event(e->session, event, *doc);
    persist_event(session_id, event);
    e->session = std::move(next);
    return e->session;
}

void SessionStore::persist_header(const Session& s) const {
    if (!dir_) return;
    append_line(*dir_ / (s.id + ".ndjson"), header_json(s));
}

void SessionStore::persist_event(const std::string& session_id, const SessionEvent& e) const {
    if (!dir_) return;
    Json line = to_json(e);
    line["type"] = "event";
    append_line(*dir_ / (session_id + ".ndjson"), line);
}

std::size_t SessionStore::load_sessions() {
    if (!dir_) return 0;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(*dir_))
        if (entry.path().extension() == ".ndjson") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::size_t restored = 0;
    for (const auto& path : files) {
        try {
            std::ifstream in(path, std::ios::binary);
            std::string line;
            auto e = std::make_shared<Entry>();
            bool header = false;
            std::shared_ptr<const immersive::ImmersiveDocument> doc;
            while (std::getline(in, line)) {
                if (text::trim(line).empty()) continue;
                Json j = Json::parse(line);
                if (!header) {
                    auto& s = e->session;
                    s.id = j.at("id").get<std::string>();
                    s.profile = doc::profile_from_json(j.at("profile"));
                    s.document_id = j.at("document_id").get<std::string>();
                    s.created_at = j.at("created_at").get<Timestamp>();
                    s.state = initial_state(s.created_at);
                    doc = immersive_of(s.document_id);
                    header = true;
                    continue;
                }
                e->session = apply_event(std::move(e->session), event_from_json(j), *doc);
            }
            if (!header) continue;
            std::unique_lock lock(mu_);
            sessions_[e->session.id] = e;
            ++restored;
        } catch (const std::exception& err) {
            spdlog::warn("skipping session file {}: {}", path.string(), err.what());
        }
    }
    return restored;
}

Json SessionStore::view(const std::string& document_id, ViewKind kind) const {
    auto b = bundle(document_id);
    const auto unavailable = [&](const char* name) {
        return ValidationError("ArtifactUnavailable", std::string(name) + " is unavailable for " + document_id);
    };
    switch (kind) {
        case ViewKind::immersive: return immersive::to_json(*immersive_of(document_id), true);
        case ViewKind::slides:
            if (!b->slides) throw unavailable("slides");
            return {{"slides", views::to_json(*b->slides)}};
        case ViewKind::narrated_slides:
            if (!b->slides || !b->narration) throw unavailable("narrated slides");
            return {{"slides", views::to_json(*b->slides)}, {"narration", views::to_json(*b->narration)}};
        case ViewKind::audio_lesson:
            if (!b->lesson) throw unavailable("audio lesson");
            return views::to_json(*b->lesson);
        case ViewKind::mindmap:
            if (!b->mindmap) throw unavailable("mind map");
            return views::to_json(*b->mindmap);
    }
    throw unavailable("view");
}

}  // namespace folio::session
