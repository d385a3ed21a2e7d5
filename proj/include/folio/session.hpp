#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "folio/errors.hpp"
#include "folio/pipeline.hpp"

namespace folio::session {

enum class ViewKind { immersive, slides, narrated_slides, audio_lesson, mindmap };
enum class EventKind { view_switch, embedded_answered, quiz_submitted, timeline_attempted, section_opened };

std::string_view to_string(ViewKind v);
std::string_view to_string(EventKind k);
ViewKind view_kind_from_string(std::string_view s);  // throws ValidationError("UnknownViewKind")
EventKind event_kind_from_string(std::string_view s);

// Milliseconds since the Unix epoch.
using Timestamp = std::int64_t;

/// Payloads by kind:
///   view_switch         {"view": ViewKind}
///   embedded_answered   {"question_id", "answer_index"}
///   quiz_submitted      {"quiz_id", "answers": [int]}
///   timeline_attempted  {"timeline_id", "order": [label]}
///   section_opened      {"section_id"}
struct SessionEvent {
    std::int64_t seq = 0;
    Timestamp at = 0;
    EventKind kind = EventKind::view_switch;
    Json payload;
    friend bool operator==(const SessionEvent&, const SessionEvent&) = default;
};

struct EmbeddedAnswer {
    int answer_index = 0;
    bool correct = false;
    friend bool operator==(const EmbeddedAnswer&, const EmbeddedAnswer&) = default;
};

struct DerivedState {
    ViewKind current_view = ViewKind::immersive;
    std::set<ViewKind> views_visited{ViewKind::immersive};
    std::map<std::string, EmbeddedAnswer> answers;           // latest per question
    std::map<std::string, assess::QuizResult> quiz_results;  // latest per quiz
    std::map<std::string, std::vector<double>> timeline_attempts;
    std::set<std::string> sections_opened;
    std::int64_t last_seq = 0;
    Timestamp last_at = 0;
    friend bool operator==(const DerivedState&, const DerivedState&) = default;
};

struct Session {
    std::string id;
    doc::LearnerProfile profile;
    std::string document_id;
    Timestamp created_at = 0;
    std::vector<SessionEvent> event_log;
    DerivedState state;
};

struct SequenceGap : ValidationError {
    explicit SequenceGap(const std::string& what) : ValidationError("SequenceGap", what) {}
};
struct InvalidPayload : ValidationError {
    explicit InvalidPayload(const std::string& what) : ValidationError("InvalidPayload", what) {}
};
struct UnknownDocument : ValidationError {
    explicit UnknownDocument(const std::string& what) : ValidationError("UnknownDocument", what) {}
};
struct UnknownSession : ValidationError {
    explicit UnknownSession(const std::string& what) : ValidationError("UnknownSession", what) {}
};

DerivedState initial_state(Timestamp created_at);

// One fold step. Throws SequenceGap or InvalidPayload; `state` is untouched
// on failure.
DerivedState fold(DerivedState state, const SessionEvent& event, const immersive::ImmersiveDocument& doc);

// Appends the event and advances the state.
Session apply_event(Session session, const SessionEvent& event, const immersive::ImmersiveDocument& doc);

DerivedState replay(const std::vector<SessionEvent>& log, const immersive::ImmersiveDocument& doc,
                    Timestamp created_at = 0);

struct UsageEntry {
    std::string session_id;
    std::set<ViewKind> views_visited;
    bool used_any_transformation = false;
    bool used_quiz = false;
    Timestamp duration_ms = 0;
};

struct UsageReport {
    std::vector<UsageEntry> sessions;
    double fraction_used_transformation = 0.0;
    bool majority_used_transformation = false;
};

UsageReport usage_report(const std::vector<Session>& sessions);

Json to_json(const SessionEvent& e);
SessionEvent event_from_json(const Json& j);  // throws InvalidPayload
Json to_json(const DerivedState& s);
Json to_json(const Session& s);
Json to_json(const UsageReport& r);

/// Bundles plus sessions. Sessions persist as one newline-delimited JSON
/// file each (header line, then one line per event) when a directory is
/// given. Appends to one session are serialized; reads return snapshots.
class SessionStore {
public:
    using Clock = std::function<Timestamp()>;

    explicit SessionStore(std::optional<std::filesystem::path> session_dir = {}, Clock clock = {});

    void add_bundle(std::shared_ptr<const pipeline::ContentBundle> bundle);
    // Loads every bundle directory under `dir`; returns how many were found.
    std::size_t load_bundles(const std::filesystem::path& dir);
    std::shared_ptr<const pipeline::ContentBundle> bundle(const std::string& document_id) const;

    Session create_session(const doc::LearnerProfile& profile, const std::string& document_id);
    Session get(const std::string& session_id) const;
    std::vector<Session> all() const;

    /// Appends one event. A missing seq (0) is assigned the next number and a
    /// missing timestamp (0) is taken from the clock.
    Session append(const std::string& session_id, SessionEvent event);

    // Replays persisted session files whose bundle is loaded; returns the
    // number of sessions restored.
    std::size_t load_sessions();

    // Learner-facing payload of a view; answers are redacted. Throws
    // ValidationError("ArtifactUnavailable") for a failed artifact.
    Json view(const std::string& document_id, ViewKind kind) const;

private:
    struct Entry {
        mutable std::shared_mutex mu;
        Session session;
    };

    std::shared_ptr<Entry> entry(const std::string& session_id) const;
    std::shared_ptr<const immersive::ImmersiveDocument> immersive_of(const std::string& document_id) const;
    void persist_header(const Session& s) const;
    void persist_event(const std::string& session_id, const SessionEvent& e) const;

    std::optional<std::filesystem::path> dir_;
    Clock clock_;
    mutable std::shared_mutex mu_;
    std::map<std::string, std::shared_ptr<const pipeline::ContentBundle>> bundles_;
    std::map<std::string, std::shared_ptr<const immersive::ImmersiveDocument>> documents_;
    std::map<std::string, std::shared_ptr<Entry>> sessions_;
    std::uint64_t counter_ = 0;
};

}  // namespace folio::session
