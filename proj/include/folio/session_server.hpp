#pragma once

#include <memory>
#include <string>
#include <thread>

#include "folio/session.hpp"

namespace httplib {
class Server;
}

namespace folio::session {

/// HTTP+JSON front of a SessionStore.
///
///   POST /sessions                                {profile, document_id} -> Session
///   GET  /sessions/{id}                                                   -> Session
///   GET  /documents/{id}/views/{view_kind}                                -> view payload (redacted)
///   POST /sessions/{id}/events                    {kind, payload, seq?, at?} -> Session
///   POST /sessions/{id}/quizzes/{quiz_id}/submit  {answers}               -> QuizResult + correct_indices
///   GET  /reports/usage                                                   -> UsageReport
///
/// Errors are {"error": code, "message": text} with 400 for validation
/// failures, 404 for unknown sessions or documents, 409 for sequence gaps,
/// 503 for failed artifacts and 500 otherwise.
class SessionServer {
public:
    explicit SessionServer(std::shared_ptr<SessionStore> store);
    ~SessionServer();

    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    // Binds and serves on a background thread. Port 0 picks a free port.
    // Returns the bound port; throws IoError when binding fails.
    int start(const std::string& host, int port);
    // Blocks until stop() is called from another thread or a signal handler.
    void wait();
    void stop();
    int port() const noexcept { return port_; }

private:
    void routes();

    std::shared_ptr<SessionStore> store_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

}  // namespace folio::session
