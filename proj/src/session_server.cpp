#include "folio/session_server.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

namespace folio::session {
namespace {

int status_for(const Error& e) {
    const auto& code = e.code();
    if (code == "UnknownSession" || code == "UnknownDocument" || code == "UnknownViewKind") return 404;
    if (code == "SequenceGap") return 409;
    if (code == "ArtifactUnavailable") return 503;
    return e.error_class() == ErrorClass::validation ? 400 : 500;
}

void reply(httplib::Response& res, int status, const Json& body) {
    res.status = status;
    res.set_content(canonical_dump(body), "application/json");
}

Json parse_body(const httplib::Request& req) {
    try {
        return req.body.empty() ? Json::object() : Json::parse(req.body);
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidJson", e.what());
    }
}

// Runs a handler and maps folio errors onto HTTP statuses.
template <class Fn>
httplib::Server::Handler guarded(Fn fn) {
    return [fn](const httplib::Request& req, httplib::Response& res) {
        try {
            reply(res, 200, fn(req));
        } catch (const Error& e) {
            reply(res, status_for(e), {{"error", e.code()}, {"message", e.what()}});
        } catch (const std::exception& e) {
            spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
            reply(res, 500, {{"error", "Internal"}, {"message", e.what()}});
        }
    };
}

}  // namespace

SessionServer::SessionServer(std::shared_ptr<SessionStore> store)
    : store_(std::move(store)), server_(std::make_unique<httplib::Server>()) {
    routes();
}

SessionServer::~SessionServer() { stop(); }

void SessionServer::routes() {
    auto& s = *server_;
    auto store = store_;

    s.Post("/sessions", guarded([store](const httplib::Request& req) {
               Json body = parse_body(req);
               if (!body.contains("document_id") || !body["document_id"].is_string())
                   throw ValidationError("InvalidRequest", "document_id is required");
               doc::LearnerProfile profile;
               if (body.contains("profile")) {
                   profile = doc::profile_from_json(body["profile"]);
                   doc::validate_profile(profile, doc::default_interest_catalog());
               }
               return to_json(store->create_session(profile, body["document_id"].get<std::string>()));
           }));

    s.Get(R"(/sessions/([^/]+))",
          guarded([store](const httplib::Request& req) { return to_json(store->get(req.matches[1])); }));

    s.Get(R"(/documents/([^/]+)/views/([^/]+))", guarded([store](const httplib::Request& req) {
              return store->view(req.matches[1], view_kind_from_string(std::string(req.matches[2])));
          }));

    s.Post(R"(/sessions/([^/]+)/events)", guarded([store](const httplib::Request& req) {
               return to_json(store->append(req.matches[1], event_from_json(parse_body(req))));
           }));

    s.Post(R"(/sessions/([^/]+)/quizzes/([^/]+)/submit)", guarded([store](const httplib::Request& req) {
               const std::string session_id = req.matches[1];
               const std::string quiz_id = req.matches[2];
               Json body = parse_body(req);
               if (!body.contains("answers")) throw InvalidPayload("answers are required");
               SessionEvent e;
               e.kind = EventKind::quiz_submitted;
               e.payload = {{"quiz_id", quiz_id}, {"answers", body["answers"]}};
               auto session = store->append(session_id, e);
               Json out = assess::to_json(session.state.quiz_results.at(quiz_id));
               // Answers are revealed only after submission.
               Json keys = Json::array();
               for (const auto& quiz : store->bundle(session.document_id)->quizzes)
                   if (quiz.id == quiz_id)
                       for (const auto& q : quiz.questions) keys.push_back(q.correct_index);
               out["correct_indices"] = keys;
               out["seq"] = session.state.last_seq;
               return out;
           }));

    s.Get("/reports/usage", guarded([store](const httplib::Request&) { return to_json(usage_report(store->all())); }));
}

int SessionServer::start(const std::string& host, int port) {
    if (port == 0) {
        port_ = server_->bind_to_any_port(host);
    } else {
        port_ = server_->bind_to_port(host, port) ? port : -1;
    }
    if (port_ <= 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
    thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    spdlog::info("serving on {}:{}", host, port_);
    return port_;
}

void SessionServer::wait() {
    if (thread_.joinable()) thread_.join();
}

void SessionServer::stop() {
    if (server_) server_->stop();
    if (thread_.joinable()) thread_.join();
}

}  // namespace folio::session
