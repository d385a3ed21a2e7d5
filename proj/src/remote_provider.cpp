#include <httplib.h>

#include "folio/errors.hpp"
#include "folio/gateway.hpp"

namespace folio::gateway {

RemoteProvider::RemoteProvider(std::string endpoint) {
    // Split "scheme://host[:port]/path" into client base and request path.
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos)
        throw ValidationError("InvalidConfig", "endpoint must look like http://host:port/path");
    auto path_start = endpoint.find('/', scheme_end + 3);
    base_ = endpoint.substr(0, path_start);
    path_ = path_start == std::string::npos ? "/" : endpoint.substr(path_start);
}

ProviderReply RemoteProvider::complete(const GenerationRequest& req, std::chrono::milliseconds timeout) {
    httplib::Client client(base_);
    auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    auto res = client.Post(path_, to_json(req).dump(), "application/json");
    if (!res) {
        if (res.error() == httplib::Error::Read || res.error() == httplib::Error::Write)
            throw ProviderTimeout("provider at " + base_ + " timed out or dropped the connection");
        throw ProviderUnavailable("provider at " + base_ + " unreachable: " + httplib::to_string(res.error()));
    }
    if (res->status != 200)
        throw ProviderUnavailable("provider returned HTTP " + std::to_string(res->status));

    ProviderReply reply;
    try {
        Json body = Json::parse(res->body);
        const Json& payload = body.at("payload");
        reply.payload = payload.is_string() ? payload.get<std::string>() : payload.dump();
        if (body.contains("provider_meta"))
            for (const auto& [k, v] : body["provider_meta"].items())
                reply.meta[k] = v.is_string() ? v.get<std::string>() : v.dump();
    } catch (const Json::exception& e) {
        // The envelope itself is broken; hand the body to schema validation
        // so the retry loop reports it.
        reply.payload = res->body;
    }
    reply.meta.emplace("provider", "remote");
    return reply;
}

}  // namespace folio::gateway
