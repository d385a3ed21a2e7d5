#include <fstream>
#include <sstream>

#include "folio/errors.hpp"
#include "folio/gateway.hpp"

namespace folio::gateway {
namespace {

bool rule_matches(const MockRule& rule, const GenerationRequest& req) {
    if (rule.task && *rule.task != req.task) return false;
    if (rule.persona && *rule.persona != req.persona) return false;
    for (const auto& [key, value] : rule.params) {
        auto it = req.params.find(key);
        if (it == req.params.end() || it->second != value) return false;
    }
    for (const auto& [label, needle] : rule.context_contains) {
        bool found = false;
        for (const auto& part : req.context) {
            if ((label == "*" || part.label == label) && part.text.find(needle) != std::string::npos) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

}  // namespace

MockScript mock_script_from_json(const Json& j) {
    MockScript script;
    try {
        script.fallback = j.value("fallback", true);
        for (const auto& jr : j.value("rules", Json::array())) {
            MockRule rule;
            if (jr.contains("task")) rule.task = task_tag_from_string(jr["task"].get<std::string>());
            if (jr.contains("persona")) rule.persona = persona_from_string(jr["persona"].get<std::string>());
            if (jr.contains("context_contains"))
                rule.context_contains = jr["context_contains"].get<std::map<std::string, std::string>>();
            if (jr.contains("params")) rule.params = jr["params"].get<std::map<std::string, std::string>>();
            if (jr.contains("error")) {
                rule.error = jr["error"].get<std::string>();
                if (*rule.error != "unavailable" && *rule.error != "timeout")
                    throw ValidationError("InvalidMockScript", "rule error must be 'unavailable' or 'timeout'");
            }
            // Object payloads are serialized; string payloads are passed through
            // raw so scripts can exercise malformed output.
            for (const auto& r : jr.value("responses", Json::array()))
                rule.responses.push_back(r.is_string() ? r.get<std::string>() : r.dump());
            if (rule.responses.empty() && !rule.error)
                throw ValidationError("InvalidMockScript", "rule needs responses or an error");
            script.rules.push_back(std::move(rule));
        }
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidMockScript", e.what());
    }
    return script;
}

MockScript load_mock_script(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock script " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return mock_script_from_json(Json::parse(buf.str()));
    } catch (const Json::parse_error& e) {
        throw ValidationError("InvalidMockScript", path.string() + ": " + e.what());
    }
}

MockProvider::MockProvider(MockScript script) : script_(std::move(script)) {}

ProviderReply MockProvider::complete(const GenerationRequest& req, std::chrono::milliseconds) {
    for (std::size_t i = 0; i < script_.rules.size(); ++i) {
        const auto& rule = script_.rules[i];
        if (!rule_matches(rule, req)) continue;
        if (rule.error) {
            if (*rule.error == "timeout") throw ProviderTimeout("mock rule " + std::to_string(i) + " timed out");
            throw ProviderUnavailable("mock rule " + std::to_string(i) + " is unavailable");
        }
        auto index = std::min<std::size_t>(static_cast<std::size_t>(req.attempt_index()), rule.responses.size() - 1);
        return {rule.responses[index], {{"provider", "mock"}, {"rule", std::to_string(i)}}};
    }
    if (!script_.fallback)
        throw ProviderUnavailable(std::string("no scripted response for task ") + std::string(to_string(req.task)));
    return {synthesize_payload(req).dump(), {{"provider", "mock"}, {"rule", "fallback"}}};
}

}  // namespace folio::gateway
