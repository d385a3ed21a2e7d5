#include "folio/gateway.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <utility>

#include "folio/errors.hpp"

namespace folio::gateway {
namespace {

constexpr std::array<std::pair<TaskTag, std::string_view>, 14> kTaskNames{{
    {TaskTag::relevel, "relevel"},
    {TaskTag::select_segments, "select_segments"},
    {TaskTag::rewrite_segment, "rewrite_segment"},
    {TaskTag::slides, "slides"},
    {TaskTag::narration, "narration"},
    {TaskTag::concept_graph, "concept_graph"},
    {TaskTag::dialogue_turn, "dialogue_turn"},
    {TaskTag::mindmap, "mindmap"},
    {TaskTag::timeline, "timeline"},
    {TaskTag::mnemonic, "mnemonic"},
    {TaskTag::illustration_brief, "illustration_brief"},
    {TaskTag::embedded_question, "embedded_question"},
    {TaskTag::quiz, "quiz"},
    {TaskTag::quiz_feedback, "quiz_feedback"},
}};

// Keeps the in-flight counter and semaphore balanced on every exit path.
class SlotGuard {
public:
    SlotGuard(std::counting_semaphore<1024>& slots, std::atomic<int>& in_flight, std::atomic<int>& peak)
        : slots_(slots), in_flight_(in_flight) {
        slots_.acquire();
        int now = ++in_flight_;
        int seen = peak.load();
        while (now > seen && !peak.compare_exchange_weak(seen, now)) {
        }
    }
    ~SlotGuard() {
        --in_flight_;
        slots_.release();
    }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<1024>& slots_;
    std::atomic<int>& in_flight_;
};

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += sep;
        out += item;
    }
    return out;
}

}  // namespace

std::string_view to_string(TaskTag tag) {
    for (const auto& [t, name] : kTaskNames)
        if (t == tag) return name;
    return "relevel";
}

TaskTag task_tag_from_string(std::string_view name) {
    for (const auto& [t, n] : kTaskNames)
        if (n == name) return t;
    throw ValidationError("UnknownTaskTag", "unknown task tag '" + std::string(name) + "'");
}

std::string_view to_string(Persona persona) {
    switch (persona) {
        case Persona::default_persona: return "default";
        case Persona::teacher: return "teacher";
        case Persona::student: return "student";
    }
    return "default";
}

Persona persona_from_string(std::string_view name) {
    if (name == "default") return Persona::default_persona;
    if (name == "teacher") return Persona::teacher;
    if (name == "student") return Persona::student;
    throw ValidationError("UnknownPersona", "unknown persona '" + std::string(name) + "'");
}

GenerationRequest& GenerationRequest::add(std::string label, std::string text) {
    if (part(label) != nullptr) throw ValidationError("DuplicateContextLabel", "duplicate context label " + label);
    context.push_back({std::move(label), std::move(text)});
    return *this;
}

const ContextPart* GenerationRequest::part(std::string_view label) const {
    for (const auto& p : context)
        if (p.label == label) return &p;
    return nullptr;
}

std::string GenerationRequest::param(const std::string& key, std::string fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

int GenerationRequest::attempt_index() const {
    return static_cast<int>(std::count_if(context.begin(), context.end(), [](const ContextPart& p) {
        return std::string_view(p.label).starts_with(kFeedbackLabel);
    }));
}

Json to_json(const GenerationRequest& req) {
    Json parts = Json::array();
    for (const auto& p : req.context) parts.push_back({{"label", p.label}, {"text", p.text}});
    return {{"task_tag", to_string(req.task)},
            {"persona", to_string(req.persona)},
            {"context_parts", parts},
            {"params", req.params},
            {"seed", req.seed}};
}

GenerationRequest request_from_json(const Json& j) {
    try {
        GenerationRequest req;
        req.task = task_tag_from_string(j.at("task_tag").get<std::string>());
        req.persona = persona_from_string(j.value("persona", std::string("default")));
        for (const auto& p : j.value("context_parts", Json::array()))
            req.add(p.at("label").get<std::string>(), p.at("text").get<std::string>());
        if (j.contains("params")) req.params = j["params"].get<std::map<std::string, std::string>>();
        req.seed = j.value("seed", std::uint64_t{0});
        return req;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidRequest", e.what());
    }
}

void validate(const ProviderConfig& cfg) {
    if (cfg.max_parallel < 1 || cfg.max_parallel > 1024)
        throw ValidationError("InvalidConfig", "max_parallel must be in 1..1024");
    if (cfg.max_retries < 0) throw ValidationError("InvalidConfig", "max_retries must be >= 0");
    if (cfg.timeout_ms <= 0) throw ValidationError("InvalidConfig", "timeout_ms must be positive");
    if (cfg.kind == ProviderKind::remote && (!cfg.endpoint || cfg.endpoint->empty()))
        throw ValidationError("InvalidConfig", "remote provider requires an endpoint");
}

Json to_json(const ProviderConfig& cfg) {
    Json j = {{"kind", cfg.kind == ProviderKind::mock ? "mock" : "remote"},
              {"max_parallel", cfg.max_parallel},
              {"max_retries", cfg.max_retries},
              {"timeout_ms", cfg.timeout_ms}};
    j["endpoint"] = cfg.endpoint ? Json(*cfg.endpoint) : Json(nullptr);
    return j;
}

ProviderConfig provider_config_from_json(const Json& j) {
    static const std::array<std::string_view, 5> kKeys = {"kind", "endpoint", "max_parallel", "max_retries",
                                                          "timeout_ms"};
    for (const auto& [key, _] : j.items()) {
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
            throw ValidationError("UnknownConfigKey", "unknown provider key '" + key + "'");
    }
    ProviderConfig cfg;
    try {
        std::string kind = j.value("kind", std::string("mock"));
        if (kind == "mock") cfg.kind = ProviderKind::mock;
        else if (kind == "remote") cfg.kind = ProviderKind::remote;
        else throw ValidationError("InvalidConfig", "provider kind must be mock or remote");
        if (j.contains("endpoint") && !j["endpoint"].is_null()) cfg.endpoint = j["endpoint"].get<std::string>();
        cfg.max_parallel = j.value("max_parallel", cfg.max_parallel);
        cfg.max_retries = j.value("max_retries", cfg.max_retries);
        cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidConfig", e.what());
    }
    return cfg;
}

// ---------------------------------------------------------------------------

Gateway::Gateway(std::shared_ptr<Provider> provider, ProviderConfig cfg)
    : provider_(std::move(provider)), cfg_(std::move(cfg)) {
    validate(cfg_);
    if (!provider_) throw ValidationError("InvalidConfig", "gateway needs a provider");
    slots_ = std::make_unique<std::counting_semaphore<1024>>(cfg_.max_parallel);
}

GenerationResponse Gateway::generate(GenerationRequest req, const Validator& extra) const {
    ++requests_;
    std::vector<std::string> diagnostics;
    const int total_attempts = cfg_.max_retries + 1;
    for (int attempt = 1; attempt <= total_attempts; ++attempt) {
        ++attempts_;
        ProviderReply reply;
        {
            SlotGuard slot(*slots_, in_flight_, peak_in_flight_);
            reply = provider_->complete(req, std::chrono::milliseconds(cfg_.timeout_ms));
        }

        std::vector<std::string> violations;
        Json payload;
        try {
            payload = Json::parse(reply.payload);
        } catch (const Json::parse_error& e) {
            violations.push_back(std::string("payload is not valid structured text: ") + e.what());
        }
        if (violations.empty()) violations = validate_schema(req.task, payload);
        if (violations.empty() && extra) violations = extra(payload);

        if (violations.empty()) {
            GenerationResponse response;
            response.payload = std::move(payload);
            response.raw = std::move(reply.payload);
            response.provider_meta = std::move(reply.meta);
            response.attempts = attempt;
            return response;
        }

        ++schema_failures_;
        std::string summary = join(violations, "; ");
        diagnostics.push_back("attempt " + std::to_string(attempt) + ": " + summary);
        spdlog::debug("{} attempt {} rejected: {}", to_string(req.task), attempt, summary);
        req.add(std::string(kFeedbackLabel) + "_" + std::to_string(attempt),
                "The previous response was rejected. Fix these problems: " + summary);
    }
    throw SchemaViolationExhausted(std::string(to_string(req.task)) + " failed validation after " +
                                       std::to_string(total_attempts) + " attempts: " + diagnostics.back(),
                                   diagnostics);
}

GatewayStats Gateway::stats() const {
    GatewayStats s;
    s.requests = requests_.load();
    s.attempts = attempts_.load();
    s.schema_failures = schema_failures_.load();
    s.in_flight = in_flight_.load();
    s.peak_in_flight = peak_in_flight_.load();
    return s;
}

bool assert_persona_isolation(const GenerationRequest& req, const std::vector<std::string>& forbidden) {
    std::vector<std::string> needles;
    for (const auto& f : forbidden) {
        std::string n = text::normalize_whitespace(f);
        if (!n.empty()) needles.push_back(std::move(n));
    }
    for (const auto& part : req.context) {
        std::string hay = text::normalize_whitespace(part.text);
        for (const auto& n : needles)
            if (hay.find(n) != std::string::npos) return false;
    }
    return true;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view salt) {
    std::string hex = sha256_hex(std::to_string(base) + "/" + std::string(salt));
    return std::stoull(hex.substr(0, 15), nullptr, 16);
}

// ---------------------------------------------------------------------------

RecordingProvider::RecordingProvider(std::shared_ptr<Provider> inner) : inner_(std::move(inner)) {}

ProviderReply RecordingProvider::complete(const GenerationRequest& req, std::chrono::milliseconds timeout) {
    {
        std::lock_guard lock(mu_);
        log_.push_back(req);
    }
    return inner_->complete(req, timeout);
}

std::vector<GenerationRequest> RecordingProvider::requests() const {
    std::lock_guard lock(mu_);
    return log_;
}

ProviderConfig with_env_overrides(ProviderConfig cfg) {
    if (const char* env = std::getenv(kEndpointEnv); env != nullptr && *env != '\0') cfg.endpoint = env;
    return cfg;
}

std::shared_ptr<Provider> make_provider(const ProviderConfig& cfg,
                                        const std::optional<std::filesystem::path>& mock_script) {
    validate(cfg);
    if (cfg.kind == ProviderKind::remote) return std::make_shared<RemoteProvider>(*cfg.endpoint);
    return std::make_shared<MockProvider>(mock_script ? load_mock_script(*mock_script) : MockScript{});
}

}  // namespace folio::gateway
