#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "folio/text.hpp"

namespace folio::gateway {

enum class TaskTag {
    relevel,
    select_segments,
    rewrite_segment,
    slides,
    narration,
    concept_graph,
    dialogue_turn,
    mindmap,
    timeline,
    mnemonic,
    illustration_brief,
    embedded_question,
    quiz,
    quiz_feedback,
};

enum class Persona { default_persona, teacher, student };

std::string_view to_string(TaskTag tag);
std::string_view to_string(Persona persona);
TaskTag task_tag_from_string(std::string_view name);
Persona persona_from_string(std::string_view name);

struct ContextPart {
    std::string label;
    std::string text;
};

// Label prefix of the parts appended by the retry loop.
inline constexpr std::string_view kFeedbackLabel = "validation_feedback";

struct GenerationRequest {
    TaskTag task = TaskTag::relevel;
    Persona persona = Persona::default_persona;
    std::vector<ContextPart> context;
    std::map<std::string, std::string> params;
    std::uint64_t seed = 0;

    // Appends a part; throws ValidationError("DuplicateContextLabel") on reuse.
    GenerationRequest& add(std::string label, std::string text);
    const ContextPart* part(std::string_view label) const;
    std::string param(const std::string& key, std::string fallback = {}) const;
    // Number of retry-feedback parts present (0 on the first attempt).
    int attempt_index() const;
};

Json to_json(const GenerationRequest& req);
GenerationRequest request_from_json(const Json& j);

struct GenerationResponse {
    Json payload;
    std::string raw;
    std::map<std::string, std::string> provider_meta;
    int attempts = 1;
};

enum class ProviderKind { mock, remote };

struct ProviderConfig {
    ProviderKind kind = ProviderKind::mock;
    std::optional<std::string> endpoint;
    int max_parallel = 4;
    int max_retries = 2;
    int timeout_ms = 30000;
};

// Throws ValidationError when the configuration is inconsistent.
void validate(const ProviderConfig& cfg);
Json to_json(const ProviderConfig& cfg);
ProviderConfig provider_config_from_json(const Json& j);

// Environment variable overriding ProviderConfig::endpoint.
inline constexpr const char* kEndpointEnv = "FOLIO_PROVIDER_ENDPOINT";
ProviderConfig with_env_overrides(ProviderConfig cfg);

struct ProviderReply {
    std::string payload;
    std::map<std::string, std::string> meta;
};

class Provider {
public:
    virtual ~Provider() = default;
    // Throws ProviderUnavailable or ProviderTimeout.
    virtual ProviderReply complete(const GenerationRequest& req, std::chrono::milliseconds timeout) = 0;
};

// Returns human-readable violations; empty means valid.
using Validator = std::function<std::vector<std::string>(const Json&)>;

// Structural schema of each task's payload.
std::vector<std::string> validate_schema(TaskTag tag, const Json& payload);

struct GatewayStats {
    std::uint64_t requests = 0;
    std::uint64_t attempts = 0;
    std::uint64_t schema_failures = 0;
    int in_flight = 0;
    int peak_in_flight = 0;
};

/// Front door for every generative call. Bounds in-flight provider calls to
/// ProviderConfig::max_parallel and runs the validate-retry loop: a payload
/// that fails its task schema or the caller's validator is retried with the
/// violations appended as a feedback context part, up to max_retries times.
class Gateway {
public:
    Gateway(std::shared_ptr<Provider> provider, ProviderConfig cfg);

    GenerationResponse generate(GenerationRequest req, const Validator& extra = {}) const;

    const ProviderConfig& config() const noexcept { return cfg_; }
    GatewayStats stats() const;

private:
    std::shared_ptr<Provider> provider_;
    ProviderConfig cfg_;
    std::unique_ptr<std::counting_semaphore<1024>> slots_;
    mutable std::atomic<std::uint64_t> requests_{0};
    mutable std::atomic<std::uint64_t> attempts_{0};
    mutable std::atomic<std::uint64_t> schema_failures_{0};
    mutable std::atomic<int> in_flight_{0};
    mutable std::atomic<int> peak_in_flight_{0};
};

/// True iff no context part contains any of the forbidden texts, comparing
/// whitespace-normalized forms. Forbidden texts that normalize to empty are
/// ignored.
bool assert_persona_isolation(const GenerationRequest& req, const std::vector<std::string>& forbidden);

std::uint64_t derive_seed(std::uint64_t base, std::string_view salt);

// ---------------------------------------------------------------------------
// Mock provider

/// One scripted behaviour. A rule matches when every present field matches
/// the request. `responses` is indexed by the request's retry attempt and
/// clamps to the last entry, so replies never depend on call order.
struct MockRule {
    std::optional<TaskTag> task;
    std::optional<Persona> persona;
    // label -> substring; label "*" matches any part.
    std::map<std::string, std::string> context_contains;
    std::map<std::string, std::string> params;
    std::vector<std::string> responses;
    // "unavailable" or "timeout" makes the rule fail instead of replying.
    std::optional<std::string> error;
};

struct MockScript {
    std::vector<MockRule> rules;
    bool fallback = true;
};

MockScript mock_script_from_json(const Json& j);
MockScript load_mock_script(const std::filesystem::path& path);

class MockProvider : public Provider {
public:
    explicit MockProvider(MockScript script = {});
    ProviderReply complete(const GenerationRequest& req, std::chrono::milliseconds timeout) override;

private:
    MockScript script_;
};

// Deterministic schema-valid payload derived from the request content and
// seed. Used when no script rule matches.
Json synthesize_payload(const GenerationRequest& req);

// ---------------------------------------------------------------------------
// Remote provider: POST {task_tag, persona, context_parts, params, seed}
// and expects {payload, provider_meta}.

class RemoteProvider : public Provider {
public:
    explicit RemoteProvider(std::string endpoint);
    ProviderReply complete(const GenerationRequest& req, std::chrono::milliseconds timeout) override;

private:
    std::string base_;
    std::string path_;
};

/// Records every request it forwards. Used for information-flow audits.
class RecordingProvider : public Provider {
public:
    explicit RecordingProvider(std::shared_ptr<Provider> inner);
    ProviderReply complete(const GenerationRequest& req, std::chrono::milliseconds timeout) override;
    std::vector<GenerationRequest> requests() const;

private:
    std::shared_ptr<Provider> inner_;
    mutable std::mutex mu_;
    std::vector<GenerationRequest> log_;
};

std::shared_ptr<Provider> make_provider(const ProviderConfig& cfg,
                                        const std::optional<std::filesystem::path>& mock_script = {});

}  // namespace folio::gateway
