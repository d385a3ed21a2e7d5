// folio command line: ingest, generate, eval-rubric, eval-efficacy, serve.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "folio/document.hpp"
#include "folio/gateway.hpp"
#include "folio/pipeline.hpp"
#include "folio/rubric.hpp"
#include "folio/session_server.hpp"
#include "folio/statistics.hpp"

namespace fs = std::filesystem;
using folio::Json;

namespace {

enum Exit { kOk = 0, kOther = 1, kValidation = 2, kIo = 3, kProvider = 4 };

struct CliConfig {
    folio::gateway::ProviderConfig provider;
    folio::pipeline::Config pipeline;
    fs::path store = "store";
    std::optional<fs::path> mock_script;
    std::string log_level = "warn";
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw folio::IoError("cannot read " + p.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& p, const std::string& data) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out || !(out << data)) throw folio::IoError("cannot write " + p.string());
}

CliConfig load_config(const std::optional<fs::path>& path) {
    CliConfig cfg;
    if (!path) return cfg;
    Json j;
    try {
        j = Json::parse(read_file(*path));
    } catch (const Json::exception& e) {
        throw folio::ValidationError("InvalidConfig", std::string("malformed config: ") + e.what());
    }
    if (!j.is_object()) throw folio::ValidationError("InvalidConfig", "config must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (key == "provider") cfg.provider = folio::gateway::provider_config_from_json(value);
        else if (key == "pipeline") cfg.pipeline = folio::pipeline::config_from_json(value);
        else if (key == "store") cfg.store = value.get<std::string>();
        else if (key == "mock_script") cfg.mock_script = value.get<std::string>();
        else if (key == "log_level") cfg.log_level = value.get<std::string>();
        else throw folio::ValidationError("UnknownConfigKey", "unknown config key '" + key + "'");
    }
    return cfg;
}

std::vector<double> load_scores(const fs::path& path) {
    const std::string text = read_file(path);
    std::vector<double> out;
    if (path.extension() == ".json") {
        try {
            for (const auto& v : Json::parse(text)) out.push_back(v.get<double>());
        } catch (const Json::exception& e) {
            throw folio::ValidationError("InvalidScores", path.string() + ": " + e.what());
        }
    } else {
        std::string token;
        std::string cleaned = text;
        for (char& c : cleaned)
            if (c == ',') c = ' ';
        std::istringstream in(cleaned);
        while (in >> token) {
            try {
                std::size_t used = 0;
                out.push_back(std::stod(token, &used));
                if (used != token.size()) throw std::invalid_argument(token);
            } catch (const std::exception&) {
                throw folio::ValidationError("InvalidScores", path.string() + ": not a number '" + token + "'");
            }
        }
    }
    if (out.empty()) throw folio::EmptyInput("score file is empty: " + path.string());
    return out;
}

int exit_code(const folio::Error& e) {
    switch (e.error_class()) {
        case folio::ErrorClass::validation: return kValidation;
        case folio::ErrorClass::io: return kIo;
        case folio::ErrorClass::provider: return kProvider;
        case folio::ErrorClass::internal: return kOther;
    }
    return kOther;
}

class Output {
public:
    explicit Output(bool json) : json_(json) {}
    void emit(const Json& j, const std::string& text) const {
        if (json_) std::cout << folio::canonical_dump(j);
        else std::cout << text << (text.empty() || text.back() == '\n' ? "" : "\n");
    }
    void error(const std::string& code, const std::string& message) const {
        if (json_) std::cout << folio::canonical_dump({{"error", code}, {"message", message}});
        std::cerr << "error: " << message << "\n";
    }

private:
    bool json_;
};

int serve(const CliConfig& cfg, const std::string& host, int port, const Output& out) {
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    // Block before any thread starts so only sigwait sees the signals.
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    auto store = std::make_shared<folio::session::SessionStore>(cfg.store / "sessions");
    const auto bundles = store->load_bundles(cfg.store / "bundles");
    const auto sessions = store->load_sessions();
    folio::session::SessionServer server(store);
    const int bound = server.start(host, port);
    out.emit({{"host", host}, {"port", bound}, {"bundles", bundles}, {"sessions", sessions}},
             "listening on " + host + ":" + std::to_string(bound));
    std::cout.flush();

    int sig = 0;
    sigwait(&set, &sig);
    spdlog::info("signal {} received, shutting down", sig);
    server.stop();
    spdlog::default_logger()->flush();
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Personalized learning content generator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", FOLIO_VERSION);

    std::string format = "text";
    std::optional<std::string> config_path;
    std::optional<std::string> store_flag;
    std::optional<std::string> mock_flag;
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--store", store_flag, "Store directory");
    app.add_option("--mock-script", mock_flag, "Scripted mock provider responses");

    auto* ingest = app.add_subcommand("ingest", "Ingest a structured text document into the store");
    std::string ingest_path;
    ingest->add_option("path", ingest_path, "Document file")->required();

    auto* generate = app.add_subcommand("generate", "Generate a content bundle for a learner profile");
    std::string doc_id;
    std::string grade = "7";
    std::string interest;
    std::optional<std::uint64_t> seed;
    bool sequential = false;
    generate->add_option("document_id", doc_id, "Ingested document id")->required();
    generate->add_option("--grade", grade, "Grade 1-12 or undergraduate")->required();
    generate->add_option("--interest", interest, "Learner interest")->required();
    generate->add_option("--seed", seed, "Generation seed");
    generate->add_flag("--sequential", sequential, "Run Stage-2 generators one at a time");

    auto* rubric = app.add_subcommand("eval-rubric", "Aggregate rubric ratings");
    std::string ratings_path;
    std::vector<std::string> group_by;
    rubric->add_option("ratings", ratings_path, "CSV or JSON ratings file")->required();
    rubric->add_option("--group-by", group_by, "Grouping dimensions (component, material, rater, criterion)")
        ->delimiter(',');

    auto* efficacy = app.add_subcommand("eval-efficacy", "Compare two groups of scores");
    std::string scores_a;
    std::string scores_b;
    double alpha = 0.05;
    efficacy->add_option("scores_a", scores_a, "Scores of group A")->required();
    efficacy->add_option("scores_b", scores_b, "Scores of group B")->required();
    efficacy->add_option("--alpha", alpha, "Significance level");

    auto* serve_cmd = app.add_subcommand("serve", "Serve learner sessions over HTTP");
    int port = 8080;
    std::string host = "127.0.0.1";
    serve_cmd->add_option("--port", port, "Port, 0 for any free port");
    serve_cmd->add_option("--host", host, "Bind address");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kValidation;
    }

    const Output out(format == "json");
    try {
        CliConfig cfg = load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt);
        if (store_flag) cfg.store = *store_flag;
        if (mock_flag) cfg.mock_script = *mock_flag;
        auto logger = spdlog::stderr_color_mt("folio");
        spdlog::set_default_logger(logger);
        spdlog::set_level(spdlog::level::from_str(cfg.log_level));

        if (*ingest) {
            const auto document = folio::doc::ingest(read_file(ingest_path), fs::absolute(ingest_path).string());
            const auto target = cfg.store / "documents" / (document.id + ".json");
            write_file(target, folio::canonical_dump(folio::doc::to_json(document)));
            out.emit({{"document_id", document.id}, {"path", target.string()}, {"sections", document.sections.size()}},
                     document.id);
        } else if (*generate) {
            const auto doc_path = cfg.store / "documents" / (doc_id + ".json");
            if (!fs::exists(doc_path)) throw folio::ValidationError("UnknownDocument", "no ingested document " + doc_id);
            Json doc_json;
            try {
                doc_json = Json::parse(read_file(doc_path));
            } catch (const Json::exception& e) {
                throw folio::IoError("corrupt document file " + doc_path.string() + ": " + e.what());
            }
            const auto document = folio::doc::document_from_json(doc_json);
            folio::doc::LearnerProfile profile{folio::doc::GradeLevel::parse(grade), interest};
            folio::doc::validate_profile(profile, folio::doc::default_interest_catalog());
            if (seed) cfg.pipeline.seed = *seed;
            if (sequential) cfg.pipeline.concurrent = false;
            const auto provider_cfg = folio::gateway::with_env_overrides(cfg.provider);
            folio::gateway::Gateway gw(folio::gateway::make_provider(provider_cfg, cfg.mock_script), provider_cfg);
            const auto bundle = folio::pipeline::run_pipeline(document, profile, gw, cfg.pipeline);
            const auto dir = cfg.store / "bundles" / bundle.id;
            folio::pipeline::write_bundle(bundle, dir);
            Json failures = Json::object();
            for (const auto& [name, f] : bundle.failures) failures[name] = f.code;
            const std::string manifest_hash = folio::sha256_hex(folio::canonical_dump(bundle.manifest));
            out.emit({{"bundle_id", bundle.id},
                      {"path", dir.string()},
                      {"manifest_sha256", manifest_hash},
                      {"failures", failures}},
                     dir.string());
            for (const auto& [name, f] : bundle.failures) spdlog::warn("artifact {} failed: {}", name, f.message);
        } else if (*rubric) {
            const auto ratings = folio::eval::load_ratings(ratings_path);
            if (group_by.empty()) {
                const auto report = folio::eval::rubric_report(ratings);
                out.emit(folio::eval::to_json(report), folio::eval::format_table(report));
            } else {
                std::vector<folio::eval::Dimension> dims;
                for (const auto& g : group_by) dims.push_back(folio::eval::dimension_from_string(g));
                const auto rows = folio::eval::aggregate_ratings(ratings, dims);
                Json j = Json::array();
                std::ostringstream text;
                for (const auto& r : rows) {
                    j.push_back(folio::eval::to_json(r, dims));
                    for (const auto& k : r.key) text << k << "\t";
                    if (r.mean) text << std::fixed << std::setprecision(4) << *r.mean;
                    else text << "undefined";
                    text << "\t(n=" << r.n << ", na=" << r.n_na << ")\n";
                }
                out.emit(j, text.str());
            }
        } else if (*efficacy) {
            const auto a = load_scores(scores_a);
            const auto b = load_scores(scores_b);
            const auto report = folio::eval::efficacy_analysis(a, b, alpha);
            std::ostringstream text;
            text << "group a: n=" << report.n_a << " mean=" << report.mean_a << "\n";
            text << "group b: n=" << report.n_b << " mean=" << report.mean_b << "\n";
            if (report.normality_a) text << "shapiro-wilk a: W=" << report.normality_a->statistic << " p=" << report.normality_a->p_value << "\n";
            if (report.normality_b) text << "shapiro-wilk b: W=" << report.normality_b->statistic << " p=" << report.normality_b->p_value << "\n";
            text << "method: " << report.method << "\n";
            if (report.test)
                text << "U=" << report.test->statistic << " p=" << report.test->p_value << " ("
                     << folio::eval::to_string(report.test->method) << ")\n"
                     << "significant at " << report.alpha << ": " << (report.significant ? "yes" : "no") << "\n";
            for (const auto& n : report.notes) text << "note: " << n << "\n";
            out.emit(folio::eval::to_json(report), text.str());
        } else if (*serve_cmd) {
            return serve(cfg, host, port, out);
        }
        return kOk;
    } catch (const folio::Error& e) {
        out.error(e.code(), e.what());
        return exit_code(e);
    } catch (const fs::filesystem_error& e) {
        out.error("IoError", e.what());
        return kIo;
    } catch (const std::exception& e) {
        out.error("Internal", e.what());
        return kOther;
    }
}
