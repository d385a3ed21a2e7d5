#include "folio/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "folio/errors.hpp"
#include "folio/parallel.hpp"

namespace folio::pipeline {
namespace {

namespace fs = std::filesystem;

constexpr int kFormatVersion = 1;

// Rejects keys of `j` that are not in `known`.
void check_keys(const Json& j, const std::set<std::string>& known, const std::string& where) {
    if (!j.is_object()) throw ValidationError("InvalidConfig", where + " must be an object");
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw ValidationError("UnknownConfigKey", "unknown config key " + where + "." + key);
}

template <class T>
void read_key(const Json& j, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j[key].get<T>();
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidConfig", std::string("config key ") + key + ": " + e.what());
    }
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

std::string artifact_hash(const Json& j) { return sha256_hex(canonical_dump(j)); }

Json questions_json(const std::vector<assess::MCQuestion>& qs) {
    Json out = Json::array();
    for (const auto& q : qs) out.push_back(assess::to_json(q));
    return out;
}

Json quizzes_json(const std::vector<assess::Quiz>& qs) {
    Json out = Json::array();
    for (const auto& q : qs) out.push_back(assess::to_json(q));
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("failed writing " + path.string());
}

std::optional<Json> read_json_file(const fs::path& path) {
    if (!fs::exists(path)) return std::nullopt;
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return Json::parse(ss.str());
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidBundle", path.string() + ": " + e.what());
    }
}

// First paragraph block of every section that has one.
std::vector<std::string> embedded_anchors(const doc::SourceDocument& material) {
    std::vector<std::string> out;
    for (const auto& s : material.sections)
        for (const auto& b : s.blocks)
            if (b.kind == doc::BlockKind::paragraph) {
                out.push_back(b.id);
                break;
            }
    return out;
}

}  // namespace

Json to_json(const Config& cfg) {
    return {{"seed", cfg.seed},
            {"concurrent", cfg.concurrent},
            {"personalization",
             {{"tolerance", cfg.personalization.tolerance},
              {"max_relevel_attempts", cfg.personalization.max_relevel_attempts},
              {"max_fraction", cfg.personalization.max_fraction},
              {"max_segments", cfg.personalization.max_segments}}},
            {"views", views::to_json(cfg.views)},
            {"immersive", {{"min_timeline_items", cfg.immersive.min_timeline_items}}}};
}

Config config_from_json(const Json& j) {
    Config cfg;
    check_keys(j, {"seed", "concurrent", "personalization", "views", "immersive"}, "pipeline");
    read_key(j, "seed", cfg.seed);
    read_key(j, "concurrent", cfg.concurrent);
    if (j.contains("personalization")) {
        const auto& p = j["personalization"];
        check_keys(p, {"tolerance", "max_relevel_attempts", "max_fraction", "max_segments"}, "personalization");
        read_key(p, "tolerance", cfg.personalization.tolerance);
        read_key(p, "max_relevel_attempts", cfg.personalization.max_relevel_attempts);
        read_key(p, "max_fraction", cfg.personalization.max_fraction);
        read_key(p, "max_segments", cfg.personalization.max_segments);
    }
    if (j.contains("views")) {
        const auto& v = j["views"];
        check_keys(v, {"max_bullets", "words_per_second", "max_turns", "coverage_threshold", "reveal_per_turn"}, "views");
        read_key(v, "max_bullets", cfg.views.max_bullets);
        read_key(v, "words_per_second", cfg.views.words_per_second);
        read_key(v, "max_turns", cfg.views.max_turns);
        read_key(v, "coverage_threshold", cfg.views.coverage_threshold);
        read_key(v, "reveal_per_turn", cfg.views.reveal_per_turn);
    }
    if (j.contains("immersive")) {
        check_keys(j["immersive"], {"min_timeline_items"}, "immersive");
        read_key(j["immersive"], "min_timeline_items", cfg.immersive.min_timeline_items);
    }
    const auto& p = cfg.personalization;
    if (p.tolerance < 0 || p.max_relevel_attempts < 1 || p.max_fraction < 0 || p.max_fraction > 1 || p.max_segments < 0)
        throw ValidationError("InvalidConfig", "personalization settings out of range");
    const auto& v = cfg.views;
    if (v.max_bullets < 1 || !(v.words_per_second > 0) || v.max_turns < 1 || v.coverage_threshold < 0 ||
        v.coverage_threshold > 1 || v.reveal_per_turn < 1)
        throw ValidationError("InvalidConfig", "view settings out of range");
    if (cfg.immersive.min_timeline_items < 1) throw ValidationError("InvalidConfig", "min_timeline_items must be positive");
    return cfg;
}

std::string pdoc_hash(const personalize::PersonalizedDocument& pdoc) {
    return sha256_hex(canonical_dump(personalize::to_json(pdoc)));
}

ContentBundle run_pipeline(const doc::SourceDocument& doc, const doc::LearnerProfile& profile,
                           const gateway::Gateway& gateway, const Config& cfg, immersive::ImageProvider* images) {
    auto pcfg = cfg.personalization;
    auto vcfg = cfg.views;
    auto icfg = cfg.immersive;
    pcfg.seed = vcfg.seed = icfg.seed = cfg.seed;
    pcfg.parallel = vcfg.parallel = icfg.parallel = cfg.concurrent;
    const assess::Config acfg{cfg.seed};

    ContentBundle bundle;
    auto t0 = std::chrono::steady_clock::now();
    bundle.pdoc = personalize::personalize(doc, profile, gateway, pcfg);
    bundle.timings_ms["personalize"] = elapsed_ms(t0);
    const auto& pdoc = bundle.pdoc;
    const std::string hash = pdoc_hash(pdoc);
    bundle.id = "bnd-" + hash.substr(0, 12);

    const auto material = pdoc.rendered();
    std::vector<std::string> quiz_sections;
    for (const auto& s : material.sections)
        if (!s.blocks.empty()) quiz_sections.push_back(s.id);
    const auto anchors = embedded_anchors(material);
    const auto mnemonic_sections = immersive::mnemonic_candidate_sections(material);

    std::vector<assess::Quiz> quizzes(quiz_sections.size());
    std::vector<assess::MCQuestion> embedded(anchors.size());
    std::vector<immersive::Mnemonic> mnemonics(mnemonic_sections.size());
    std::vector<immersive::Timeline> timelines;
    std::vector<immersive::IllustrationSpec> illustrations;

    struct Task {
        std::string name;
        std::function<void()> run;
    };
    std::vector<Task> tasks;
    tasks.push_back({"slides", [&] { bundle.slides = views::generate_slides(pdoc, gateway, vcfg); }});
    tasks.push_back({"lesson", [&] { bundle.lesson = views::generate_dialogue_lesson(pdoc, gateway, vcfg); }});
    tasks.push_back({"mindmap", [&] { bundle.mindmap = views::generate_mind_map(pdoc, gateway, vcfg); }});
    tasks.push_back({"timelines", [&] { timelines = immersive::detect_sequences(pdoc, gateway, icfg); }});
    tasks.push_back({"illustrations", [&] { illustrations = immersive::plan_illustrations(pdoc, gateway, images, icfg); }});
    for (std::size_t i = 0; i < mnemonic_sections.size(); ++i)
        tasks.push_back({"mnemonic:" + mnemonic_sections[i], [&, i] {
                             mnemonics[i] = immersive::generate_section_mnemonic(mnemonic_sections[i], pdoc, gateway, icfg);
                         }});
    for (std::size_t i = 0; i < quiz_sections.size(); ++i)
        tasks.push_back({"quiz:" + quiz_sections[i],
                         [&, i] { quizzes[i] = assess::generate_quiz(quiz_sections[i], pdoc, gateway, acfg); }});
    for (std::size_t i = 0; i < anchors.size(); ++i)
        tasks.push_back({"embedded:" + anchors[i],
                         [&, i] { embedded[i] = assess::generate_embedded_question(anchors[i], pdoc, gateway, acfg); }});

    std::vector<std::optional<ArtifactFailure>> failed(tasks.size());
    std::vector<double> took(tasks.size(), 0.0);
    const int workers = cfg.concurrent ? gateway.config().max_parallel : 1;
    parallel_for(tasks.size(), workers, [&](std::size_t i) {
        auto start = std::chrono::steady_clock::now();
        try {
            tasks[i].run();
        } catch (const Error& e) {
            failed[i] = ArtifactFailure{e.code(), e.what()};
        } catch (const std::exception& e) {
            failed[i] = ArtifactFailure{"Internal", e.what()};
        }
        took[i] = elapsed_ms(start);
    });

    std::set<std::string> failed_names;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        bundle.timings_ms[tasks[i].name] = took[i];
        if (failed[i]) {
            spdlog::warn("artifact {} failed: {} {}", tasks[i].name, failed[i]->code, failed[i]->message);
            bundle.failures[tasks[i].name] = *failed[i];
            failed_names.insert(tasks[i].name);
        }
    }

    // Narration depends on the slide deck.
    if (bundle.slides) {
        auto start = std::chrono::steady_clock::now();
        try {
            bundle.narration = views::generate_narration(*bundle.slides, gateway, vcfg);
        } catch (const Error& e) {
            bundle.failures["narration"] = {e.code(), e.what()};
        }
        bundle.timings_ms["narration"] = elapsed_ms(start);
    } else {
        bundle.failures["narration"] = {"DependencyFailed", "slide deck is unavailable"};
    }

    immersive::Addons addons;
    immersive::Assessments assessments;
    addons.timelines = timelines;
    addons.illustrations = illustrations;
    for (std::size_t i = 0; i < mnemonic_sections.size(); ++i)
        if (!failed_names.contains("mnemonic:" + mnemonic_sections[i])) addons.mnemonics.push_back(mnemonics[i]);
    for (std::size_t i = 0; i < quiz_sections.size(); ++i)
        if (!failed_names.contains("quiz:" + quiz_sections[i])) bundle.quizzes.push_back(quizzes[i]);
    for (std::size_t i = 0; i < anchors.size(); ++i)
        if (!failed_names.contains("embedded:" + anchors[i])) bundle.embedded.push_back(embedded[i]);
    assessments.quizzes = bundle.quizzes;
    assessments.embedded = bundle.embedded;
    try {
        bundle.immersive = immersive::assemble_immersive(pdoc, std::move(addons), std::move(assessments));
    } catch (const Error& e) {
        bundle.failures["immersive"] = {e.code(), e.what()};
    }
    bundle.timings_ms["total"] = elapsed_ms(t0);

    // Manifest: every artifact records the pdoc hash it was built from.
    Json artifacts = Json::object();
    const auto record = [&](const std::string& name, const std::optional<Json>& value) {
        Json entry = {{"pdoc_hash", hash}};
        if (auto it = bundle.failures.find(name); it != bundle.failures.end()) {
            entry["status"] = "failed";
            entry["error"] = {{"code", it->second.code}, {"message", it->second.message}};
        } else if (value) {
            entry["status"] = "ok";
            entry["sha256"] = artifact_hash(*value);
        }
        artifacts[name] = entry;
    };
    record("pdoc", personalize::to_json(pdoc));
    record("immersive", bundle.immersive ? std::optional<Json>(immersive::to_json(*bundle.immersive)) : std::nullopt);
    record("slides", bundle.slides ? std::optional<Json>(views::to_json(*bundle.slides)) : std::nullopt);
    record("narration", bundle.narration ? std::optional<Json>(views::to_json(*bundle.narration)) : std::nullopt);
    record("lesson", bundle.lesson ? std::optional<Json>(views::to_json(*bundle.lesson)) : std::nullopt);
    record("mindmap", bundle.mindmap ? std::optional<Json>(views::to_json(*bundle.mindmap)) : std::nullopt);
    Json tl = Json::array();
    for (const auto& t : timelines) tl.push_back(immersive::to_json(t));
    record("timelines", tl);
    Json il = Json::array();
    for (const auto& s : illustrations) il.push_back(immersive::to_json(s));
    record("illustrations", il);
    for (std::size_t i = 0; i < mnemonic_sections.size(); ++i)
        record("mnemonic:" + mnemonic_sections[i], immersive::to_json(mnemonics[i]));
    for (std::size_t i = 0; i < quiz_sections.size(); ++i)
        record("quiz:" + quiz_sections[i], assess::to_json(quizzes[i]));
    for (std::size_t i = 0; i < anchors.size(); ++i)
        record("embedded:" + anchors[i], assess::to_json(embedded[i]));

    // Execution mode is left out so sequential and concurrent runs agree.
    Json snapshot = to_json(cfg);
    snapshot.erase("concurrent");
    Json provider = gateway::to_json(gateway.config());
    provider.erase("max_parallel");
    bundle.manifest = {{"bundle_id", bundle.id},
                       {"format_version", kFormatVersion},
                       {"versions", {{"folio", FOLIO_VERSION}, {"bundle_format", kFormatVersion}}},
                       {"source_document_id", doc.id},
                       {"profile", doc::to_json(profile)},
                       {"pdoc_hash", hash},
                       {"artifacts", artifacts},
                       {"config", snapshot},
                       {"provider", provider}};
    return bundle;
}

Json to_json(const ContentBundle& b) {
    Json failures = Json::object();
    for (const auto& [name, f] : b.failures) failures[name] = {{"code", f.code}, {"message", f.message}};
    return {{"id", b.id},
            {"manifest", b.manifest},
            {"pdoc", personalize::to_json(b.pdoc)},
            {"immersive", b.immersive ? immersive::to_json(*b.immersive) : Json(nullptr)},
            {"slides", b.slides ? views::to_json(*b.slides) : Json(nullptr)},
            {"narration", b.narration ? views::to_json(*b.narration) : Json(nullptr)},
            {"lesson", b.lesson ? views::to_json(*b.lesson) : Json(nullptr)},
            {"mindmap", b.mindmap ? views::to_json(*b.mindmap) : Json(nullptr)},
            {"quizzes", quizzes_json(b.quizzes)},
            {"embedded", questions_json(b.embedded)},
            {"failures", failures}};
}

ContentBundle bundle_from_json(const Json& j) {
    try {
        ContentBundle b;
        b.id = j.at("id").get<std::string>();
        b.manifest = j.at("manifest");
        b.pdoc = personalize::personalized_from_json(j.at("pdoc"));
        if (!j.at("immersive").is_null()) b.immersive = immersive::immersive_from_json(j["immersive"]);
        if (!j.at("slides").is_null()) b.slides = views::slide_deck_from_json(j["slides"]);
        if (!j.at("narration").is_null()) b.narration = views::narration_from_json(j["narration"]);
        if (!j.at("lesson").is_null()) b.lesson = views::lesson_from_json(j["lesson"]);
        if (!j.at("mindmap").is_null()) b.mindmap = views::mind_map_from_json(j["mindmap"]);
        for (const auto& q : j.at("quizzes")) b.quizzes.push_back(assess::quiz_from_json(q));
        for (const auto& q : j.at("embedded")) b.embedded.push_back(assess::question_from_json(q));
        for (const auto& [name, f] : j.at("failures").items())
            b.failures[name] = {f.at("code").get<std::string>(), f.at("message").get<std::string>()};
        return b;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidBundle", e.what());
    }
}

void write_bundle(const ContentBundle& b, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    const Json all = to_json(b);
    write_file(dir / "manifest.json", canonical_dump(b.manifest));
    write_file(dir / "failures.json", canonical_dump(all["failures"]));
    write_file(dir / "pdoc.json", canonical_dump(all["pdoc"]));
    for (const char* name : {"immersive", "slides", "narration", "lesson", "mindmap"}) {
        fs::remove(dir / (std::string(name) + ".json"));
        if (!all[name].is_null()) write_file(dir / (std::string(name) + ".json"), canonical_dump(all[name]));
    }
    if (b.slides) write_file(dir / "slides.txt", views::slide_outline(*b.slides));
    write_file(dir / "quizzes.json", canonical_dump(all["quizzes"]));
    write_file(dir / "embedded.json", canonical_dump(all["embedded"]));
    Json timings = Json::object();
    for (const auto& [k, v] : b.timings_ms) timings[k] = v;
    write_file(dir / "timings.json", canonical_dump(timings));
}

ContentBundle read_bundle(const fs::path& dir) {
    auto manifest = read_json_file(dir / "manifest.json");
    if (!manifest) throw IoError("no bundle manifest in " + dir.string());
    Json all = {{"id", (*manifest).value("bundle_id", std::string{})}, {"manifest", *manifest}};
    for (const char* name : {"pdoc", "immersive", "slides", "narration", "lesson", "mindmap", "quizzes", "embedded", "failures"}) {
        auto part = read_json_file(dir / (std::string(name) + ".json"));
        all[name] = part ? *part : Json(nullptr);
    }
    if (all["pdoc"].is_null()) throw IoError("bundle " + dir.string() + " has no pdoc.json");
    for (const char* name : {"quizzes", "embedded"})
        if (all[name].is_null()) all[name] = Json::array();
    if (all["failures"].is_null()) all["failures"] = Json::object();
    auto b = bundle_from_json(all);
    if (auto timings = read_json_file(dir / "timings.json"))
        for (const auto& [k, v] : timings->items()) b.timings_ms[k] = v.get<double>();
    return b;
}

}  // namespace folio::pipeline
