#include "folio/immersive.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "folio/prompts.hpp"

namespace folio::immersive {
namespace {

// First letter of a word, case-folded; multi-byte code points compare whole.
std::string initial(std::string_view word) {
    for (std::size_t i = 0; i < word.size(); ++i) {
        auto c = static_cast<unsigned char>(word[i]);
        if (c < 0x80) {
            if (std::isalnum(c)) return std::string(1, static_cast<char>(std::tolower(c)));
            continue;
        }
        std::size_t len = c >= 0xF0 ? 4 : c >= 0xE0 ? 3 : 2;
        return std::string(word.substr(i, len));
    }
    return {};
}

std::string join_lines(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& i : items) out += (out.empty() ? "" : "\n") + i;
    return out;
}

std::string section_of(const doc::SourceDocument& material, const std::string& anchor) {
    if (material.find_section(anchor) != nullptr) return anchor;
    if (const auto* s = material.section_of_block(anchor)) return s->id;
    return {};
}

Mnemonic compose(const std::vector<std::string>& facts, const std::string& anchor, const std::string& sentence) {
    Mnemonic m;
    m.anchor_section = anchor;
    m.items = facts;
    m.sentence = sentence;
    m.id = content_id("mn", anchor + "\x1f" + join_lines(facts) + "\x1f" + sentence);
    return m;
}

Json placement_payload(const ImmersiveDocument& d, const Placement& p, bool redact) {
    switch (p.kind) {
        case AddonKind::timeline: {
            Json t = to_json(*d.find_timeline(p.ref));
            if (redact) {
                auto items = t["items"];
                std::sort(items.begin(), items.end(),
                          [](const Json& a, const Json& b) { return a["label"] < b["label"]; });
                t["items"] = items;
            }
            return t;
        }
        case AddonKind::mnemonic:
            for (const auto& m : d.addons.mnemonics)
                if (m.id == p.ref) return to_json(m);
            break;
        case AddonKind::illustration:
            for (const auto& s : d.addons.illustrations)
                if (s.id == p.ref) return to_json(s);
            break;
        case AddonKind::embedded_question: return assess::to_json(*d.find_question(p.ref), redact);
        case AddonKind::quiz: return assess::to_json(*d.find_quiz(p.ref), redact);
    }
    return nullptr;
}

AddonKind addon_kind_from_string(std::string_view s) {
    for (auto k : {AddonKind::timeline, AddonKind::mnemonic, AddonKind::illustration, AddonKind::embedded_question,
                   AddonKind::quiz})
        if (to_string(k) == s) return k;
    throw ValidationError("InvalidImmersiveDocument", "unknown addon kind " + std::string(s));
}

}  // namespace

std::vector<std::string> Timeline::labels() const {
    std::vector<std::string> out;
    for (const auto& i : items) out.push_back(i.label);
    return out;
}

std::string MockImageProvider::render(const IllustrationSpec& spec) {
    if (!available_) throw ProviderUnavailable("image provider is unavailable");
    return content_id("img", spec.anchor_block + "\x1f" + spec.brief);
}

std::vector<Timeline> detect_sequences(const personalize::PersonalizedDocument& pdoc,
                                       const gateway::Gateway& gateway, const Config& cfg) {
    const auto material = pdoc.rendered();
    auto req = prompts::make_request(gateway::TaskTag::timeline, cfg.seed, "timeline");
    req.add(std::string(prompts::kOutline), prompts::outline(material).dump());
    auto payload = gateway.generate(std::move(req)).payload;

    std::vector<Timeline> out;
    std::set<std::string> used_sections;
    for (const auto& c : payload["candidates"]) {
        std::string sid = c["section_id"].get<std::string>();
        const auto* section = material.find_section(sid);
        if (section == nullptr || used_sections.contains(sid)) {
            spdlog::debug("timeline candidate for {} dropped: unknown or duplicate section", sid);
            continue;
        }
        const std::string body = doc::SourceDocument::section_text(*section);
        Timeline t;
        t.anchor_section = sid;
        std::set<std::string> seen;
        bool ok = true;
        for (const auto& item : c["items"]) {
            std::string label = text::trim(item["label"].get<std::string>());
            if (label.empty() || !seen.insert(text::to_lower(label)).second || !text::contains_case_folded(body, label)) {
                ok = false;
                break;
            }
            t.items.push_back({label, item.value("description", std::string{})});
        }
        if (!ok || static_cast<int>(t.items.size()) < cfg.min_timeline_items) {
            spdlog::debug("timeline candidate for {} dropped: ungrounded, duplicate or too few labels", sid);
            continue;
        }
        t.id = content_id("tl", sid + "\x1f" + join_lines(t.labels()));
        used_sections.insert(sid);
        out.push_back(std::move(t));
    }
    return out;
}

double grade_timeline_submission(const Timeline& timeline, const std::vector<std::string>& submitted) {
    auto canonical = timeline.labels();
    auto a = canonical;
    auto b = submitted;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b || canonical.empty())
        throw ValidationError("NotAPermutation", "submission is not a permutation of the timeline labels");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < canonical.size(); ++i) hits += canonical[i] == submitted[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(canonical.size());
}

bool validate_mnemonic(const std::vector<std::string>& items, std::string_view sentence) {
    auto words = text::word_tokens(sentence);
    if (words.size() < items.size()) return false;
    for (std::size_t i = 0; i < items.size(); ++i) {
        std::string want = initial(items[i]);
        if (want.empty() || initial(words[i]) != want) return false;
    }
    return true;
}

Mnemonic generate_mnemonic(const std::vector<std::string>& facts, const gateway::Gateway& gateway,
                           const Config& cfg, const std::string& anchor_section) {
    if (facts.size() < 2 || facts.size() > 10)
        throw PreconditionViolation("a mnemonic needs 2 to 10 items, got " + std::to_string(facts.size()));
    auto req = prompts::make_request(gateway::TaskTag::mnemonic, cfg.seed, "mnemonic/" + join_lines(facts));
    req.add(std::string(prompts::kItems), join_lines(facts));
    auto payload = gateway.generate(std::move(req), [&](const Json& p) {
        std::vector<std::string> out;
        if (!validate_mnemonic(facts, p["sentence"].get<std::string>()))
            out.push_back("sentence words must start with the first letters of the items, in order");
        return out;
    }).payload;
    return compose(facts, anchor_section, payload["sentence"].get<std::string>());
}

std::vector<std::string> mnemonic_candidate_sections(const doc::SourceDocument& material) {
    std::vector<std::string> out;
    for (const auto& s : material.sections)
        if (std::any_of(s.blocks.begin(), s.blocks.end(), [](const doc::Block& b) { return b.kind == doc::BlockKind::list; }))
            out.push_back(s.id);
    return out;
}

Mnemonic generate_section_mnemonic(const std::string& section_id, const personalize::PersonalizedDocument& pdoc,
                                   const gateway::Gateway& gateway, const Config& cfg) {
    const auto material = pdoc.rendered();
    const auto* section = material.find_section(section_id);
    if (section == nullptr) throw DanglingAnchor("section " + section_id + " does not resolve");
    auto req = prompts::make_request(gateway::TaskTag::mnemonic, cfg.seed, "mnemonic/" + section_id);
    req.add(std::string(prompts::kSection), doc::SourceDocument::section_text(*section));
    auto payload = gateway.generate(std::move(req), [&](const Json& p) {
        std::vector<std::string> out;
        if (!p.contains("items")) {
            out.push_back("payload.items is required when no items are given");
            return out;
        }
        auto items = p["items"].get<std::vector<std::string>>();
        if (!validate_mnemonic(items, p["sentence"].get<std::string>()))
            out.push_back("sentence words must start with the first letters of the items, in order");
        return out;
    }).payload;
    return compose(payload["items"].get<std::vector<std::string>>(), section_id, payload["sentence"].get<std::string>());
}

std::vector<IllustrationSpec> plan_illustrations(const personalize::PersonalizedDocument& pdoc,
                                                 const gateway::Gateway& gateway, ImageProvider* images,
                                                 const Config& cfg) {
    const auto material = pdoc.rendered();
    auto req = prompts::make_request(gateway::TaskTag::illustration_brief, cfg.seed, "illustrations");
    req.add(std::string(prompts::kOutline), prompts::outline(material).dump());
    req.add(std::string(prompts::kInterest), pdoc.profile.interest);
    auto payload = gateway.generate(std::move(req), [&](const Json& p) {
        std::vector<std::string> out;
        for (const auto& s : p["illustrations"])
            if (material.find_block(s["block_id"].get<std::string>()) == nullptr)
                out.push_back("illustration anchored to unknown block " + s["block_id"].get<std::string>());
        return out;
    }).payload;

    std::vector<IllustrationSpec> specs;
    std::set<std::string> used_sections;
    for (const auto& s : payload["illustrations"]) {
        IllustrationSpec spec;
        spec.anchor_block = s["block_id"].get<std::string>();
        if (!used_sections.insert(material.section_of_block(spec.anchor_block)->id).second) continue;
        spec.brief = s["brief"].get<std::string>();
        spec.caption = s.value("caption", std::string{});
        spec.id = content_id("ill", spec.anchor_block + "\x1f" + spec.brief);
        specs.push_back(std::move(spec));
    }
    for (auto& spec : specs) {
        if (images == nullptr) continue;
        try {
            spec.image_ref = images->render(spec);
        } catch (const Error& e) {
            spdlog::warn("illustration {} left pending: {}", spec.id, e.what());
            spec.image_ref = std::string(kPendingImage);
        }
    }
    return specs;
}

std::string_view to_string(AddonKind kind) {
    switch (kind) {
        case AddonKind::timeline: return "timeline";
        case AddonKind::mnemonic: return "mnemonic";
        case AddonKind::illustration: return "illustration";
        case AddonKind::embedded_question: return "embedded_question";
        case AddonKind::quiz: return "quiz";
    }
    return "timeline";
}

const assess::Quiz* ImmersiveDocument::find_quiz(std::string_view id) const {
    for (const auto& q : assessments.quizzes)
        if (q.id == id) return &q;
    return nullptr;
}

const assess::MCQuestion* ImmersiveDocument::find_question(std::string_view id) const {
    for (const auto& q : assessments.embedded)
        if (q.id == id) return &q;
    for (const auto& quiz : assessments.quizzes)
        for (const auto& q : quiz.questions)
            if (q.id == id) return &q;
    return nullptr;
}

const Timeline* ImmersiveDocument::find_timeline(std::string_view id) const {
    for (const auto& t : addons.timelines)
        if (t.id == id) return &t;
    return nullptr;
}

ImmersiveDocument assemble_immersive(const personalize::PersonalizedDocument& pdoc, Addons addons,
                                     Assessments assessments) {
    const auto material = pdoc.rendered();
    std::map<std::string, std::vector<Placement>> placed;
    // Section-anchored kinds need a section id; illustrations need a block id;
    // embedded questions accept either.
    const auto place = [&](const std::string& anchor, AddonKind kind, const std::string& id) {
        std::string sid;
        if (kind == AddonKind::embedded_question) sid = section_of(material, anchor);
        else if (kind == AddonKind::illustration) sid = material.find_block(anchor) ? section_of(material, anchor) : "";
        else if (material.find_section(anchor) != nullptr) sid = anchor;
        if (sid.empty()) throw DanglingAnchor(std::string(to_string(kind)) + " " + id + " anchored to unknown " + anchor);
        placed[sid].push_back({kind, id});
    };
    for (const auto& t : addons.timelines) place(t.anchor_section, AddonKind::timeline, t.id);
    for (const auto& m : addons.mnemonics) place(m.anchor_section, AddonKind::mnemonic, m.id);
    for (const auto& s : addons.illustrations) place(s.anchor_block, AddonKind::illustration, s.id);
    for (const auto& q : assessments.embedded) place(q.grounding_ref, AddonKind::embedded_question, q.id);
    for (const auto& q : assessments.quizzes) place(q.section_ref, AddonKind::quiz, q.id);

    ImmersiveDocument out{pdoc, std::move(addons), std::move(assessments), {}};
    for (const auto& s : material.sections) {
        auto it = placed.find(s.id);
        out.sections.push_back({s.id, it == placed.end() ? std::vector<Placement>{} : it->second});
    }
    return out;
}

Json to_json(const Timeline& t) {
    Json items = Json::array();
    for (const auto& i : t.items) items.push_back({{"label", i.label}, {"description", i.description}});
    return {{"id", t.id}, {"anchor_section", t.anchor_section}, {"items", items}, {"exercise_enabled", t.exercise_enabled}};
}

Json to_json(const Mnemonic& m) {
    return {{"id", m.id}, {"anchor_section", m.anchor_section}, {"items", m.items}, {"sentence", m.sentence}};
}

Json to_json(const IllustrationSpec& s) {
    return {{"id", s.id},
            {"anchor_block", s.anchor_block},
            {"brief", s.brief},
            {"caption", s.caption},
            {"image_ref", s.image_ref}};
}

Json to_json(const ImmersiveDocument& d, bool redact) {
    Json sections = Json::array();
    for (const auto& s : d.sections) {
        Json addons = Json::array();
        for (const auto& p : s.placements)
            addons.push_back({{"kind", to_string(p.kind)}, {"ref", p.ref}, {"content", placement_payload(d, p, redact)}});
        sections.push_back({{"section_id", s.section_id}, {"addons", addons}});
    }
    return {{"pdoc", personalize::to_json(d.pdoc)}, {"sections", sections}};
}

ImmersiveDocument immersive_from_json(const Json& j) {
    try {
        ImmersiveDocument d;
        d.pdoc = personalize::personalized_from_json(j.at("pdoc"));
        for (const auto& s : j.at("sections")) {
            SectionAddons sa{s.at("section_id").get<std::string>(), {}};
            for (const auto& a : s.at("addons")) {
                auto kind = addon_kind_from_string(a.at("kind").get<std::string>());
                const auto& c = a.at("content");
                sa.placements.push_back({kind, a.at("ref").get<std::string>()});
                switch (kind) {
                    case AddonKind::timeline: {
                        Timeline t{c.at("id"), c.at("anchor_section"), {}, c.at("exercise_enabled")};
                        for (const auto& i : c.at("items")) t.items.push_back({i.at("label"), i.at("description")});
                        d.addons.timelines.push_back(std::move(t));
                        break;
                    }
                    case AddonKind::mnemonic:
                        d.addons.mnemonics.push_back(
                            {c.at("id"), c.at("anchor_section"), c.at("items").get<std::vector<std::string>>(), c.at("sentence")});
                        break;
                    case AddonKind::illustration:
                        d.addons.illustrations.push_back(
                            {c.at("id"), c.at("anchor_block"), c.at("brief"), c.at("caption"), c.at("image_ref")});
                        break;
                    case AddonKind::embedded_question: d.assessments.embedded.push_back(assess::question_from_json(c)); break;
                    case AddonKind::quiz: d.assessments.quizzes.push_back(assess::quiz_from_json(c)); break;
                }
            }
            d.sections.push_back(std::move(sa));
        }
        return d;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidImmersiveDocument", e.what());
    }
}

}  // namespace folio::immersive
