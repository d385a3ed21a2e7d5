#include "folio/transformations.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "folio/errors.hpp"
#include "folio/parallel.hpp"
#include "folio/prompts.hpp"

namespace folio::views {
namespace {

int workers(const gateway::Gateway& gw, const Config& cfg) { return cfg.parallel ? gw.config().max_parallel : 1; }

std::optional<std::string> opt_string(const Json& j, const char* key) {
    if (j.contains(key) && j[key].is_string()) return j[key].get<std::string>();
    return std::nullopt;
}

void put_optional(Json& j, const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
}

std::string_view to_string(Speaker s) { return s == Speaker::teacher ? "teacher" : "student"; }
std::string_view to_string(Termination t) { return t == Termination::coverage_met ? "coverage_met" : "max_turns"; }

Slide slide_from_json(const Json& j) {
    Slide s;
    s.title = j.at("title").get<std::string>();
    s.bullets = j.at("bullets").get<std::vector<std::string>>();
    s.section_refs = j.at("section_refs").get<std::vector<std::string>>();
    s.visual_brief = opt_string(j, "visual_brief");
    s.opener_question = opt_string(j, "opener_question");
    s.activity = opt_string(j, "activity");
    return s;
}

std::vector<std::string> slide_coverage_violations(const Json& p, const doc::SourceDocument& material,
                                                   int max_bullets) {
    std::vector<std::string> out;
    std::set<std::string> referenced;
    for (std::size_t i = 0; i < p["slides"].size(); ++i) {
        const auto& s = p["slides"][i];
        if (static_cast<int>(s["bullets"].size()) > max_bullets)
            out.push_back("slides[" + std::to_string(i) + "] has more than " + std::to_string(max_bullets) +
                          " bullets");
        for (const auto& r : s["section_refs"]) {
            std::string id = r.get<std::string>();
            if (material.find_section(id) == nullptr)
                out.push_back("slides[" + std::to_string(i) + "] references unknown section " + id);
            referenced.insert(id);
        }
    }
    std::set<std::string> omitted;
    for (const auto& o : p.value("omissions", Json::array())) {
        if (!o.is_string()) {
            out.push_back("omissions entries must be section ids");
            continue;
        }
        std::string id = o.get<std::string>();
        if (material.find_section(id) == nullptr) out.push_back("omission of unknown section " + id);
        if (referenced.contains(id)) out.push_back("section " + id + " is both referenced and omitted");
        omitted.insert(id);
    }
    for (const auto& sec : material.sections)
        if (!referenced.contains(sec.id) && !omitted.contains(sec.id))
            out.push_back("section " + sec.id + " is neither referenced nor omitted");
    return out;
}

std::string history_text(const std::vector<DialogueTurn>& turns) {
    std::string out;
    for (const auto& t : turns) {
        if (!out.empty()) out += "\n";
        out += (t.speaker == Speaker::teacher ? "Teacher: " : "Student: ") + t.text;
    }
    return out;
}

Json concepts_state(const ConceptGraph& graph, const std::set<std::string>& revealed) {
    Json out = Json::array();
    for (const auto& n : graph.nodes)
        out.push_back({{"id", n.id}, {"label", n.label}, {"summary", n.summary}, {"revealed", revealed.contains(n.id)}});
    return out;
}

void collect_nodes(const MindNode& n, std::size_t& count) {
    ++count;
    for (const auto& c : n.children) collect_nodes(c, count);
}

const MindNode* find_node(const MindNode& n, std::string_view id) {
    if (n.id == id) return &n;
    for (const auto& c : n.children)
        if (const auto* hit = find_node(c, id)) return hit;
    return nullptr;
}

MindNode* find_node(MindNode& n, std::string_view id) {
    return const_cast<MindNode*>(find_node(static_cast<const MindNode&>(n), id));
}

MindNode build_node(const Json& j, std::string id, bool expanded) {
    MindNode n;
    n.id = id;
    n.label = j.at("label").get<std::string>();
    n.section_ref = opt_string(j, "section_ref");
    n.expanded = expanded;
    if (j.contains("annotation") && j["annotation"].is_object()) {
        const auto& a = j["annotation"];
        n.annotation = a.contains("text") ? Annotation{Annotation::Kind::text, a["text"].get<std::string>()}
                                          : Annotation{Annotation::Kind::image_ref, a["image_ref"].get<std::string>()};
    }
    if (j.contains("children") && j["children"].is_array()) {
        for (std::size_t i = 0; i < j["children"].size(); ++i)
            n.children.push_back(build_node(j["children"][i], id + "." + std::to_string(i), false));
    }
    return n;
}

Json node_json(const MindNode& n) {
    Json children = Json::array();
    for (const auto& c : n.children) children.push_back(node_json(c));
    Json j = {{"id", n.id}, {"label", n.label}, {"expanded", n.expanded}, {"children", children}};
    j["section_ref"] = n.section_ref ? Json(*n.section_ref) : Json(nullptr);
    if (n.annotation) {
        j["annotation"] = n.annotation->kind == Annotation::Kind::text ? Json{{"text", n.annotation->value}}
                                                                        : Json{{"image_ref", n.annotation->value}};
    } else {
        j["annotation"] = nullptr;
    }
    return j;
}

MindNode node_from_json(const Json& j) {
    MindNode n;
    n.id = j.at("id").get<std::string>();
    n.label = j.at("label").get<std::string>();
    n.expanded = j.at("expanded").get<bool>();
    n.section_ref = opt_string(j, "section_ref");
    if (j.contains("annotation") && j["annotation"].is_object()) {
        const auto& a = j["annotation"];
        n.annotation = a.contains("text") ? Annotation{Annotation::Kind::text, a["text"].get<std::string>()}
                                          : Annotation{Annotation::Kind::image_ref, a["image_ref"].get<std::string>()};
    }
    for (const auto& c : j.value("children", Json::array())) n.children.push_back(node_from_json(c));
    return n;
}

void annotation_violations(const Json& node, const std::string& material, const std::string& where,
                           std::vector<std::string>& out) {
    if (node.contains("annotation") && node["annotation"].is_object() && node["annotation"].contains("text") &&
        !text::shares_content_word(node["annotation"]["text"].get<std::string>(), material))
        out.push_back(where + ".annotation is not drawn from the material");
    if (node.contains("children") && node["children"].is_array())
        for (std::size_t i = 0; i < node["children"].size(); ++i)
            annotation_violations(node["children"][i], material, where + ".children[" + std::to_string(i) + "]", out);
}

}  // namespace

Json to_json(const Config& cfg) {
    return {{"max_bullets", cfg.max_bullets},
            {"words_per_second", cfg.words_per_second},
            {"max_turns", cfg.max_turns},
            {"coverage_threshold", cfg.coverage_threshold},
            {"reveal_per_turn", cfg.reveal_per_turn}};
}

std::vector<std::string> SlideDeck::referenced_sections() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : slides)
        for (const auto& r : s.section_refs)
            if (seen.insert(r).second) out.push_back(r);
    return out;
}

SlideDeck generate_slides(const personalize::PersonalizedDocument& pdoc, const gateway::Gateway& gateway,
                          const Config& cfg) {
    const auto material = pdoc.rendered();
    auto req = prompts::make_request(gateway::TaskTag::slides, cfg.seed, "slides");
    req.add(std::string(prompts::kOutline), prompts::outline(material).dump());
    req.add(std::string(prompts::kInterest), pdoc.profile.interest);
    req.params["max_bullets"] = std::to_string(cfg.max_bullets);
    auto response = gateway.generate(
        std::move(req), [&](const Json& p) { return slide_coverage_violations(p, material, cfg.max_bullets); });

    SlideDeck deck;
    for (const auto& s : response.payload["slides"]) deck.slides.push_back(slide_from_json(s));
    for (const auto& o : response.payload.value("omissions", Json::array())) deck.omissions.push_back(o.get<std::string>());
    return deck;
}

double estimate_seconds(std::string_view text, double words_per_second) {
    return static_cast<double>(text::word_tokens(text).size()) / words_per_second;
}

NarrationTrack generate_narration(const SlideDeck& deck, const gateway::Gateway& gateway, const Config& cfg) {
    if (deck.slides.empty()) throw PreconditionViolation("narration needs at least one slide");
    if (!(cfg.words_per_second > 0.0)) throw ValidationError("InvalidConfig", "words_per_second must be positive");
    NarrationTrack track;
    track.segments.resize(deck.slides.size());
    parallel_for(deck.slides.size(), workers(gateway, cfg), [&](std::size_t i) {
        const auto& slide = deck.slides[i];
        Json sj = {{"title", slide.title}, {"bullets", slide.bullets}};
        auto req = prompts::make_request(gateway::TaskTag::narration, cfg.seed, "narration/" + std::to_string(i));
        req.add(std::string(prompts::kSlide), sj.dump());
        req.params["slide_index"] = std::to_string(i);
        auto text = gateway.generate(std::move(req)).payload["text"].get<std::string>();
        track.segments[i] = {i, text, estimate_seconds(text, cfg.words_per_second)};
    });
    return track;
}

std::string slide_outline(const SlideDeck& deck) {
    std::string out;
    for (std::size_t i = 0; i < deck.slides.size(); ++i) {
        const auto& s = deck.slides[i];
        out += std::to_string(i + 1) + ". " + s.title + "\n";
        if (s.opener_question) out += "   ? " + *s.opener_question + "\n";
        for (const auto& b : s.bullets) out += "   - " + b + "\n";
        if (s.activity) out += "   Activity: " + *s.activity + "\n";
        if (s.visual_brief) out += "   Visual: " + *s.visual_brief + "\n";
    }
    if (!deck.omissions.empty()) {
        out += "Omitted sections:";
        for (const auto& o : deck.omissions) out += " " + o;
        out += "\n";
    }
    return out;
}

bool ConceptGraph::contains(std::string_view id) const {
    return std::any_of(nodes.begin(), nodes.end(), [&](const ConceptNode& n) { return n.id == id; });
}

ConceptGraph generate_concept_graph(const personalize::PersonalizedDocument& pdoc, const gateway::Gateway& gateway,
                                    const Config& cfg) {
    auto req = prompts::make_request(gateway::TaskTag::concept_graph, cfg.seed, "concepts");
    req.add(std::string(prompts::kOutline), prompts::outline(pdoc.rendered()).dump());
    auto response = gateway.generate(std::move(req));
    ConceptGraph graph;
    for (const auto& n : response.payload["nodes"])
        graph.nodes.push_back({n["id"].get<std::string>(), n["label"].get<std::string>(),
                               n.value("summary", std::string{})});
    for (const auto& e : response.payload["edges"])
        graph.edges.push_back({e["from"].get<std::string>(), e["to"].get<std::string>(), e["relation"].get<std::string>()});
    if (graph.nodes.empty()) throw PreconditionViolation("no concepts could be derived");
    return graph;
}

DialogueLesson generate_dialogue_lesson(const personalize::PersonalizedDocument& pdoc,
                                        const gateway::Gateway& gateway, const Config& cfg) {
    if (cfg.max_turns < 1) throw ValidationError("InvalidConfig", "max_turns must be at least 1");
    const auto material = pdoc.rendered();
    const std::string source = doc::flatten_text(material);

    std::vector<std::string> forbidden;
    for (const auto* d : {&material, &pdoc.base})
        for (const auto& s : d->sections)
            for (const auto& b : s.blocks) forbidden.push_back(b.text);

    DialogueLesson lesson;
    lesson.concept_graph = generate_concept_graph(pdoc, gateway, cfg);
    const auto& graph = lesson.concept_graph;
    std::set<std::string> revealed;
    const auto covered = [&] {
        return static_cast<double>(revealed.size()) / static_cast<double>(graph.nodes.size()) >=
               cfg.coverage_threshold;
    };

    for (int turn = 0; turn < cfg.max_turns; ++turn) {
        const bool teacher = turn % 2 == 0;
        auto req = prompts::make_request(gateway::TaskTag::dialogue_turn, cfg.seed, "dialogue/" + std::to_string(turn));
        req.persona = teacher ? gateway::Persona::teacher : gateway::Persona::student;
        req.params["turn_index"] = std::to_string(turn);
        req.add(std::string(prompts::kHistory), history_text(lesson.turns));

        gateway::Validator check;
        if (teacher) {
            req.add(std::string(prompts::kSource), source);
            req.add(std::string(prompts::kConcepts), concepts_state(graph, revealed).dump());
            req.params["reveal_per_turn"] = std::to_string(cfg.reveal_per_turn);
            check = [&](const Json& p) {
                std::vector<std::string> out;
                std::set<std::string> seen;
                for (const auto& c : p.value("revealed_concepts", Json::array())) {
                    std::string id = c.get<std::string>();
                    if (!graph.contains(id)) out.push_back("revealed concept " + id + " is not in the concept graph");
                    else if (revealed.contains(id) || !seen.insert(id).second)
                        out.push_back("concept " + id + " was already revealed");
                }
                return out;
            };
        } else if (!gateway::assert_persona_isolation(req, forbidden)) {
            throw IsolationViolation("student request at turn " + std::to_string(turn) + " contains source text");
        }

        auto payload = gateway.generate(std::move(req), check).payload;
        DialogueTurn t;
        t.speaker = teacher ? Speaker::teacher : Speaker::student;
        t.text = payload["text"].get<std::string>();
        if (teacher)
            for (const auto& c : payload.value("revealed_concepts", Json::array())) {
                t.revealed_concepts.push_back(c.get<std::string>());
                revealed.insert(t.revealed_concepts.back());
            }
        lesson.turns.push_back(std::move(t));
        if (teacher && covered()) {
            lesson.termination = Termination::coverage_met;
            return lesson;
        }
    }
    lesson.termination = Termination::max_turns;
    return lesson;
}

const MindNode* MindMap::find(std::string_view id) const { return find_node(root, id); }

std::size_t MindMap::node_count() const {
    std::size_t n = 0;
    collect_nodes(root, n);
    return n;
}

MindMap generate_mind_map(const personalize::PersonalizedDocument& pdoc, const gateway::Gateway& gateway,
                          const Config& cfg) {
    const auto material = pdoc.rendered();
    std::vector<std::string> top;
    for (const auto& s : material.sections)
        if (s.depth == 1) top.push_back(s.id);
    const std::string flat = doc::flatten_text(material);

    auto req = prompts::make_request(gateway::TaskTag::mindmap, cfg.seed, "mindmap");
    req.add(std::string(prompts::kOutline), prompts::outline(material).dump());
    req.params["title"] = material.title.empty() ? "Overview" : material.title;
    auto response = gateway.generate(std::move(req), [&](const Json& p) {
        std::vector<std::string> out;
        const Json children = p["root"].value("children", Json::array());
        if (children.size() != top.size()) {
            out.push_back("root must have one child per top-level section (" + std::to_string(top.size()) + ")");
        } else {
            for (std::size_t i = 0; i < top.size(); ++i)
                if (children[i].value("section_ref", std::string{}) != top[i])
                    out.push_back("root.children[" + std::to_string(i) + "] must reference section " + top[i]);
        }
        annotation_violations(p["root"], flat, "root", out);
        return out;
    });
    return MindMap{build_node(response.payload["root"], "root", true)};
}

MindMap toggle_node(MindMap map, std::string_view node_id) {
    auto* node = find_node(map.root, node_id);
    if (node == nullptr) throw ValidationError("UnknownNode", "no mind-map node " + std::string(node_id));
    node->expanded = !node->expanded;
    return map;
}

Json to_json(const SlideDeck& deck) {
    Json slides = Json::array();
    for (const auto& s : deck.slides) {
        Json j = {{"title", s.title}, {"bullets", s.bullets}, {"section_refs", s.section_refs}};
        put_optional(j, "visual_brief", s.visual_brief);
        put_optional(j, "opener_question", s.opener_question);
        put_optional(j, "activity", s.activity);
        slides.push_back(std::move(j));
    }
    return {{"slides", slides}, {"omissions", deck.omissions}};
}

SlideDeck slide_deck_from_json(const Json& j) {
    try {
        SlideDeck deck;
        for (const auto& s : j.at("slides")) deck.slides.push_back(slide_from_json(s));
        deck.omissions = j.value("omissions", std::vector<std::string>{});
        return deck;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidSlideDeck", e.what());
    }
}

Json to_json(const NarrationTrack& track) {
    Json segs = Json::array();
    for (const auto& s : track.segments)
        segs.push_back({{"slide_index", s.slide_index}, {"text", s.text}, {"estimated_seconds", s.estimated_seconds}});
    return {{"segments", segs}};
}

Json to_json(const ConceptGraph& graph) {
    Json nodes = Json::array();
    Json edges = Json::array();
    for (const auto& n : graph.nodes) nodes.push_back({{"id", n.id}, {"label", n.label}, {"summary", n.summary}});
    for (const auto& e : graph.edges) edges.push_back({{"from", e.from}, {"to", e.to}, {"relation_label", e.relation_label}});
    return {{"nodes", nodes}, {"edges", edges}};
}

Json to_json(const DialogueLesson& lesson) {
    Json turns = Json::array();
    for (const auto& t : lesson.turns)
        turns.push_back({{"speaker", to_string(t.speaker)}, {"text", t.text}, {"revealed_concepts", t.revealed_concepts}});
    return {{"turns", turns},
            {"concept_graph", to_json(lesson.concept_graph)},
            {"termination_reason", to_string(lesson.termination)}};
}

NarrationTrack narration_from_json(const Json& j) {
    try {
        NarrationTrack track;
        for (const auto& s : j.at("segments"))
            track.segments.push_back({s.at("slide_index").get<std::size_t>(), s.at("text").get<std::string>(),
                                      s.at("estimated_seconds").get<double>()});
        return track;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidNarration", e.what());
    }
}

DialogueLesson lesson_from_json(const Json& j) {
    try {
        DialogueLesson lesson;
        for (const auto& t : j.at("turns"))
            lesson.turns.push_back({t.at("speaker") == "teacher" ? Speaker::teacher : Speaker::student,
                                    t.at("text").get<std::string>(),
                                    t.at("revealed_concepts").get<std::vector<std::string>>()});
        const auto& g = j.at("concept_graph");
        for (const auto& n : g.at("nodes")) lesson.concept_graph.nodes.push_back({n.at("id"), n.at("label"), n.at("summary")});
        for (const auto& e : g.at("edges"))
            lesson.concept_graph.edges.push_back({e.at("from"), e.at("to"), e.at("relation_label")});
        lesson.termination = j.at("termination_reason") == "coverage_met" ? Termination::coverage_met : Termination::max_turns;
        return lesson;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidLesson", e.what());
    }
}

Json to_json(const MindMap& map) { return {{"root", node_json(map.root)}}; }

MindMap mind_map_from_json(const Json& j) {
    try {
        return MindMap{node_from_json(j.at("root"))};
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidMindMap", e.what());
    }
}

}  // namespace folio::views
