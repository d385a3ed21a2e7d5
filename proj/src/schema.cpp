#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "folio/gateway.hpp"
#include "folio/schema.hpp"

namespace folio::gateway {
namespace {

using Violations = std::vector<std::string>;

bool nonempty_string(const Json& j) {
    return j.is_string() && !text::trim(j.get<std::string>()).empty();
}

// Checks `field` on object `obj`; appends a violation naming `where`.
bool require_string(const Json& obj, const char* field, const std::string& where, Violations& out,
                    bool allow_empty = false) {
    if (!obj.contains(field) || !obj[field].is_string() || (!allow_empty && !nonempty_string(obj[field]))) {
        out.push_back(where + "." + field + " must be a non-empty string");
        return false;
    }
    return true;
}

bool optional_string(const Json& obj, const char* field, const std::string& where, Violations& out) {
    if (obj.contains(field) && !obj[field].is_null() && !obj[field].is_string()) {
        out.push_back(where + "." + field + " must be a string when present");
        return false;
    }
    return true;
}

bool require_array(const Json& obj, const char* field, const std::string& where, Violations& out) {
    if (!obj.is_object() || !obj.contains(field) || !obj[field].is_array()) {
        out.push_back(where + "." + field + " must be an array");
        return false;
    }
    return true;
}

bool require_object(const Json& j, const std::string& where, Violations& out) {
    if (!j.is_object()) {
        out.push_back(where + " must be an object");
        return false;
    }
    return true;
}

void single_text(const Json& p, Violations& out) {
    if (require_object(p, "payload", out)) require_string(p, "text", "payload", out);
}

void relevel(const Json& p, Violations& out) {
    if (!require_array(p, "blocks", "payload", out)) return;
    if (p["blocks"].empty()) out.push_back("payload.blocks must not be empty");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < p["blocks"].size(); ++i) {
        const auto& b = p["blocks"][i];
        std::string where = "blocks[" + std::to_string(i) + "]";
        if (!require_object(b, where, out)) continue;
        if (require_string(b, "block_id", where, out) && !seen.insert(b["block_id"].get<std::string>()).second)
            out.push_back(where + " repeats block_id " + b["block_id"].get<std::string>());
        require_string(b, "text", where, out);
    }
}

void select_segments(const Json& p, Violations& out) {
    if (!require_array(p, "segments", "payload", out)) return;
    for (std::size_t i = 0; i < p["segments"].size(); ++i) {
        const auto& s = p["segments"][i];
        std::string where = "segments[" + std::to_string(i) + "]";
        if (!require_object(s, where, out)) continue;
        require_string(s, "block_id", where, out);
        if (!s.contains("start") || !s["start"].is_number_integer() || !s.contains("end") ||
            !s["end"].is_number_integer()) {
            out.push_back(where + " needs integer start and end");
            continue;
        }
        if (s["start"].get<long long>() < 0 || s["end"].get<long long>() <= s["start"].get<long long>())
            out.push_back(where + " must satisfy 0 <= start < end");
    }
}

void slides(const Json& p, Violations& out) {
    if (!require_array(p, "slides", "payload", out)) return;
    if (p["slides"].empty()) out.push_back("payload.slides must contain at least one slide");
    for (std::size_t i = 0; i < p["slides"].size(); ++i) {
        const auto& s = p["slides"][i];
        std::string where = "slides[" + std::to_string(i) + "]";
        if (!require_object(s, where, out)) continue;
        require_string(s, "title", where, out);
        if (require_array(s, "bullets", where, out)) {
            if (s["bullets"].empty()) out.push_back(where + ".bullets must not be empty");
            for (const auto& b : s["bullets"])
                if (!nonempty_string(b)) out.push_back(where + ".bullets entries must be non-empty strings");
        }
        if (require_array(s, "section_refs", where, out) && s["section_refs"].empty())
            out.push_back(where + ".section_refs must reference at least one section");
        for (const char* f : {"visual_brief", "opener_question", "activity"}) optional_string(s, f, where, out);
    }
    if (p.contains("omissions") && !p["omissions"].is_array()) out.push_back("payload.omissions must be an array");
}

void concept_graph(const Json& p, Violations& out) {
    if (!require_array(p, "nodes", "payload", out) || !require_array(p, "edges", "payload", out)) return;
    const auto& nodes = p["nodes"];
    if (nodes.empty()) out.push_back("payload.nodes must not be empty");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        std::string where = "nodes[" + std::to_string(i) + "]";
        if (!require_object(nodes[i], where, out)) continue;
        require_string(nodes[i], "label", where, out);
        require_string(nodes[i], "summary", where, out, true);
        if (require_string(nodes[i], "id", where, out) &&
            !index.emplace(nodes[i]["id"].get<std::string>(), i).second)
            out.push_back(where + " duplicates id " + nodes[i]["id"].get<std::string>());
    }
    if (!out.empty()) return;
    // Union-find over undirected edges for connectivity.
    std::vector<std::size_t> parent(nodes.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> root = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = root(parent[x]);
    };
    for (std::size_t i = 0; i < p["edges"].size(); ++i) {
        const auto& e = p["edges"][i];
        std::string where = "edges[" + std::to_string(i) + "]";
        if (!require_object(e, where, out)) continue;
        if (!require_string(e, "from", where, out) || !require_string(e, "to", where, out)) continue;
        require_string(e, "relation", where, out);
        auto a = index.find(e["from"].get<std::string>());
        auto b = index.find(e["to"].get<std::string>());
        if (a == index.end() || b == index.end()) {
            out.push_back(where + " references an unknown node");
            continue;
        }
        parent[root(a->second)] = root(b->second);
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (root(i) != root(0)) {
            out.push_back("concept graph is not connected");
            break;
        }
    }
}

void dialogue_turn(const Json& p, Violations& out) {
    single_text(p, out);
    if (p.is_object() && p.contains("revealed_concepts")) {
        if (!p["revealed_concepts"].is_array()) {
            out.push_back("payload.revealed_concepts must be an array");
            return;
        }
        for (const auto& c : p["revealed_concepts"])
            if (!nonempty_string(c)) out.push_back("payload.revealed_concepts entries must be strings");
    }
}

void mind_node(const Json& node, const std::string& where, Violations& out, int depth) {
    if (depth > 32) {
        out.push_back(where + " nests too deeply");
        return;
    }
    if (!require_object(node, where, out)) return;
    require_string(node, "label", where, out);
    optional_string(node, "section_ref", where, out);
    bool has_children = node.contains("children") && node["children"].is_array() && !node["children"].empty();
    if (node.contains("children") && !node["children"].is_array()) out.push_back(where + ".children must be an array");
    if (node.contains("annotation") && !node["annotation"].is_null()) {
        const auto& a = node["annotation"];
        if (has_children) out.push_back(where + " is not a leaf but carries an annotation");
        if (!a.is_object() || (a.contains("text") == a.contains("image_ref")))
            out.push_back(where + ".annotation must have exactly one of text or image_ref");
        else if (!nonempty_string(a.contains("text") ? a["text"] : a["image_ref"]))
            out.push_back(where + ".annotation value must be a non-empty string");
    }
    if (has_children) {
        for (std::size_t i = 0; i < node["children"].size(); ++i)
            mind_node(node["children"][i], where + ".children[" + std::to_string(i) + "]", out, depth + 1);
    }
}

void mindmap(const Json& p, Violations& out) {
    if (!require_object(p, "payload", out)) return;
    if (!p.contains("root")) {
        out.push_back("payload.root is required");
        return;
    }
    mind_node(p["root"], "root", out, 0);
}

void timeline(const Json& p, Violations& out) {
    if (!require_array(p, "candidates", "payload", out)) return;
    for (std::size_t i = 0; i < p["candidates"].size(); ++i) {
        const auto& c = p["candidates"][i];
        std::string where = "candidates[" + std::to_string(i) + "]";
        if (!require_object(c, where, out)) continue;
        require_string(c, "section_id", where, out);
        if (!require_array(c, "items", where, out)) continue;
        for (std::size_t k = 0; k < c["items"].size(); ++k) {
            std::string iw = where + ".items[" + std::to_string(k) + "]";
            if (!require_object(c["items"][k], iw, out)) continue;
            require_string(c["items"][k], "label", iw, out);
            require_string(c["items"][k], "description", iw, out, true);
        }
    }
}

void mnemonic(const Json& p, Violations& out) {
    if (!require_object(p, "payload", out)) return;
    require_string(p, "sentence", "payload", out);
    if (p.contains("items")) {
        if (!p["items"].is_array() || p["items"].size() < 2 || p["items"].size() > 10) {
            out.push_back("payload.items must list 2 to 10 terms");
            return;
        }
        for (const auto& i : p["items"])
            if (!nonempty_string(i)) out.push_back("payload.items entries must be non-empty strings");
    }
}

void illustrations(const Json& p, Violations& out) {
    if (!require_array(p, "illustrations", "payload", out)) return;
    for (std::size_t i = 0; i < p["illustrations"].size(); ++i) {
        const auto& s = p["illustrations"][i];
        std::string where = "illustrations[" + std::to_string(i) + "]";
        if (!require_object(s, where, out)) continue;
        require_string(s, "block_id", where, out);
        require_string(s, "brief", where, out);
        require_string(s, "caption", where, out, true);
    }
}

void quiz(const Json& p, Violations& out) {
    if (!require_array(p, "questions", "payload", out)) return;
    const auto& qs = p["questions"];
    if (qs.size() < 5 || qs.size() > 10)
        out.push_back("quiz must have 5 to 10 questions, got " + std::to_string(qs.size()));
    std::set<std::string> difficulties;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        validate_question(qs[i], "questions[" + std::to_string(i) + "]", out);
        if (qs[i].is_object() && qs[i].contains("difficulty") && qs[i]["difficulty"].is_string())
            difficulties.insert(qs[i]["difficulty"].get<std::string>());
    }
    if (difficulties.size() < 2) out.push_back("quiz must mix at least two difficulty levels");
}

}  // namespace

void validate_question(const Json& q, const std::string& where, std::vector<std::string>& out) {
    if (!require_object(q, where, out)) return;
    require_string(q, "stem", where, out);
    require_string(q, "topic_tag", where, out);
    optional_string(q, "feedback", where, out);
    if (!q.contains("difficulty") || !q["difficulty"].is_string() ||
        (q["difficulty"] != "easy" && q["difficulty"] != "medium" && q["difficulty"] != "hard"))
        out.push_back(where + ".difficulty must be easy, medium or hard");
    if (!require_array(q, "options", where, out)) return;
    const auto& opts = q["options"];
    if (opts.size() < 3 || opts.size() > 5) out.push_back(where + " must have 3 to 5 options");
    std::set<std::string> distinct;
    for (const auto& o : opts) {
        if (!nonempty_string(o)) {
            out.push_back(where + ".options entries must be non-empty strings");
            return;
        }
        if (!distinct.insert(text::to_lower(text::normalize_whitespace(o.get<std::string>()))).second)
            out.push_back(where + " has duplicate option '" + o.get<std::string>() + "'");
    }
    if (!q.contains("correct_index") || !q["correct_index"].is_number_integer()) {
        out.push_back(where + ".correct_index must be an integer");
        return;
    }
    auto idx = q["correct_index"].get<long long>();
    if (idx < 0 || idx >= static_cast<long long>(opts.size()))
        out.push_back(where + ".correct_index out of option bounds");
}

std::vector<std::string> validate_schema(TaskTag tag, const Json& payload) {
    Violations out;
    switch (tag) {
        case TaskTag::relevel: relevel(payload, out); break;
        case TaskTag::select_segments: select_segments(payload, out); break;
        case TaskTag::rewrite_segment:
        case TaskTag::narration:
        case TaskTag::quiz_feedback: single_text(payload, out); break;
        case TaskTag::slides: slides(payload, out); break;
        case TaskTag::concept_graph: concept_graph(payload, out); break;
        case TaskTag::dialogue_turn: dialogue_turn(payload, out); break;
        case TaskTag::mindmap: mindmap(payload, out); break;
        case TaskTag::timeline: timeline(payload, out); break;
        case TaskTag::mnemonic: mnemonic(payload, out); break;
        case TaskTag::illustration_brief: illustrations(payload, out); break;
        case TaskTag::embedded_question: validate_question(payload, "payload", out); break;
        case TaskTag::quiz: quiz(payload, out); break;
    }
    return out;
}

}  // namespace folio::gateway
