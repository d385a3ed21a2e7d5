// Fallback payloads for the mock provider. Every reply is a pure function of
// the request (context, params, seed), so identical requests give identical
// bytes regardless of call order or concurrency.

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "folio/gateway.hpp"
#include "folio/personalization.hpp"
#include "folio/prompts.hpp"

namespace folio::gateway {
namespace {

namespace p = prompts;

std::uint64_t mix(const GenerationRequest& req, std::string_view salt) { return derive_seed(req.seed, salt); }

std::string part_text(const GenerationRequest& req, std::string_view label) {
    const auto* part = req.part(label);
    return part ? part->text : std::string{};
}

Json part_json(const GenerationRequest& req, std::string_view label, Json fallback = Json::array()) {
    const auto* part = req.part(label);
    if (!part) return fallback;
    try {
        return Json::parse(part->text);
    } catch (const Json::parse_error&) {
        return fallback;
    }
}

std::size_t first_sentence_end(std::string_view s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || std::isspace(static_cast<unsigned char>(s[i + 1]))))
            return i + 1;
    }
    return s.size();
}

std::string truncate_words(const std::string& s, std::size_t max_chars) {
    if (s.size() <= max_chars) return s;
    std::size_t cut = s.rfind(' ', max_chars);
    if (cut == std::string::npos || cut == 0) cut = max_chars;
    return s.substr(0, cut) + "...";
}

// Longest content word, ties broken by first occurrence order.
std::string key_word(std::string_view s) {
    std::string best;
    for (const auto& tok : text::word_tokens(s)) {
        // Longest alphabetic run, so "chimpanzee's" yields "chimpanzee".
        std::string letters;
        std::string run;
        for (char c : tok + ' ') {
            if (std::isalpha(static_cast<unsigned char>(c))) {
                run.push_back(c);
                continue;
            }
            if (run.size() > letters.size()) letters = run;
            run.clear();
        }
        if (letters.size() > best.size() && !text::content_words(letters).empty()) best = letters;
    }
    return best;
}

std::string heading_or(const Json& section, const std::string& fallback) {
    std::string h = section.value("heading", std::string{});
    return h.empty() ? fallback : h;
}

// Splits sentences at clause joints to shorten them.
std::string split_clauses(const std::string& body) {
    static constexpr std::array<std::string_view, 5> kJoints = {", and ", ", but ", ", so ", "; ", ", because "};
    std::string out;
    for (const auto& sentence : text::sentences(body)) {
        std::string s = sentence;
        for (auto joint : kJoints) {
            auto at = s.find(joint);
            if (at == std::string::npos || text::word_tokens(s.substr(0, at)).size() < 4) continue;
            std::string rest = s.substr(at + joint.size());
            if (joint == ", because ") rest = "This is because " + rest;
            else if (joint != "; ") rest = std::string(joint.substr(2, joint.size() - 3)) + " " + rest;
            s = s.substr(0, at) + ". " + text::capitalize(rest);
            break;
        }
        if (!out.empty()) out.push_back(' ');
        out += s;
    }
    return out;
}

// Joins neighbouring sentences to lengthen them.
std::string join_sentences(const std::string& body) {
    auto sents = text::sentences(body);
    std::string out;
    for (std::size_t i = 0; i < sents.size(); ++i) {
        std::string s = sents[i];
        if (i + 1 < sents.size() && s.size() > 1 && s.back() == '.') {
            std::string next = sents[i + 1];
            if (next.size() > 1 && std::isupper(static_cast<unsigned char>(next[0])) &&
                std::islower(static_cast<unsigned char>(next[1])))
                next[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(next[0])));
            s = s.substr(0, s.size() - 1) + ", and " + next;
            ++i;
            // Keep the following sentence as is.
            if (i + 1 < sents.size()) s += " " + sents[++i];
        }
        if (!out.empty()) out.push_back(' ');
        out += s;
    }
    return out;
}

bool is_prose(const std::string& body) {
    return body.find("\n- ") == std::string::npos && !body.starts_with("- ") && !body.starts_with("Figure");
}

Json relevel(const GenerationRequest& req) {
    const double target = std::stod(req.param("target_grade", "7"));
    // Later attempts apply the edit to more sentences.
    const int rounds = std::max(1, std::atoi(req.param("relevel_attempt", "1").c_str()));
    std::string all;
    for (const auto& part : req.context)
        if (std::string_view(part.label).starts_with(p::kBlockPrefix)) all += part.text + "\n\n";
    double fkg = target;
    try {
        fkg = personalize::readability(all).fkg;
    } catch (const std::exception&) {
    }
    Json blocks = Json::array();
    for (const auto& part : req.context) {
        if (!std::string_view(part.label).starts_with(p::kBlockPrefix)) continue;
        std::string body = part.text;
        if (is_prose(body)) {
            for (int r = 0; r < rounds; ++r) {
                if (fkg > target + 1.0) body = split_clauses(body);
                else if (fkg < target - 1.0) body = join_sentences(body);
            }
        }
        blocks.push_back({{"block_id", part.label.substr(p::kBlockPrefix.size())}, {"text", body}});
    }
    return {{"blocks", blocks}};
}

Json select_segments(const GenerationRequest& req) {
    std::size_t budget = std::stoull(req.param("max_chars", "0"));
    std::size_t max_segments = std::stoull(req.param("max_segments", "3"));
    std::size_t used = 0;
    Json segments = Json::array();
    for (const auto& part : req.context) {
        if (segments.size() >= max_segments) break;
        if (!std::string_view(part.label).starts_with(p::kBlockPrefix)) continue;
        std::string id = part.label.substr(p::kBlockPrefix.size());
        if (mix(req, id) % 3 == 0) continue;
        std::size_t end = first_sentence_end(part.text);
        if (end == 0 || used + end > budget) continue;
        used += end;
        segments.push_back({{"block_id", id}, {"start", 0}, {"end", end}});
    }
    return {{"segments", segments}};
}

Json rewrite_segment(const GenerationRequest& req) {
    std::string interest = part_text(req, p::kInterest);
    std::string segment = text::trim(part_text(req, p::kSegment));
    static constexpr std::array<std::string_view, 3> kLeads = {
        "Picture this through {}: ", "Think about {} for a moment: ", "Fans of {} will recognize this: "};
    std::string lead(kLeads[mix(req, "lead") % kLeads.size()]);
    lead.replace(lead.find("{}"), 2, interest.empty() ? "everyday life" : interest);
    return {{"text", lead + segment}};
}

Json slides(const GenerationRequest& req) {
    std::size_t max_bullets = std::stoull(req.param("max_bullets", "5"));
    std::string interest = part_text(req, p::kInterest);
    Json deck = Json::array();
    bool first = true;
    for (const auto& section : part_json(req, p::kOutline)) {
        std::string title = heading_or(section, "Introduction");
        Json bullets = Json::array();
        for (const auto& s : text::sentences(section.value("text", std::string{}))) {
            if (bullets.size() >= max_bullets) break;
            bullets.push_back(truncate_words(s, 140));
        }
        if (bullets.empty()) bullets.push_back("Overview of " + title);
        Json slide = {{"title", title},
                      {"bullets", bullets},
                      {"section_refs", Json::array({section.value("id", std::string{})})},
                      {"visual_brief", "A simple diagram of " + title + " with a " + interest + " theme"}};
        if (first) {
            slide["opener_question"] = "What do you already know about " + title + "?";
            slide["activity"] = "List one way " + title + " shows up in " + interest + ".";
            first = false;
        }
        deck.push_back(std::move(slide));
    }
    return {{"slides", deck}, {"omissions", Json::array()}};
}

Json narration(const GenerationRequest& req) {
    Json slide = part_json(req, p::kSlide, Json::object());
    std::string out = "In this part of the lesson we look at " + slide.value("title", std::string("the topic")) + ".";
    for (const auto& b : slide.value("bullets", Json::array())) out += " " + b.get<std::string>();
    out += " Take a moment to connect this with what you already know.";
    return {{"text", out}};
}

Json concept_graph(const GenerationRequest& req) {
    Json nodes = Json::array();
    Json edges = Json::array();
    std::set<std::string> used;
    for (const auto& section : part_json(req, p::kOutline)) {
        std::string label = key_word(section.value("heading", std::string{}));
        if (label.empty() || used.contains(text::to_lower(label))) label = key_word(section.value("text", std::string{}));
        if (label.empty() || used.contains(text::to_lower(label))) continue;
        used.insert(text::to_lower(label));
        std::string id = "c" + std::to_string(nodes.size() + 1);
        nodes.push_back({{"id", id},
                         {"label", text::capitalize(label)},
                         {"summary", "Key idea number " + std::to_string(nodes.size() + 1) + " of this lesson."}});
        if (nodes.size() > 1)
            edges.push_back({{"from", "c" + std::to_string(nodes.size() - 1)}, {"to", id}, {"relation", "leads to"}});
    }
    if (nodes.empty()) nodes.push_back({{"id", "c1"}, {"label", "Topic"}, {"summary", "The main idea."}});
    return {{"nodes", nodes}, {"edges", edges}};
}

Json teacher_turn(const GenerationRequest& req) {
    std::size_t per_turn = std::stoull(req.param("reveal_per_turn", "2"));
    Json reveal = Json::array();
    std::vector<std::string> labels;
    std::string summary;
    for (const auto& c : part_json(req, p::kConcepts)) {
        if (c.value("revealed", false) || reveal.size() >= per_turn) continue;
        reveal.push_back(c.value("id", std::string{}));
        labels.push_back(c.value("label", std::string{}));
        if (summary.empty()) summary = c.value("summary", std::string{});
    }
    std::string said;
    if (labels.empty()) {
        said = "Let us pull together everything we covered so far. What stood out to you?";
    } else {
        said = "Now let us look at " + labels[0];
        for (std::size_t i = 1; i < labels.size(); ++i) said += (i + 1 == labels.size() ? " and " : ", ") + labels[i];
        said += ". " + summary + " What do you think happens next?";
    }
    return {{"text", said}, {"revealed_concepts", reveal}};
}

Json student_turn(const GenerationRequest& req) {
    std::string history = part_text(req, p::kHistory);
    std::size_t last = history.rfind("Teacher:");
    std::string topic = last == std::string::npos ? "" : key_word(std::string_view(history).substr(last + 8));
    if (topic.empty()) topic = "this";
    static constexpr std::array<std::string_view, 3> kReplies = {
        "Hmm, so {} matters here? Could you give me an example?",
        "I think {} is the main point here, but I am not sure why.",
        "Wait, how does {} connect to what we said before?"};
    std::string reply(kReplies[mix(req, history) % kReplies.size()]);
    reply.replace(reply.find("{}"), 2, topic);
    return {{"text", reply}, {"revealed_concepts", Json::array()}};
}

// Builds nested mind-map nodes from sections starting at `index` with the given depth.
Json mind_children(const Json& outline, std::size_t& index, int depth, const GenerationRequest& req) {
    Json children = Json::array();
    while (index < outline.size()) {
        const auto& s = outline[index];
        int d = s.value("depth", 1);
        if (d < depth) break;
        if (d > depth) {
            ++index;
            continue;
        }
        ++index;
        Json node = {{"label", heading_or(s, "Overview")}, {"section_ref", s.value("id", std::string{})}};
        Json nested = mind_children(outline, index, depth + 1, req);
        if (!nested.empty()) {
            node["children"] = nested;
        } else {
            std::string id = s.value("id", std::string{});
            if (mix(req, id) % 3 == 0) {
                node["annotation"] = {{"image_ref", content_id("img", id + heading_or(s, ""))}};
            } else {
                std::string body = s.value("text", std::string{});
                std::string first = text::trim(body.substr(0, first_sentence_end(body)));
                node["annotation"] = {{"text", truncate_words(first.empty() ? heading_or(s, "Overview") : first, 160)}};
            }
        }
        children.push_back(std::move(node));
    }
    return children;
}

Json mindmap(const GenerationRequest& req) {
    Json outline = part_json(req, p::kOutline);
    std::size_t index = 0;
    Json root = {{"label", req.param("title", "Overview")}};
    Json children = mind_children(outline, index, 1, req);
    if (!children.empty()) root["children"] = children;
    return {{"root", root}};
}

Json timeline(const GenerationRequest& req) {
    static const std::set<std::string> kMarkers = {"first", "then", "next", "after", "finally", "later", "second", "third", "last"};
    Json candidates = Json::array();
    for (const auto& section : part_json(req, p::kOutline)) {
        std::string body = section.value("text", std::string{});
        auto sents = text::sentences(body);
        // Sequence words count only when they open a sentence.
        int markers = 0;
        for (const auto& s : sents) {
            auto toks = text::word_tokens(text::to_lower(s));
            if (toks.empty()) continue;
            std::string letters;
            for (char c : toks[0])
                if (std::isalpha(static_cast<unsigned char>(c))) letters.push_back(c);
            if (kMarkers.contains(letters)) ++markers;
        }
        if (markers < 2 || sents.size() < 3) continue;
        Json items = Json::array();
        std::set<std::string> used;
        for (const auto& s : sents) {
            if (items.size() >= 5) break;
            std::string label = key_word(s);
            if (label.empty() || !used.insert(text::to_lower(label)).second) continue;
            items.push_back({{"label", text::capitalize(label)}, {"description", truncate_words(s, 160)}});
        }
        candidates.push_back({{"section_id", section.value("id", std::string{})}, {"items", items}});
    }
    return {{"candidates", candidates}};
}

std::string bank_word(char letter, std::uint64_t h) {
    static constexpr std::array<std::array<std::string_view, 3>, 26> kBank = {{
        {"Always", "Ants", "Amazing"},     {"Bring", "Big", "Bears"},       {"Clever", "Cats", "Carry"},
        {"Dogs", "Dance", "Daily"},        {"Every", "Eagles", "Eat"},       {"Friendly", "Fish", "Find"},
        {"Giant", "Goats", "Grow"},        {"Happy", "Horses", "Help"},      {"Ivy", "Interesting", "Inside"},
        {"Jolly", "Jump", "Jars"},         {"Kind", "Kings", "Keep"},        {"Lions", "Laugh", "Lovely"},
        {"My", "Many", "Monkeys"},         {"Nine", "Never", "Nests"},       {"Owls", "Often", "Orange"},
        {"Purple", "Penguins", "Play"},    {"Quiet", "Queens", "Quickly"},   {"Red", "Rabbits", "Run"},
        {"Seven", "Small", "Sing"},        {"Tiny", "Turtles", "Travel"},    {"Under", "Unicorns", "Usually"},
        {"Very", "Violets", "Visit"},      {"Wise", "Whales", "Walk"},       {"Xylophones", "Xeric", "Xenial"},
        {"Yellow", "Yaks", "Yell"},        {"Zebras", "Zoom", "Zany"},
    }};
    char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(letter)));
    if (lower < 'a' || lower > 'z') return std::string(1, letter);
    return std::string(kBank[static_cast<std::size_t>(lower - 'a')][h % 3]);
}

Json mnemonic(const GenerationRequest& req) {
    std::vector<std::string> items;
    std::string listed = part_text(req, p::kItems);
    if (!listed.empty()) {
        std::size_t start = 0;
        while (start <= listed.size()) {
            std::size_t end = listed.find('\n', start);
            if (end == std::string::npos) end = listed.size();
            std::string item = text::trim(std::string_view(listed).substr(start, end - start));
            if (!item.empty()) items.push_back(item);
            start = end + 1;
        }
    } else {
        std::set<std::string> seen;
        for (const auto& tok : text::word_tokens(part_text(req, p::kSection))) {
            std::string letters;
            for (char c : tok)
                if (std::isalpha(static_cast<unsigned char>(c))) letters.push_back(c);
            if (letters.size() < 6 || text::content_words(letters).empty()) continue;
            if (!seen.insert(text::to_lower(letters)).second) continue;
            items.push_back(text::capitalize(letters));
            if (items.size() == 4) break;
        }
        if (items.size() < 2) items = {"Read", "Review", "Recall"};
    }
    std::string sentence;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!sentence.empty()) sentence.push_back(' ');
        sentence += bank_word(items[i][0], mix(req, items[i] + std::to_string(i)));
    }
    sentence += ".";
    Json out = {{"sentence", sentence}};
    if (listed.empty()) out["items"] = items;
    return out;
}

Json illustrations(const GenerationRequest& req) {
    std::string interest = part_text(req, p::kInterest);
    Json specs = Json::array();
    bool first = true;
    for (const auto& section : part_json(req, p::kOutline)) {
        for (const auto& block : section.value("blocks", Json::array())) {
            std::string body = block.value("text", std::string{});
            if (block.value("kind", std::string{}) != "paragraph" || body.size() < 80) continue;
            std::string id = block.value("id", std::string{});
            if (first || mix(req, id) % 2 == 0) {
                std::string gist = text::trim(body.substr(0, first_sentence_end(body)));
                specs.push_back({{"block_id", id},
                                 {"brief", "A simple " + (interest.empty() ? std::string("classroom") : interest) +
                                               "-themed drawing showing: " + truncate_words(gist, 140)},
                                 {"caption", heading_or(section, "Illustration")}});
                first = false;
            }
            break;
        }
    }
    return {{"illustrations", specs}};
}

Json question_from(const std::string& sentence, std::uint64_t h, std::size_t position) {
    std::string keyword = key_word(sentence);
    if (keyword.empty()) keyword = "topic";
    std::string Key = text::capitalize(keyword);
    static constexpr std::array<std::string_view, 3> kDifficulty = {"easy", "medium", "hard"};
    std::vector<std::string> options = {
        "The text says " + keyword + " has no effect on anything.",
        Key + " is only mentioned as a historical mistake.",
        "None of the ideas in this part relate to " + keyword + ".",
    };
    std::size_t correct = h % 4;
    options.insert(options.begin() + static_cast<std::ptrdiff_t>(correct), truncate_words(sentence, 160));
    return {{"stem", "According to the text, which statement about " + keyword + " is accurate?"},
            {"options", options},
            {"correct_index", correct},
            {"difficulty", kDifficulty[position % 3]},
            {"topic_tag", text::to_lower(keyword)},
            {"feedback", "Look again at the sentence about " + keyword + "."}};
}

Json embedded_question(const GenerationRequest& req) {
    auto sents = text::sentences(part_text(req, p::kAnchor));
    if (sents.empty()) sents.push_back(part_text(req, p::kAnchor));
    std::uint64_t h = mix(req, "embedded");
    return question_from(sents[h % sents.size()], h, static_cast<std::size_t>(h / 7));
}

Json quiz(const GenerationRequest& req) {
    std::string section = part_text(req, p::kSection);
    std::size_t blank = section.find("\n\n");
    auto sents = text::sentences(blank == std::string::npos ? section : section.substr(blank + 2));
    if (sents.empty()) sents.push_back(section);
    std::size_t count = std::clamp<std::size_t>(sents.size(), 5, 8);
    Json questions = Json::array();
    for (std::size_t i = 0; i < count; ++i)
        questions.push_back(question_from(sents[i % sents.size()], mix(req, "q" + std::to_string(i)), i));
    return {{"questions", questions}};
}

Json quiz_feedback(const GenerationRequest& req) {
    Json result = part_json(req, p::kResult, Json::object());
    auto list = [](const Json& arr) {
        std::string out;
        for (const auto& a : arr) out += (out.empty() ? "" : ", ") + a.get<std::string>();
        return out;
    };
    int percent = static_cast<int>(result.value("score", 0.0) * 100.0 + 0.5);
    std::string glows = list(result.value("glows", Json::array()));
    std::string grows = list(result.value("grows", Json::array()));
    std::string out = "You scored " + std::to_string(percent) + "%.";
    if (!glows.empty()) out += " You showed strength in " + glows + ".";
    if (!grows.empty()) out += " Review " + grows + " next.";
    return {{"text", out}};
}

}  // namespace

Json synthesize_payload(const GenerationRequest& req) {
    switch (req.task) {
        case TaskTag::relevel: return relevel(req);
        case TaskTag::select_segments: return select_segments(req);
        case TaskTag::rewrite_segment: return rewrite_segment(req);
        case TaskTag::slides: return slides(req);
        case TaskTag::narration: return narration(req);
        case TaskTag::concept_graph: return concept_graph(req);
        case TaskTag::dialogue_turn:
            return req.persona == Persona::student ? student_turn(req) : teacher_turn(req);
        case TaskTag::mindmap: return mindmap(req);
        case TaskTag::timeline: return timeline(req);
        case TaskTag::mnemonic: return mnemonic(req);
        case TaskTag::illustration_brief: return illustrations(req);
        case TaskTag::embedded_question: return embedded_question(req);
        case TaskTag::quiz: return quiz(req);
        case TaskTag::quiz_feedback: return quiz_feedback(req);
    }
    return Json::object();
}

}  // namespace folio::gateway
