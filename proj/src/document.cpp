#include "folio/document.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <utility>

#include "folio/errors.hpp"

namespace folio::doc {
namespace {

struct RawLine {
    int number;
    std::string text;
};

std::vector<RawLine> split_lines(std::string_view raw) {
    std::vector<RawLine> lines;
    int number = 1;
    std::size_t start = 0;
    while (start <= raw.size()) {
        std::size_t end = raw.find('\n', start);
        if (end == std::string_view::npos) end = raw.size();
        std::string line(raw.substr(start, end - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back({number++, std::move(line)});
        if (end == raw.size()) break;
        start = end + 1;
    }
    return lines;
}

// Returns heading depth when the line is "#... text", otherwise 0.
int heading_depth(const std::string& line, std::string& heading) {
    std::size_t hashes = 0;
    while (hashes < line.size() && line[hashes] == '#') ++hashes;
    if (hashes == 0 || hashes == line.size() || line[hashes] != ' ') return 0;
    heading = text::normalize_whitespace(std::string_view(line).substr(hashes + 1));
    return static_cast<int>(hashes);
}

bool is_list_line(const std::string& line) {
    if (line.starts_with("- ") || line.starts_with("* ")) return true;
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    return i > 0 && i + 1 < line.size() && line[i] == '.' && line[i + 1] == ' ';
}

Block make_block(const std::vector<std::string>& lines) {
    Block block;
    auto joined_lines = [&] {
        std::string out;
        for (const auto& l : lines) {
            if (!out.empty()) out.push_back('\n');
            out += text::normalize_whitespace(l);
        }
        return out;
    };
    if (std::all_of(lines.begin(), lines.end(), is_list_line)) {
        block.kind = BlockKind::list;
        block.text = joined_lines();
    } else if (std::all_of(lines.begin(), lines.end(),
                           [](const std::string& l) { return l.starts_with("|"); })) {
        block.kind = BlockKind::table_text;
        block.text = joined_lines();
    } else {
        std::string joined;
        for (const auto& l : lines) joined += l + " ";
        block.text = text::normalize_whitespace(joined);
        block.kind = (block.text.starts_with("Figure ") || block.text.starts_with("Figure:") ||
                      block.text.starts_with("Fig. "))
                         ? BlockKind::figure_caption
                         : BlockKind::paragraph;
    }
    return block;
}

void assign_ids(SourceDocument& doc) {
    std::map<std::string, int> section_seen;
    for (auto& section : doc.sections) {
        std::string key = std::to_string(section.depth) + "\x1f" + section.heading;
        int occurrence = section_seen[key]++;
        section.id = content_id("sec", key + "\x1f" + std::to_string(occurrence));
        std::map<std::string, int> block_seen;
        for (auto& block : section.blocks) {
            std::string bkey = section.id + "\x1f" + std::string(to_string(block.kind)) + "\x1f" + block.text;
            int bocc = block_seen[bkey]++;
            block.id = content_id("blk", bkey + "\x1f" + std::to_string(bocc));
        }
    }
    doc.id = content_id("doc", render_marked(doc));
}

}  // namespace

std::string_view to_string(BlockKind kind) {
    switch (kind) {
        case BlockKind::paragraph: return "paragraph";
        case BlockKind::list: return "list";
        case BlockKind::figure_caption: return "figure_caption";
        case BlockKind::table_text: return "table_text";
    }
    return "paragraph";
}

BlockKind block_kind_from_string(std::string_view name) {
    if (name == "paragraph") return BlockKind::paragraph;
    if (name == "list") return BlockKind::list;
    if (name == "figure_caption") return BlockKind::figure_caption;
    if (name == "table_text") return BlockKind::table_text;
    throw ValidationError("InvalidDocument", "unknown block kind '" + std::string(name) + "'");
}

const Section* SourceDocument::find_section(std::string_view section_id) const {
    for (const auto& s : sections)
        if (s.id == section_id) return &s;
    return nullptr;
}

const Block* SourceDocument::find_block(std::string_view block_id) const {
    for (const auto& s : sections)
        for (const auto& b : s.blocks)
            if (b.id == block_id) return &b;
    return nullptr;
}

const Section* SourceDocument::section_of_block(std::string_view block_id) const {
    for (const auto& s : sections)
        for (const auto& b : s.blocks)
            if (b.id == block_id) return &s;
    return nullptr;
}

std::string SourceDocument::section_text(const Section& section) {
    std::string out;
    for (const auto& b : section.blocks) {
        if (!out.empty()) out += "\n\n";
        out += b.text;
    }
    return out;
}

std::size_t SourceDocument::total_chars() const {
    std::size_t total = 0;
    for (const auto& s : sections)
        for (const auto& b : s.blocks) total += b.char_length();
    return total;
}

SourceDocument ingest(std::string_view raw_text, std::optional<std::string> source_uri) {
    if (text::trim(raw_text).empty()) throw EmptyInput("input contains no text");

    SourceDocument doc;
    doc.source_uri = std::move(source_uri);
    std::vector<int> heading_lines;  // line number per section, 0 for implicit
    std::vector<std::string> pending;

    auto flush_block = [&] {
        if (pending.empty()) return;
        if (doc.sections.empty()) {
            doc.sections.push_back(Section{"", "", 1, {}});
            heading_lines.push_back(0);
        }
        doc.sections.back().blocks.push_back(make_block(pending));
        pending.clear();
    };

    for (const auto& line : split_lines(raw_text)) {
        std::string heading;
        int depth = heading_depth(line.text, heading);
        if (depth > 0) {
            flush_block();
            int previous = doc.sections.empty() ? 0 : doc.sections.back().depth;
            if (depth > previous + 1) {
                throw MalformedHeadingNesting(
                    line.number, "heading depth " + std::to_string(depth) + " follows depth " +
                                     std::to_string(previous));
            }
            doc.sections.push_back(Section{"", heading, depth, {}});
            heading_lines.push_back(line.number);
        } else if (text::trim(line.text).empty()) {
            flush_block();
        } else {
            pending.push_back(line.text);
        }
    }
    flush_block();

    // A section with no blocks must be a container for a deeper section.
    for (std::size_t i = 0; i < doc.sections.size(); ++i) {
        const auto& s = doc.sections[i];
        bool has_child = i + 1 < doc.sections.size() && doc.sections[i + 1].depth > s.depth;
        if (s.blocks.empty() && !has_child) {
            throw ValidationError("EmptySection", "line " + std::to_string(heading_lines[i]) +
                                                      ": heading '" + s.heading +
                                                      "' has no content");
        }
    }

    doc.title = "Untitled";
    for (const auto& s : doc.sections) {
        if (!s.heading.empty()) {
            doc.title = s.heading;
            break;
        }
    }
    assign_ids(doc);
    return doc;
}

std::string flatten_text(const SourceDocument& doc) {
    std::string out;
    auto append = [&](const std::string& part) {
        if (!out.empty()) out += "\n\n";
        out += part;
    };
    for (const auto& s : doc.sections) {
        if (!s.heading.empty()) append(s.heading);
        for (const auto& b : s.blocks) append(b.text);
    }
    return out;
}

std::string render_marked(const SourceDocument& doc) {
    std::string out;
    auto append = [&](const std::string& part) {
        if (!out.empty()) out += "\n\n";
        out += part;
    };
    for (const auto& s : doc.sections) {
        if (!s.heading.empty()) append(std::string(static_cast<std::size_t>(s.depth), '#') + " " + s.heading);
        for (const auto& b : s.blocks) append(b.text);
    }
    out += "\n";
    return out;
}

Json to_json(const SourceDocument& doc) {
    Json sections = Json::array();
    for (const auto& s : doc.sections) {
        Json blocks = Json::array();
        for (const auto& b : s.blocks) {
            blocks.push_back({{"id", b.id},
                              {"kind", to_string(b.kind)},
                              {"text", b.text},
                              {"char_length", b.char_length()}});
        }
        sections.push_back({{"id", s.id}, {"heading", s.heading}, {"depth", s.depth}, {"blocks", blocks}});
    }
    Json j = {{"id", doc.id}, {"title", doc.title}, {"sections", sections}};
    j["source_uri"] = doc.source_uri ? Json(*doc.source_uri) : Json(nullptr);
    return j;
}

SourceDocument document_from_json(const Json& j) {
    try {
        SourceDocument doc;
        doc.id = j.at("id").get<std::string>();
        doc.title = j.at("title").get<std::string>();
        if (j.contains("source_uri") && !j["source_uri"].is_null())
            doc.source_uri = j["source_uri"].get<std::string>();
        for (const auto& js : j.at("sections")) {
            Section s;
            s.id = js.at("id").get<std::string>();
            s.heading = js.at("heading").get<std::string>();
            s.depth = js.at("depth").get<int>();
            for (const auto& jb : js.at("blocks")) {
                Block b;
                b.id = jb.at("id").get<std::string>();
                b.kind = block_kind_from_string(jb.at("kind").get<std::string>());
                b.text = jb.at("text").get<std::string>();
                if (b.text.empty()) throw ValidationError("InvalidDocument", "empty block " + b.id);
                s.blocks.push_back(std::move(b));
            }
            doc.sections.push_back(std::move(s));
        }
        if (doc.sections.empty()) throw ValidationError("InvalidDocument", "document has no sections");
        return doc;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidDocument", e.what());
    }
}

// ---------------------------------------------------------------------------

GradeLevel::GradeLevel(int value) : value_(value) {
    if (value < 1 || value > kUndergraduate)
        throw ValidationError("InvalidGrade", "grade " + std::to_string(value) + " outside 1..12/undergraduate");
}

GradeLevel GradeLevel::parse(std::string_view text) {
    std::string t = text::to_lower(text::trim(text));
    if (t == "undergraduate" || t == "ug") return GradeLevel(kUndergraduate);
    try {
        std::size_t used = 0;
        int v = std::stoi(t, &used);
        if (used == t.size() && v <= 12) return GradeLevel(v);
    } catch (const std::exception&) {
    }
    throw ValidationError("InvalidGrade", "unsupported grade '" + std::string(text) + "'");
}

std::string GradeLevel::to_string() const {
    return value_ == kUndergraduate ? "undergraduate" : std::to_string(value_);
}

const std::vector<std::string>& default_interest_catalog() {
    static const std::vector<std::string> catalog = {
        "art", "basketball", "cooking", "food", "music", "soccer", "sports", "video games",
    };
    return catalog;
}

void validate_profile(const LearnerProfile& profile, const std::vector<std::string>& catalog) {
    if (std::find(catalog.begin(), catalog.end(), profile.interest) == catalog.end())
        throw ValidationError("UnknownInterest", "interest '" + profile.interest + "' is not in the catalog");
}

Json to_json(const LearnerProfile& profile) {
    return {{"grade", profile.grade.to_string()}, {"interest", profile.interest}};
}

LearnerProfile profile_from_json(const Json& j) {
    try {
        const auto& grade = j.at("grade");
        LearnerProfile p;
        p.grade = grade.is_number_integer() ? GradeLevel(grade.get<int>())
                                            : GradeLevel::parse(grade.get<std::string>());
        p.interest = j.at("interest").get<std::string>();
        return p;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidProfile", e.what());
    }
}

}  // namespace folio::doc
