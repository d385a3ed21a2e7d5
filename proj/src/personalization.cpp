#include "folio/personalization.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "folio/errors.hpp"
#include "folio/parallel.hpp"
#include "folio/prompts.hpp"

namespace folio::personalize {
namespace {

bool is_vowel(char c) {
    switch (c) {
        case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
        default: return false;
    }
}

std::string format_fixed(double value, int digits) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(digits);
    out << value;
    return out.str();
}

int workers(const gateway::Gateway& gw, const Config& cfg) { return cfg.parallel ? gw.config().max_parallel : 1; }

// Text of a section together with every nested section below it.
std::string subtree_text(const doc::SourceDocument& doc, std::size_t index) {
    std::string out = doc::SourceDocument::section_text(doc.sections[index]);
    for (std::size_t j = index + 1; j < doc.sections.size() && doc.sections[j].depth > doc.sections[index].depth; ++j)
        out += "\n\n" + doc::SourceDocument::section_text(doc.sections[j]);
    return out;
}

std::vector<std::string> relevel_violations(const doc::Section& section, const Json& payload) {
    std::vector<std::string> out;
    std::set<std::string> expected;
    for (const auto& b : section.blocks) expected.insert(b.id);
    std::set<std::string> got;
    for (const auto& b : payload["blocks"]) {
        std::string id = b["block_id"].get<std::string>();
        if (!expected.contains(id)) out.push_back("unknown block_id " + id);
        got.insert(id);
    }
    for (const auto& id : expected)
        if (!got.contains(id)) out.push_back("missing block_id " + id);
    return out;
}

}  // namespace

double fkg_from_counts(double words, double sentences, double syllables) {
    return 0.39 * (words / sentences) + 11.8 * (syllables / words) - 15.59;
}

std::size_t count_syllables(std::string_view word) {
    std::string letters;
    for (char c : word)
        if (std::isalpha(static_cast<unsigned char>(c)))
            letters.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::size_t groups = 0;
    bool in_group = false;
    for (char c : letters) {
        bool v = is_vowel(c);
        if (v && !in_group) ++groups;
        in_group = v;
    }
    if (groups > 1 && letters.size() >= 2 && letters.back() == 'e' && !is_vowel(letters[letters.size() - 2])) --groups;
    return std::max<std::size_t>(groups, 1);
}

ReadabilityStats readability(std::string_view text) {
    auto words = text::word_tokens(text);
    if (words.empty()) throw ValidationError("EmptyText", "text has no words");
    ReadabilityStats stats;
    stats.words = words.size();
    stats.sentences = std::max<std::size_t>(text::sentences(text).size(), 1);
    for (const auto& w : words) stats.syllables += count_syllables(w);
    stats.fkg = fkg_from_counts(static_cast<double>(stats.words), static_cast<double>(stats.sentences),
                                static_cast<double>(stats.syllables));
    return stats;
}

Json to_json(const Config& cfg) {
    return {{"tolerance", cfg.tolerance},
            {"max_relevel_attempts", cfg.max_relevel_attempts},
            {"max_fraction", cfg.max_fraction},
            {"max_segments", cfg.max_segments},
            {"seed", cfg.seed}};
}

std::string body_text(const doc::SourceDocument& doc) {
    std::string out;
    for (const auto& s : doc.sections)
        for (const auto& b : s.blocks) {
            if (!out.empty()) out += "\n\n";
            out += b.text;
        }
    return out;
}

bool headings_covered(const doc::SourceDocument& source, const doc::SourceDocument& candidate) {
    for (std::size_t i = 0; i < source.sections.size(); ++i) {
        const auto& heading = source.sections[i].heading;
        if (text::content_words(heading).empty()) continue;
        if (!text::shares_content_word(heading, subtree_text(candidate, i))) return false;
    }
    return true;
}

RelevelResult relevel(const doc::SourceDocument& doc, doc::GradeLevel target, const gateway::Gateway& gateway,
                      const Config& cfg) {
    if (cfg.max_relevel_attempts < 1) throw PreconditionViolation("max_relevel_attempts must be >= 1");
    std::optional<RelevelResult> best;
    double best_distance = 0.0;
    std::optional<double> previous_fkg;

    for (int attempt = 1; attempt <= cfg.max_relevel_attempts; ++attempt) {
        doc::SourceDocument candidate = doc;
        parallel_for(doc.sections.size(), workers(gateway, cfg), [&](std::size_t i) {
            const auto& section = doc.sections[i];
            if (section.blocks.empty()) return;
            auto req = prompts::make_request(gateway::TaskTag::relevel, cfg.seed, "relevel/" + section.id);
            req.add(std::string(prompts::kHeading), section.heading);
            for (const auto& b : section.blocks) req.add(std::string(prompts::kBlockPrefix) + b.id, b.text);
            if (previous_fkg) {
                req.add(std::string(prompts::kRelevelFeedback),
                        "The previous rewrite measured grade " + format_fixed(*previous_fkg, 2) + "; the target is " +
                            target.to_string() + ". Adjust sentence length and word choice.");
            }
            req.params["target_grade"] = std::to_string(target.value());
            req.params["section_id"] = section.id;
            req.params["relevel_attempt"] = std::to_string(attempt);
            auto response = gateway.generate(std::move(req), [&](const Json& p) { return relevel_violations(section, p); });
            std::map<std::string, std::string> texts;
            for (const auto& b : response.payload["blocks"])
                texts[b["block_id"].get<std::string>()] = text::trim(b["text"].get<std::string>());
            for (auto& b : candidate.sections[i].blocks) b.text = texts.at(b.id);
        });

        const double fkg = readability(body_text(candidate)).fkg;
        const bool covered = headings_covered(doc, candidate);
        const double distance = std::fabs(fkg - target.numeric());
        RelevelReport report{target, fkg, attempt, covered && distance <= cfg.tolerance, covered};
        if (report.accepted) return {std::move(candidate), report};

        // Best effort: coverage first, then distance to target.
        bool better = !best || (covered && !best->report.coverage_ok) ||
                      (covered == best->report.coverage_ok && distance < best_distance);
        if (better) {
            best = RelevelResult{std::move(candidate), report};
            best_distance = distance;
        }
        previous_fkg = fkg;
    }
    best->report.attempts = cfg.max_relevel_attempts;
    return std::move(*best);
}

std::vector<std::string> validate_segments(const doc::SourceDocument& doc, const std::vector<SegmentRef>& segments,
                                           double max_fraction) {
    std::vector<std::string> out;
    std::map<std::string, std::vector<CharRange>> by_block;
    std::size_t total = 0;
    for (const auto& s : segments) {
        const auto* block = doc.find_block(s.block_id);
        std::string where = s.block_id + "[" + std::to_string(s.range.begin) + "," + std::to_string(s.range.end) + ")";
        if (block == nullptr) {
            out.push_back("segment " + where + " references an unknown block");
            continue;
        }
        if (s.range.begin >= s.range.end || s.range.end > block->char_length()) {
            out.push_back("segment " + where + " is outside the block (length " +
                          std::to_string(block->char_length()) + ")");
            continue;
        }
        auto continuation = [&](std::size_t pos) {
            return pos < block->text.size() && (static_cast<unsigned char>(block->text[pos]) & 0xC0) == 0x80;
        };
        if (continuation(s.range.begin) || continuation(s.range.end))
            out.push_back("segment " + where + " splits a UTF-8 character");
        by_block[s.block_id].push_back(s.range);
        total += s.range.size();
    }
    for (auto& [id, ranges] : by_block) {
        std::sort(ranges.begin(), ranges.end(), [](const CharRange& a, const CharRange& b) { return a.begin < b.begin; });
        for (std::size_t i = 1; i < ranges.size(); ++i)
            if (ranges[i].begin < ranges[i - 1].end) out.push_back("segments overlap in block " + id);
    }
    const auto budget = static_cast<std::size_t>(std::floor(max_fraction * static_cast<double>(doc.total_chars())));
    if (total > budget)
        out.push_back("segments cover " + std::to_string(total) + " characters, budget is " + std::to_string(budget));
    return out;
}

namespace {

std::vector<SegmentRef> parse_segments(const Json& payload) {
    std::vector<SegmentRef> out;
    for (const auto& s : payload["segments"])
        out.push_back({s["block_id"].get<std::string>(),
                       {s["start"].get<std::size_t>(), s["end"].get<std::size_t>()}});
    return out;
}

}  // namespace

std::vector<SegmentRef> select_personalizable_segments(const doc::SourceDocument& releveled,
                                                       const std::string& interest,
                                                       const gateway::Gateway& gateway, const Config& cfg) {
    auto req = prompts::make_request(gateway::TaskTag::select_segments, cfg.seed, "select/" + releveled.id);
    req.add(std::string(prompts::kInterest), interest);
    for (const auto& s : releveled.sections)
        for (const auto& b : s.blocks)
            if (b.kind == doc::BlockKind::paragraph || b.kind == doc::BlockKind::list)
                req.add(std::string(prompts::kBlockPrefix) + b.id, b.text);
    const auto budget = static_cast<std::size_t>(std::floor(cfg.max_fraction * static_cast<double>(releveled.total_chars())));
    req.params["max_chars"] = std::to_string(budget);
    req.params["max_segments"] = std::to_string(cfg.max_segments);

    auto response = gateway.generate(std::move(req), [&](const Json& p) {
        return validate_segments(releveled, parse_segments(p), cfg.max_fraction);
    });
    auto segments = parse_segments(response.payload);

    std::map<std::string, std::size_t> order;
    for (const auto& s : releveled.sections)
        for (const auto& b : s.blocks) order.emplace(b.id, order.size());
    std::sort(segments.begin(), segments.end(), [&](const SegmentRef& a, const SegmentRef& b) {
        return std::pair(order.at(a.block_id), a.range.begin) < std::pair(order.at(b.block_id), b.range.begin);
    });
    return segments;
}

std::string apply_spans(std::string_view base, std::vector<PersonalizationSpan> spans) {
    std::sort(spans.begin(), spans.end(),
              [](const PersonalizationSpan& a, const PersonalizationSpan& b) { return a.range.begin < b.range.begin; });
    std::string out;
    std::size_t cursor = 0;
    for (const auto& s : spans) {
        out.append(base.substr(cursor, s.range.begin - cursor));
        out += s.personalized_text;
        cursor = s.range.end;
    }
    out.append(base.substr(cursor));
    return out;
}

std::string PersonalizedDocument::final_block_text(const doc::Block& block) const {
    std::vector<PersonalizationSpan> mine;
    for (const auto& s : spans)
        if (s.block_id == block.id) mine.push_back(s);
    return apply_spans(block.text, std::move(mine));
}

doc::SourceDocument PersonalizedDocument::rendered() const {
    doc::SourceDocument out = base;
    for (auto& s : out.sections)
        for (auto& b : s.blocks) b.text = final_block_text(b);
    return out;
}

PersonalizedDocument personalize(const doc::SourceDocument& doc, const doc::LearnerProfile& profile,
                                 const gateway::Gateway& gateway, const Config& cfg,
                                 const std::vector<std::string>& catalog) {
    doc::validate_profile(profile, catalog);
    auto releveled = relevel(doc, profile.grade, gateway, cfg);
    auto segments = select_personalizable_segments(releveled.releveled, profile.interest, gateway, cfg);

    PersonalizedDocument out;
    out.profile = profile;
    out.relevel_report = releveled.report;
    out.spans.resize(segments.size());
    parallel_for(segments.size(), workers(gateway, cfg), [&](std::size_t i) {
        const auto& seg = segments[i];
        const auto* block = releveled.releveled.find_block(seg.block_id);
        std::string original = block->text.substr(seg.range.begin, seg.range.size());
        auto req = prompts::make_request(gateway::TaskTag::rewrite_segment, cfg.seed,
                                         "rewrite/" + seg.block_id + "/" + std::to_string(seg.range.begin));
        req.add(std::string(prompts::kInterest), profile.interest);
        req.add(std::string(prompts::kSegment), original);
        req.add(std::string(prompts::kSurrounding), block->text);
        req.params["block_id"] = seg.block_id;
        auto response = gateway.generate(std::move(req));
        out.spans[i] = {seg.block_id, seg.range, original, text::trim(response.payload["text"].get<std::string>()),
                        profile.interest};
    });
    out.base = std::move(releveled.releveled);
    return out;
}

Json to_json(const PersonalizedDocument& pdoc) {
    Json spans = Json::array();
    // Offsets of each span in the final text, for highlighting.
    std::map<std::string, long long> shift;
    for (const auto& s : pdoc.spans) {
        long long delta = shift[s.block_id];
        auto final_begin = static_cast<long long>(s.range.begin) + delta;
        auto final_end = final_begin + static_cast<long long>(s.personalized_text.size());
        shift[s.block_id] = delta + static_cast<long long>(s.personalized_text.size()) -
                            static_cast<long long>(s.range.size());
        spans.push_back({{"block_id", s.block_id},
                         {"char_range", {s.range.begin, s.range.end}},
                         {"final_range", {final_begin, final_end}},
                         {"original_text", s.original_text},
                         {"personalized_text", s.personalized_text},
                         {"interest", s.interest}});
    }
    const auto& r = pdoc.relevel_report;
    return {{"base", doc::to_json(pdoc.base)},
            {"final", doc::to_json(pdoc.rendered())},
            {"spans", spans},
            {"profile", doc::to_json(pdoc.profile)},
            {"relevel_report",
             {{"target", r.target.to_string()},
              {"achieved_fkg", r.achieved_fkg},
              {"attempts", r.attempts},
              {"accepted", r.accepted},
              {"coverage_ok", r.coverage_ok}}}};
}

PersonalizedDocument personalized_from_json(const Json& j) {
    try {
        PersonalizedDocument pdoc;
        pdoc.base = doc::document_from_json(j.at("base"));
        pdoc.profile = doc::profile_from_json(j.at("profile"));
        for (const auto& s : j.at("spans")) {
            pdoc.spans.push_back({s.at("block_id").get<std::string>(),
                                  {s.at("char_range")[0].get<std::size_t>(), s.at("char_range")[1].get<std::size_t>()},
                                  s.at("original_text").get<std::string>(),
                                  s.at("personalized_text").get<std::string>(),
                                  s.at("interest").get<std::string>()});
        }
        const auto& r = j.at("relevel_report");
        pdoc.relevel_report = {doc::GradeLevel::parse(r.at("target").get<std::string>()),
                               r.at("achieved_fkg").get<double>(), r.at("attempts").get<int>(),
                               r.at("accepted").get<bool>(), r.value("coverage_ok", true)};
        return pdoc;
    } catch (const Json::exception& e) {
        throw ValidationError("InvalidDocument", e.what());
    }
}

}  // namespace folio::personalize
