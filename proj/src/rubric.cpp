#include "folio/rubric.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace folio::eval {
namespace {

using text::to_lower;
using text::trim;

const std::array<CriterionInfo, 10> kInfo = {{
    {Criterion::Accuracy, "Accuracy", "Faithful to the source and accurate",
     "The generated content is consistent with the source resource. Does not misrepresent or misconnect concepts. "
     "Captures and clearly conveys the source's main arguments, supporting key claims. The organization of the "
     "content (when applicable) is accurate and factual.",
     "Content does not add or alter main concepts, but might have minor inaccuracies, or miss concepts, "
     "relationships, or arguments.",
     "Content contains claims or arguments that counter the source, major inaccuracies, or misses major concepts."},
    {Criterion::Coverage, "Coverage", "Completeness of representation of source messages",
     "The generated content covers the source content, faithfully preserving the links and structure of the "
     "original. The source hierarchy is preserved. All key / top level concepts and LOs are covered, but immaterial "
     "details may be omitted to support learnability.",
     "Content mostly covers the structure and subject matter of the source, but is missing some key concepts, "
     "relationships, or messages.",
     "Key subject matter or structure is missing from the generated content."},
    {Criterion::Emphasis, "Emphasis", "Precisely prioritizes core concepts",
     "The generated content focuses on the key concepts / relationships in the source, not trivial / marginal / "
     "esoteric concepts.",
     "Choice of elements partially reflects source hierarchy or intentions by including most of the core concepts, "
     "but might miss an important concept or emphasis some trivial material along with the core concepts.",
     "Choice of elements appears arbitrary, and does not align with source hierarchy or intents."},
    {Criterion::Engagement, "Engagement", "Positive, pleasant and purposeful user experience",
     "The generated content evokes positive emotional response. The tone, aesthetics, narrative, playfulness, and "
     "elements of personalization create a fun and captivating learning experience.",
     "Content does not consistently engage or evoke a positive response from the user. Limited use of playfulness "
     "or personalization.",
     "Content is dry, boring, does not attempt to evoke positive emotions. No perceived value to the user."},
    {Criterion::CognitiveLoad, "CognitiveLoad", "Effective use of cognitive effort",
     "Content is well organized, clear and concise. Accessible language. Key points emphasized. Uses examples, "
     "analogies, narrative, and multiple representations effectively to enhance understanding.",
     "Content is fairly well structured but some sections could be improved. Phrasing is occasional difficult. "
     "Some unhelpful redundancy.",
     "Content is poorly structured, and may included large overwhelming blocks of text. No clear hierarchy."},
    {Criterion::ActiveLearning, "ActiveLearning",
     "Promotes active learning that goes beyond recall and comprehension",
     "Content raises questions and encourages user to engage with subject matter and learning objectives in "
     "multiple levels: recall, comprehension, analysis, application, evaluation, and creation.",
     "Content mostly focuses on information delivery, and misses opportunities to engage user with learning "
     "objectives at multiple levels.",
     "Content is purely informational and does not encourage higher order thinking."},
    {Criterion::DeepenMetacognition, "DeepenMetacognition",
     "Promotes active self-reflection, monitoring, regulation, and improvement of thinking and learning processes",
     "Provides relevant and actionable feedback. Prompts active reflection and inspection of learning processes. "
     "Supports the user to identify, execute and monitor their learning plan.",
     "Provides somewhat useful feedback, but may not be relevant or actionable. Prompts shallow reflection.",
     "Flat informative content, no useful feedback, no prompts for reflection or managing and regulating learning."},
    {Criterion::MotivationCuriosity, "MotivationCuriosity",
     "Encourages users to persist and deeply engage with learning processes. Incentivizes cognitive effort",
     "Uses a consistently supportive tone, encouraging user to persist. Maintains an optimal level of challenge. "
     "Highlights the relevance of the subject matter to the user, their concerns and interests.",
     "Tone is occasional unsupportive, or encouragement is sporadic. Challenges are not consistently aligned to an "
     "optimal challenge level for the user.",
     "Tone is not supportive or encouraging. Challenges are missing, or at inappropriate level for the user."},
    {Criterion::AdaptabilityPersonalization, "AdaptabilityPersonalization",
     "Learning experience is adjusted to fit the user interests, preferences and characteristics",
     "Content is fully adjusted to user's interests, age group, grade level, language proficiency, level of focus "
     "and attention, motivation, and preferences.",
     "Content acknowledges user's preferences and characteristics, but is only partially adjusted.",
     "Content ignores user preferences and characteristics, \"one size fits all\"."},
    {Criterion::ClarityOfLearningIntentions, "ClarityOfLearningIntentions",
     "Content clearly articulates what is being learned and how users will know if they have been successful",
     "Learning objectives are clearly stated and user-friendly. Specific rubrics or benchmarks define what "
     "successful completion or understanding looks like.",
     "Learning objectives stated but not elaborated or demonstrated. Success criteria are vague or confusing.",
     "Learning objectives not specified, unclear or inconsistent. No evident success criteria."},
}};

// Lowercase with everything but letters removed, so "Motivation & curiosity"
// and "motivation_curiosity" compare equal.
std::string fold_name(std::string_view s) {
    std::string out;
    for (char c : s)
        if (std::isalpha(static_cast<unsigned char>(c))) out.push_back(static_cast<char>(std::tolower(c)));
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back().push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                fields.back().push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back().push_back(c);
        }
    }
    for (auto& f : fields) f = trim(f);
    return fields;
}

std::string key_part(const Rating& r, Dimension d) {
    switch (d) {
        case Dimension::component: return r.component;
        case Dimension::material: return r.material;
        case Dimension::rater: return r.rater;
        case Dimension::criterion: return std::string(to_string(r.criterion));
    }
    return {};
}

struct Acc {
    double sum = 0.0;
    std::size_t n = 0;
    std::size_t n_na = 0;

    void add(const std::optional<double>& v) {
        if (v) {
            sum += *v;
            ++n;
        } else {
            ++n_na;
        }
    }
    std::optional<double> mean() const {
        return n == 0 ? std::nullopt : std::optional<double>(sum / static_cast<double>(n));
    }
};

std::optional<double> mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::nullopt;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

ComponentReport build_component(const std::string& name, const std::vector<const Rating*>& rows) {
    ComponentReport out;
    out.component = name;
    std::map<Criterion, Acc> per;
    Acc groups[2];
    Acc all;
    for (const Rating* r : rows) {
        per[r->criterion].add(r->value);
        groups[group_of(r->criterion) == MetricGroup::high_level ? 0 : 1].add(r->value);
        all.add(r->value);
    }
    std::vector<double> axes[2];
    std::vector<double> all_axes;
    for (Criterion c : kAllCriteria) {
        const Acc& a = per[c];
        AggregateRow row;
        row.key = {name, std::string(to_string(c))};
        row.mean = a.mean();
        row.n = a.n;
        row.n_na = a.n_na;
        out.criteria[c] = row;
        if (row.mean) {
            axes[group_of(c) == MetricGroup::high_level ? 0 : 1].push_back(*row.mean);
            all_axes.push_back(*row.mean);
        }
    }
    const auto summary = [](const Acc& pooled, const std::vector<double>& axis_means) {
        GroupSummary g;
        g.per_axis_mean = mean_of(axis_means);
        g.pooled_mean = pooled.mean();
        g.n = pooled.n;
        g.n_na = pooled.n_na;
        return g;
    };
    out.high_level = summary(groups[0], axes[0]);
    out.additional = summary(groups[1], axes[1]);
    out.overall = summary(all, all_axes);
    return out;
}

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json to_json(const GroupSummary& g) {
    return {{"per_axis_mean", opt(g.per_axis_mean)}, {"pooled_mean", opt(g.pooled_mean)}, {"n", g.n}, {"n_na", g.n_na}};
}

Json to_json(const ComponentReport& c) {
    Json criteria = Json::object();
    for (const auto& [k, row] : c.criteria)
        criteria[std::string(to_string(k))] = {{"mean", opt(row.mean)}, {"n", row.n}, {"n_na", row.n_na}};
    return {{"component", c.component},
            {"criteria", criteria},
            {"high_level", to_json(c.high_level)},
            {"additional", to_json(c.additional)},
            {"overall", to_json(c.overall)}};
}

std::string cell(const std::optional<double>& v) {
    if (!v) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *v;
    return os.str();
}

}  // namespace

const CriterionInfo& info(Criterion c) { return kInfo[static_cast<std::size_t>(c)]; }

std::string_view to_string(Criterion c) { return info(c).name; }

Criterion criterion_from_string(std::string_view s) {
    const std::string f = fold_name(s);
    for (const auto& i : kInfo)
        if (fold_name(i.name) == f) return i.id;
    // Shortened forms as printed in rubric tables.
    if (f == "motivation" || f == "curiosity") return Criterion::MotivationCuriosity;
    if (f == "adaptability" || f == "personalization") return Criterion::AdaptabilityPersonalization;
    if (f == "clarityoflearningintentionssuccesscriteria" || f == "clarityoflearningintentionsandsuccesscriteria" ||
        f == "clarity")
        return Criterion::ClarityOfLearningIntentions;
    if (f == "deepenmetacognition" || f == "metacognition") return Criterion::DeepenMetacognition;
    if (f == "motivationandcuriosity") return Criterion::MotivationCuriosity;
    if (f == "adaptabilityandpersonalization") return Criterion::AdaptabilityPersonalization;
    throw UnknownCriterion("unknown rubric criterion '" + std::string(s) + "'");
}

MetricGroup group_of(Criterion c) {
    switch (c) {
        case Criterion::Accuracy:
        case Criterion::Coverage:
        case Criterion::Emphasis:
        case Criterion::Engagement: return MetricGroup::high_level;
        default: return MetricGroup::additional;
    }
}

std::string_view to_string(MetricGroup g) { return g == MetricGroup::high_level ? "high_level" : "additional"; }

std::optional<double> parse_rating_value(std::string_view s) {
    const std::string v = to_lower(trim(s));
    if (v == "na" || v == "n/a") return std::nullopt;
    if (v == "1" || v == "1.0") return 1.0;
    if (v == "0.5" || v == ".5") return 0.5;
    if (v == "0" || v == "0.0") return 0.0;
    throw InvalidRating("rating value must be 1.0, 0.5, 0.0 or NA, got '" + std::string(s) + "'");
}

std::vector<Rating> parse_ratings_csv(std::string_view text) {
    std::vector<std::string> lines;
    {
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (!trim(line).empty()) lines.push_back(line);
        }
    }
    if (lines.empty()) throw EmptyInput("ratings file is empty");
    const auto header = split_csv_line(lines[0]);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[to_lower(header[i])] = i;
    for (const char* name : {"component", "material", "rater", "criterion", "value"})
        if (!col.count(name)) throw InvalidRating(std::string("ratings header lacks column '") + name + "'");
    if (lines.size() == 1) throw EmptyInput("ratings file has a header but no rows");

    std::vector<Rating> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto f = split_csv_line(lines[li]);
        if (f.size() != header.size())
            throw InvalidRating("line " + std::to_string(li + 1) + ": expected " + std::to_string(header.size()) +
                                " fields, got " + std::to_string(f.size()));
        Rating r;
        r.component = f[col["component"]];
        r.material = f[col["material"]];
        r.rater = f[col["rater"]];
        r.criterion = criterion_from_string(f[col["criterion"]]);
        r.value = parse_rating_value(f[col["value"]]);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Rating> parse_ratings_json(const Json& j) {
    const Json& rows = j.is_object() && j.contains("ratings") ? j["ratings"] : j;
    if (!rows.is_array()) throw InvalidRating("ratings JSON must be an array of objects");
    if (rows.empty()) throw EmptyInput("ratings file is empty");
    std::vector<Rating> out;
    for (const auto& row : rows) {
        if (!row.is_object()) throw InvalidRating("rating entry is not an object");
        for (const char* name : {"component", "material", "rater", "criterion", "value"})
            if (!row.contains(name)) throw InvalidRating(std::string("rating entry lacks '") + name + "'");
        Rating r;
        r.component = row["component"].get<std::string>();
        r.material = row["material"].get<std::string>();
        r.rater = row["rater"].get<std::string>();
        r.criterion = criterion_from_string(row["criterion"].get<std::string>());
        const Json& v = row["value"];
        if (v.is_null()) {
            r.value = std::nullopt;
        } else if (v.is_number()) {
            const double d = v.get<double>();
            if (d != 1.0 && d != 0.5 && d != 0.0) throw InvalidRating("rating value out of set: " + v.dump());
            r.value = d;
        } else if (v.is_string()) {
            r.value = parse_rating_value(v.get<std::string>());
        } else {
            throw InvalidRating("rating value has unsupported type: " + v.dump());
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<Rating> load_ratings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    if (trim(text).empty()) throw EmptyInput("ratings file is empty: " + path.string());
    if (path.extension() == ".json") {
        try {
            return parse_ratings_json(Json::parse(text));
        } catch (const Json::exception& e) {
            throw InvalidRating(std::string("malformed ratings JSON: ") + e.what());
        }
    }
    return parse_ratings_csv(text);
}

Dimension dimension_from_string(std::string_view s) {
    const std::string v = to_lower(trim(s));
    if (v == "component") return Dimension::component;
    if (v == "material") return Dimension::material;
    if (v == "rater") return Dimension::rater;
    if (v == "criterion") return Dimension::criterion;
    throw ValidationError("UnknownDimension", "unknown grouping dimension '" + std::string(s) + "'");
}

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::component: return "component";
        case Dimension::material: return "material";
        case Dimension::rater: return "rater";
        case Dimension::criterion: return "criterion";
    }
    return "component";
}

std::vector<AggregateRow> aggregate_ratings(const std::vector<Rating>& ratings, const std::vector<Dimension>& group_by) {
    std::map<std::vector<std::string>, Acc> groups;
    for (const auto& r : ratings) {
        std::vector<std::string> key;
        for (auto d : group_by) key.push_back(key_part(r, d));
        groups[key].add(r.value);
    }
    std::vector<AggregateRow> out;
    for (const auto& [key, acc] : groups) out.push_back({key, acc.mean(), acc.n, acc.n_na});
    return out;
}

RubricReport rubric_report(const std::vector<Rating>& ratings) {
    std::map<std::string, std::vector<const Rating*>> by_component;
    std::vector<const Rating*> every;
    for (const auto& r : ratings) {
        by_component[r.component].push_back(&r);
        every.push_back(&r);
    }
    RubricReport out;
    for (const auto& [name, rows] : by_component) out.components.push_back(build_component(name, rows));
    out.all = build_component("*", every);
    return out;
}

Json to_json(const AggregateRow& r, const std::vector<Dimension>& group_by) {
    Json key = Json::object();
    for (std::size_t i = 0; i < group_by.size() && i < r.key.size(); ++i) key[std::string(to_string(group_by[i]))] = r.key[i];
    return {{"key", key}, {"mean", opt(r.mean)}, {"n", r.n}, {"n_na", r.n_na}};
}

Json to_json(const RubricReport& r) {
    Json comps = Json::array();
    for (const auto& c : r.components) comps.push_back(to_json(c));
    return {{"components", comps}, {"all", to_json(r.all)}};
}

std::string format_table(const RubricReport& r) {
    std::vector<const ComponentReport*> cols;
    for (const auto& c : r.components) cols.push_back(&c);
    cols.push_back(&r.all);

    std::size_t w0 = std::string_view("pooled mean").size();
    for (auto c : kAllCriteria) w0 = std::max(w0, to_string(c).size());
    std::vector<std::size_t> widths;
    for (auto c : cols) widths.push_back(std::max<std::size_t>(c->component == "*" ? 3 : c->component.size(), 5));

    std::ostringstream os;
    const auto row = [&](const std::string& label, const auto& value_of) {
        os << std::left << std::setw(static_cast<int>(w0)) << label;
        for (std::size_t i = 0; i < cols.size(); ++i)
            os << "  " << std::right << std::setw(static_cast<int>(widths[i])) << value_of(*cols[i]);
        os << "\n";
    };
    row("criterion", [](const ComponentReport& c) { return c.component == "*" ? std::string("all") : c.component; });
    for (MetricGroup g : {MetricGroup::high_level, MetricGroup::additional}) {
        os << "\n" << (g == MetricGroup::high_level ? "high-level metrics" : "additional metrics") << "\n";
        for (Criterion k : kAllCriteria) {
            if (group_of(k) != g) continue;
            row(std::string(to_string(k)), [k](const ComponentReport& c) { return cell(c.criteria.at(k).mean); });
        }
        const auto pick = [g](const ComponentReport& c) -> const GroupSummary& {
            return g == MetricGroup::high_level ? c.high_level : c.additional;
        };
        row("axis mean", [&](const ComponentReport& c) { return cell(pick(c).per_axis_mean); });
        row("pooled mean", [&](const ComponentReport& c) { return cell(pick(c).pooled_mean); });
    }
    os << "\noverall\n";
    row("axis mean", [](const ComponentReport& c) { return cell(c.overall.per_axis_mean); });
    row("pooled mean", [](const ComponentReport& c) { return cell(c.overall.pooled_mean); });
    return os.str();
}

}  // namespace folio::eval
