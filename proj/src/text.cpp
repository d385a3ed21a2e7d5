#include "folio/text.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <unordered_set>

namespace folio {

std::string canonical_dump(const Json& value) {
    return value.dump(2) + "\n";
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest.data());
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(digest.size() * 2);
    for (unsigned char byte : digest) {
        out.push_back(kHex[byte >> 4]);
        out.push_back(kHex[byte & 0x0f]);
    }
    return out;
}

std::string content_id(std::string_view prefix, std::string_view data, std::size_t length) {
    std::string id(prefix);
    id.push_back('-');
    id += sha256_hex(data).substr(0, length);
    return id;
}

namespace text {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "the",   "and",   "for",   "are",   "but",   "not",   "you",   "all",   "any",
        "can",   "had",   "her",   "was",   "one",   "our",   "out",   "has",   "him",
        "his",   "how",   "its",   "may",   "who",   "did",   "get",   "let",   "she",
        "too",   "use",   "that",  "with",  "have",  "this",  "will",  "your", "from",
        "they",  "them",  "then",  "than",  "been",  "were",  "what",  "when", "where",
        "which", "while", "there", "their", "these", "those", "into",  "also", "each",
        "some",  "such",  "only",  "over",  "very",  "more",  "most",  "other", "about",
        "after", "before", "because", "could", "would", "should", "does", "just", "like",
        "many",  "much",  "both",  "here",  "being", "through", "under", "upon", "between",
    };
    return words;
}

}  // namespace

std::string trim(std::string_view s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && is_space(s[begin])) ++begin;
    while (end > begin && is_space(s[end - 1])) --end;
    return std::string(s.substr(begin, end - begin));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out.push_back(' ');
        pending_space = false;
        out.push_back(c);
    }
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (start == i) continue;
        std::string_view token = s.substr(start, i - start);
        if (std::any_of(token.begin(), token.end(), is_alnum)) tokens.emplace_back(token);
    }
    return tokens;
}

std::vector<std::string> sentences(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    auto flush = [&](std::size_t end) {
        std::string sentence = trim(s.substr(start, end - start));
        if (!word_tokens(sentence).empty()) out.push_back(std::move(sentence));
        start = end;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if ((c == '.' || c == '!' || c == '?') && (i + 1 == s.size() || is_space(s[i + 1]))) {
            flush(i + 1);
        }
    }
    if (start < s.size()) flush(s.size());
    return out;
}

std::set<std::string> content_words(std::string_view s) {
    std::set<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_alpha(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && is_alpha(s[i])) ++i;
        if (i - start >= 3) {
            std::string word = to_lower(s.substr(start, i - start));
            if (!stopwords().contains(word)) out.insert(std::move(word));
        }
    }
    return out;
}

bool shares_content_word(std::string_view a, std::string_view b) {
    const auto left = content_words(a);
    const auto right = content_words(b);
    return std::any_of(left.begin(), left.end(),
                       [&](const std::string& w) { return right.contains(w); });
}

bool contains_case_folded(std::string_view haystack, std::string_view needle) {
    return to_lower(haystack).find(to_lower(needle)) != std::string::npos;
}

bool shares_window(std::string_view haystack, std::string_view source, std::size_t window) {
    if (window == 0) return true;
    if (source.size() < window || haystack.size() < window) return false;
    std::unordered_set<std::string_view> windows;
    windows.reserve(source.size());
    for (std::size_t i = 0; i + window <= source.size(); ++i) windows.insert(source.substr(i, window));
    for (std::size_t i = 0; i + window <= haystack.size(); ++i) {
        if (windows.contains(haystack.substr(i, window))) return true;
    }
    return false;
}

std::string capitalize(std::string_view word) {
    std::string out(word);
    if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    return out;
}

}  // namespace text
}  // namespace folio
