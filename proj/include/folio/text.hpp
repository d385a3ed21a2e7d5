#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace folio {

using Json = nlohmann::json;

// Serialized form used for every on-disk and wire artifact: sorted keys,
// two-space indent, trailing newline.
std::string canonical_dump(const Json& value);

std::string sha256_hex(std::string_view data);

// "<prefix>-<first `length` hex chars of sha256(data)>"
std::string content_id(std::string_view prefix, std::string_view data, std::size_t length = 12);

namespace text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Collapse every whitespace run to one space and trim both ends.
std::string normalize_whitespace(std::string_view s);

// Whitespace-separated tokens that contain at least one letter or digit.
std::vector<std::string> word_tokens(std::string_view s);

// Sentences as split by the readability sentence rule: a '.', '!' or '?'
// followed by whitespace or end of text closes a sentence. A trailing run
// of words without a terminator is its own sentence.
std::vector<std::string> sentences(std::string_view s);

// Lower-cased alphabetic runs of length >= 3 that are not stopwords.
std::set<std::string> content_words(std::string_view s);

bool shares_content_word(std::string_view a, std::string_view b);

bool contains_case_folded(std::string_view haystack, std::string_view needle);

// True when `haystack` contains some substring of `source` of length `window`.
bool shares_window(std::string_view haystack, std::string_view source, std::size_t window);

std::string capitalize(std::string_view word);

}  // namespace text
}  // namespace folio
