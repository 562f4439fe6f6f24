#ifndef WIKIREL_STRINGS_H_
#define WIKIREL_STRINGS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace wikirel {

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

inline char ascii_lower(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline char ascii_upper(char c) {
  return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

std::string_view trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

// Case-insensitive (ASCII) search; returns npos when absent.
std::size_t ifind(std::string_view haystack, std::string_view needle,
                  std::size_t from = 0);

// Splits on `sep` and trims every piece; empty pieces are dropped.
std::vector<std::string> split_list(std::string_view s, char sep = ',');

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Decodes %XX escapes; malformed escapes are copied through.
std::string percent_decode(std::string_view s);

// Encodes everything except RFC 3986 unreserved characters.
std::string percent_encode(std::string_view s);

// MediaWiki page title normalization: underscores become spaces, runs of
// whitespace collapse, surrounding whitespace is trimmed and the first
// character is upper-cased (ASCII only).
std::string normalize_title(std::string_view title);

// Title as used in URLs and dump files (spaces become underscores).
std::string title_to_key(std::string_view title);

// 64-bit FNV-1a. Used for cache file names.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace wikirel

#endif  // WIKIREL_STRINGS_H_
