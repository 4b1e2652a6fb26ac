#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace teleoracle {

// Locale-independent ASCII classification. Bytes >= 0x80 (UTF-8
// continuation/lead bytes) are treated as word characters.
constexpr bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

constexpr bool is_ascii_punct(char c) {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') ||
           (c >= '{' && c <= '~');
}

constexpr bool is_ascii_digit(char c) {
    return c >= '0' && c <= '9';
}

constexpr bool is_ascii_upper(char c) {
    return c >= 'A' && c <= 'Z';
}

constexpr char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string ascii_lower_copy(std::string_view s);

/// FNV-1a over raw bytes. Fixed-width so results match across platforms.
std::uint64_t fnv1a64(std::string_view bytes);

/// One round of the splitmix64 mixer; used to derive sign bits and stub
/// choices from seeds without touching platform-dependent std::hash.
std::uint64_t splitmix64(std::uint64_t x);

bool is_stopword(std::string_view lowercased);

/// Lowercased tokens that carry at least one alphanumeric byte and are not
/// stop-words. This is the shared definition behind the reference reranker,
/// the oracle generator stub, and the faithfulness proxy.
std::unordered_set<std::string> content_token_set(std::string_view text);

} // namespace teleoracle
