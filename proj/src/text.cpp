#include "teleoracle/text.hpp"

#include "teleoracle/corpus.hpp"

namespace teleoracle {

std::string ascii_lower_copy(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",     "an",    "the",   "is",    "are",   "was",   "were",  "be",    "been",
        "being", "of",    "in",    "on",    "at",    "to",    "for",   "with",  "by",
        "from",  "as",    "that",  "this",  "these", "those", "it",    "its",   "and",
        "or",    "but",   "not",   "no",    "what",  "which", "who",   "whom",  "how",
        "when",  "where", "why",   "does",  "do",    "did",   "can",   "could", "should",
        "would", "will",  "shall", "may",   "might", "must",  "have",  "has",   "had",
        "i",     "you",   "he",    "she",   "we",    "they",  "than",  "then",  "there",
        "their", "them",  "his",   "her",   "our",   "your",  "my",    "me",    "us",
        "if",    "into",  "about", "over",  "under", "such",  "so",    "too",   "very",
        "only",  "also",  "each",  "both",  "more",  "most",  "other", "some",  "any",
        "all",   "between", "during", "before", "after", "above", "below", "up",  "down",
        "out",   "off",   "following", "true", "false",
    };
    return words;
}

bool has_alnum(std::string_view token) {
    for (unsigned char c : token) {
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
            c >= 0x80) {
            return true;
        }
    }
    return false;
}

} // namespace

bool is_stopword(std::string_view lowercased) {
    return stopwords().count(std::string(lowercased)) > 0;
}

std::unordered_set<std::string> content_token_set(std::string_view text) {
    std::unordered_set<std::string> out;
    for (const std::string& token : tokenize(text)) {
        if (!has_alnum(token)) continue;
        std::string lower = ascii_lower_copy(token);
        if (is_stopword(lower)) continue;
        out.insert(std::move(lower));
    }
    return out;
}

} // namespace teleoracle
