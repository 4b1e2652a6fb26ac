#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace teleoracle {

struct Document {
    std::string id;
    std::string title;
    std::string source;
    std::string text;
};

/// A sentence span into Document::text. Spans are byte offsets, exclude the
/// surrounding whitespace, and joined with the original inter-span gaps they
/// reconstruct the document byte-for-byte.
struct Sentence {
    std::string doc_id;
    std::size_t index = 0;
    std::size_t byte_start = 0;
    std::size_t byte_end = 0; // exclusive
    std::string text;
};

/// Loads a JSONL corpus: one {"id","title","source","text"} object per line.
/// Blank lines are skipped. Throws on malformed JSON (naming the line),
/// missing/invalid fields, and duplicate ids.
std::vector<Document> load_corpus(const std::filesystem::path& path);

/// Rule-based splitter: breaks after . ! ? followed by whitespace and an
/// uppercase letter or digit, guarded by an abbreviation stop-list. A text
/// with no terminators yields one sentence.
std::vector<Sentence> split_sentences(const Document& doc);

/// Tokenizer shared by token budgets and the BM25 index: split on
/// whitespace, then peel leading and trailing punctuation characters off
/// each word as single-character tokens. "NWDAF (5G)." tokenizes to
/// [NWDAF, (, 5G, ), .].
std::vector<std::string> tokenize(std::string_view text);

std::size_t count_tokens(std::string_view text);

} // namespace teleoracle
