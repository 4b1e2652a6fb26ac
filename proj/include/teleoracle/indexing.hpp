#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "teleoracle/chunking.hpp"
#include "teleoracle/embedding.hpp"

namespace teleoracle {

enum class ScoreSource { keyword, vector, reranked };

constexpr const char* to_string(ScoreSource s) {
    switch (s) {
    case ScoreSource::keyword: return "keyword";
    case ScoreSource::vector: return "vector";
    case ScoreSource::reranked: return "reranked";
    }
    return "unknown";
}

/// A chunk id paired with a stage-tagged relevance score.
struct ScoredChunk {
    std::string chunk_id;
    double score = 0.0;
    ScoreSource source = ScoreSource::keyword;
};

struct Posting {
    std::string chunk_id;
    std::size_t term_frequency = 0;
};

/// Inverted index with the corpus statistics the BM25 formula needs:
/// f(q,D) in postings, dl per chunk, adl, N, and N(q) per term.
struct Bm25Index {
    std::map<std::string, std::vector<Posting>> postings;
    std::unordered_map<std::string, std::size_t> doc_len;
    double avg_doc_len = 0.0;
    std::size_t doc_count = 0;
    std::unordered_map<std::string, std::size_t> doc_freq;
    double k1 = 1.5;
    double b = 0.75;

    bool empty() const { return doc_count == 0; }
};

/// Builds the inverted index over lowercased corpus-tokenizer tokens.
/// Throws on an empty chunk list, invalid parameters, or duplicate ids.
Bm25Index bm25_build(const std::vector<Chunk>& chunks, double k1 = 1.5, double b = 0.75);

/// Sum over query terms of
///   f(k1+1) / (f + k1(1 - b + b dl/adl)) * ln((N - N(q) + 0.5)/(N(q) + 0.5) + 1).
/// Query terms are a multiset: repeated terms contribute repeatedly.
/// Throws if chunk_id is not in the index.
double bm25_score(const Bm25Index& idx, const std::vector<std::string>& query_terms,
                  const std::string& chunk_id);

/// Chunks with a positive score, sorted score-descending then id-ascending,
/// at most top_k of them. The query goes through the corpus tokenizer and is
/// lowercased.
std::vector<ScoredChunk> bm25_search(const Bm25Index& idx, const std::string& query,
                                     std::size_t top_k);

/// Brute-force exact cosine store. Entries keep build order; that order is
/// the row order of the persisted vectors.bin.
struct VectorStore {
    std::vector<std::string> chunk_ids;
    std::vector<EmbeddingVector> vectors;
    EmbedderSpec embedder;

    bool empty() const { return chunk_ids.empty(); }
    std::size_t size() const { return chunk_ids.size(); }
};

VectorStore vector_build(const std::vector<Chunk>& chunks, const EmbedderSpec& embedder);

std::vector<ScoredChunk> vector_search(const VectorStore& store, const std::string& query,
                                       std::size_t top_k);

/// Everything one chunk corpus needs at query time: both first-stage indexes
/// plus the chunk texts they point at.
struct IndexBundle {
    Bm25Index bm25;
    VectorStore vectors;
    std::vector<Chunk> chunks;

    bool empty() const { return chunks.empty(); }
};

IndexBundle build_index_bundle(const std::vector<Chunk>& chunks, const EmbedderSpec& embedder,
                               double k1 = 1.5, double b = 0.75);

/// Directory layout: manifest.json (version, dim, counts, embedder
/// fingerprint, k1, b, checksums, chunk order), vectors.bin (little-endian
/// f32, row-major, manifest chunk order), postings.jsonl ({"t","p"} per
/// term), chunks.jsonl (chunk dump). Files are written to a temp name and
/// renamed, and the same input always persists byte-identically.
void persist(const IndexBundle& bundle, const std::filesystem::path& dir);

/// Inverse of persist. Throws on a missing manifest, version mismatch, or
/// checksum failure.
IndexBundle load(const std::filesystem::path& dir);

/// Fast id -> chunk lookup over a bundle's chunk list.
class ChunkCatalog {
public:
    ChunkCatalog() = default;
    explicit ChunkCatalog(const std::vector<Chunk>& chunks);

    bool contains(const std::string& id) const { return by_id_.count(id) > 0; }
    const Chunk& at(const std::string& id) const;

private:
    std::unordered_map<std::string, const Chunk*> by_id_;
};

} // namespace teleoracle
