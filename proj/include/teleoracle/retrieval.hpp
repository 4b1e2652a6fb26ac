#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "teleoracle/indexing.hpp"
#include "teleoracle/mcq.hpp"

namespace teleoracle {

struct RetrievalConfig {
    std::size_t k_first_stage = 150;
    std::size_t k_final = 15;
    std::size_t min_context_tokens = 2600;
    bool include_options_in_query = false;
};

void validate(const RetrievalConfig& cfg);

enum class RerankerKind { reference, remote };

struct RerankerSpec {
    RerankerKind kind = RerankerKind::reference;
    std::string endpoint; // remote only
};

/// Union of bm25_search and vector_search at depth k, deduplicated by chunk
/// id. Order interleaves per-list ranks (vector 1, keyword 1, vector 2, ...);
/// a chunk appearing in both lists stays at its earliest position and keeps
/// that occurrence's source and score.
std::vector<ScoredChunk> hybrid_search(const Bm25Index& bm25, const VectorStore& store,
                                       const std::string& query, std::size_t k);

/// Scores each (query, chunk text) pair in [0,1] and keeps the top k_final,
/// ties broken by ascending chunk id. The reference scorer is the fraction
/// of the query's content tokens present in the chunk; the remote kind POSTs
/// {endpoint}/score with {"query","passages"} and expects {"scores"}.
std::vector<ScoredChunk> rerank(const std::string& query,
                                const std::vector<ScoredChunk>& candidates,
                                const ChunkCatalog& catalog, const RerankerSpec& spec,
                                std::size_t k_final);

/// One retrieved chunk with its final score and, for reranked entries, the
/// first-stage provenance that produced it.
struct ContextEntry {
    Chunk chunk;
    double score = 0.0;
    ScoreSource source = ScoreSource::reranked;
    std::optional<std::pair<ScoreSource, double>> first_stage;
};

struct ContextBundle {
    std::vector<ContextEntry> entries;

    std::size_t total_tokens() const;
    bool empty() const { return entries.empty(); }
};

/// Appends hybrid results from the fixed-size index until the bundle holds
/// at least min_context_tokens, skipping candidates whose sentence range
/// overlaps anything already selected. Exhausting the candidates is not an
/// error; the bundle simply stays short.
void pad_context(ContextBundle& selected, const IndexBundle& fixed_index,
                 const std::string& query, const RetrievalConfig& cfg);

struct PipelineIndexes {
    IndexBundle semantic;
    IndexBundle fixed;
};

/// Full two-stage retrieval for one question: hybrid_search(k_first_stage)
/// over the semantic index (or the fixed index when use_semantic_chunks is
/// off), rerank to k_final (skipped when use_rerank is off, keeping hybrid
/// order), then pad_context from the fixed index. The query is the question
/// stem; options join it only when cfg.include_options_in_query is set.
ContextBundle retrieve(const McqItem& question, const PipelineIndexes& indexes,
                       const RetrievalConfig& cfg, const RerankerSpec& reranker,
                       bool use_semantic_chunks = true, bool use_rerank = true);

std::string retrieval_query(const McqItem& question, const RetrievalConfig& cfg);

} // namespace teleoracle
