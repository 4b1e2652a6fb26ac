#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "teleoracle/corpus.hpp"
#include "teleoracle/embedding.hpp"

namespace teleoracle {

enum class ChunkStrategy { semantic, fixed };

/// The retrieval atom: a run of consecutive sentences from one document.
struct Chunk {
    std::string id;             // "{doc_id}#{ordinal}"
    std::string doc_id;
    std::size_t first_sentence = 0;
    std::size_t last_sentence = 0; // inclusive
    std::string text;
    std::size_t token_count = 0;
    ChunkStrategy strategy = ChunkStrategy::semantic;

    bool overlaps(const Chunk& other) const {
        return doc_id == other.doc_id && first_sentence <= other.last_sentence &&
               other.first_sentence <= last_sentence;
    }
};

struct SemanticChunkConfig {
    double breakpoint_percentile = 90.0; // in (0, 100)
    std::size_t buffer_size = 3;
};

/// Splits at embedding-dissimilarity breakpoints: windows of buffer_size
/// consecutive sentences are embedded, d_i = 1 - cos(window_i, window_{i+1}),
/// and a breakpoint lands after sentence i+buffer_size-1 wherever d_i
/// strictly exceeds the breakpoint_percentile-th percentile (linear
/// interpolation) of all d_i in the document. Documents with fewer sentences
/// than buffer_size come back as a single chunk.
std::vector<Chunk> semantic_chunk(const Document& doc, const SemanticChunkConfig& cfg,
                                  const EmbedderSpec& embedder);

/// Greedy sentence packing up to chunk_tokens, restarting each chunk with
/// trailing sentences worth >= overlap_tokens. Sentences are never split; a
/// single sentence over budget becomes its own chunk.
std::vector<Chunk> fixed_chunk(const Document& doc, std::size_t chunk_tokens,
                               std::size_t overlap_tokens);

/// Linear-interpolation percentile over an unsorted sample, p in (0, 100).
double percentile(std::vector<double> values, double p);

// Chunk dump JSONL: {"id","doc_id","first","last","text","tokens","strategy"}.
void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks);
std::vector<Chunk> read_chunks(const std::filesystem::path& path);

} // namespace teleoracle
