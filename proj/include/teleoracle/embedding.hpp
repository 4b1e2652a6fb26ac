#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace teleoracle {

/// Unit-norm float vector. Normalization happens at creation so the vector
/// store can rank by plain dot products.
struct EmbeddingVector {
    std::vector<float> values;

    int dim() const { return static_cast<int>(values.size()); }
};

enum class EmbedderKind { reference, remote };

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::reference;
    int dim = 384;
    std::uint64_t seed = 42;    // reference only
    std::string endpoint;       // remote only

    /// Identifies the embedding space; persisted with every vector store so
    /// a loaded index refuses queries embedded under a different spec.
    std::string fingerprint() const;
};

void validate(const EmbedderSpec& spec);

/// Embeds a batch, preserving order. The reference kind hashes character
/// 3-grams and projects them through a seed-derived random ±1 matrix, then
/// L2-normalizes; the remote kind POSTs {endpoint}/embed with
/// {"texts": [...]} and expects {"vectors": [[...]]}.
std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                   const EmbedderSpec& spec);

/// a·b / (‖a‖‖b‖). Throws on dimension mismatch or a zero vector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

} // namespace teleoracle
