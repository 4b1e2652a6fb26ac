#include "teleoracle/embedding.hpp"

#include <cmath>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "teleoracle/errors.hpp"
#include "teleoracle/text.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

// Character 3-grams; texts shorter than 3 bytes contribute themselves as a
// single gram so every non-empty text gets a nonzero vector.
std::unordered_map<std::uint64_t, long> gram_counts(const std::string& text) {
    std::unordered_map<std::uint64_t, long> counts;
    if (text.size() < 3) {
        ++counts[fnv1a64(text)];
        return counts;
    }
    for (std::size_t i = 0; i + 3 <= text.size(); ++i) {
        ++counts[fnv1a64(std::string_view(text).substr(i, 3))];
    }
    return counts;
}

EmbeddingVector reference_embed(const std::string& text, int dim, std::uint64_t seed) {
    const auto counts = gram_counts(text);
    const std::uint64_t salt = splitmix64(seed);

    // Signed counts are integers, so the accumulation below is exact and the
    // result does not depend on hash-map iteration order.
    std::vector<double> acc(static_cast<std::size_t>(dim), 0.0);
    for (const auto& [gram_hash, count] : counts) {
        for (int j = 0; j < dim; ++j) {
            std::uint64_t mixed =
                splitmix64(gram_hash ^ salt ^ (static_cast<std::uint64_t>(j) * 0x9e3779b97f4a7c15ULL));
            acc[static_cast<std::size_t>(j)] += (mixed & 1) ? count : -count;
        }
    }

    double norm_sq = 0.0;
    for (double v : acc) norm_sq += v * v;
    if (norm_sq == 0.0) {
        // All signed gram sums cancelled; fall back to a deterministic unit
        // vector so the non-empty-text invariant holds.
        acc[salt % static_cast<std::uint64_t>(dim)] = 1.0;
        norm_sq = 1.0;
    }
    const double norm = std::sqrt(norm_sq);

    EmbeddingVector out;
    out.values.reserve(static_cast<std::size_t>(dim));
    for (double v : acc) out.values.push_back(static_cast<float>(v / norm));
    return out;
}

struct EndpointParts {
    std::string base; // scheme://host:port
    std::string path_prefix;
};

EndpointParts split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError(endpoint, "endpoint must include a scheme, e.g. http://host:port");
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {endpoint, ""};
    }
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path_start), prefix};
}

std::vector<EmbeddingVector> remote_embed(const std::vector<std::string>& texts,
                                          const EmbedderSpec& spec) {
    const auto parts = split_endpoint(spec.endpoint);
    httplib::Client client(parts.base);

    json request;
    request["texts"] = texts;
    auto res = client.Post(parts.path_prefix + "/embed", request.dump(), "application/json");
    if (!res) {
        throw TransportError(spec.endpoint, httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError(spec.endpoint, "HTTP " + std::to_string(res->status));
    }

    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw TransportError(spec.endpoint, std::string("malformed reply: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("vectors") || !reply["vectors"].is_array()) {
        throw TransportError(spec.endpoint, "malformed reply: missing \"vectors\" array");
    }
    const json& rows = reply["vectors"];
    if (rows.size() != texts.size()) {
        throw TransportError(spec.endpoint,
                             "malformed reply: expected " + std::to_string(texts.size()) +
                                 " vectors, got " + std::to_string(rows.size()));
    }

    std::vector<EmbeddingVector> out;
    out.reserve(rows.size());
    for (const json& row : rows) {
        if (!row.is_array()) {
            throw TransportError(spec.endpoint, "malformed reply: vector rows must be arrays");
        }
        EmbeddingVector v;
        v.values.reserve(row.size());
        for (const json& x : row) {
            if (!x.is_number()) {
                throw TransportError(spec.endpoint, "malformed reply: non-numeric vector entry");
            }
            v.values.push_back(x.get<float>());
        }
        if (v.dim() != spec.dim) {
            throw Error("remote embedder returned dim " + std::to_string(v.dim()) +
                        ", expected " + std::to_string(spec.dim));
        }
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace

std::string EmbedderSpec::fingerprint() const {
    switch (kind) {
    case EmbedderKind::reference:
        return "reference:dim=" + std::to_string(dim) + ":seed=" + std::to_string(seed);
    case EmbedderKind::remote:
        return "remote:dim=" + std::to_string(dim) + ":endpoint=" + endpoint;
    }
    return "invalid";
}

void validate(const EmbedderSpec& spec) {
    if (spec.dim < 8) {
        throw Error("embedder dim must be >= 8, got " + std::to_string(spec.dim));
    }
    if (spec.kind == EmbedderKind::remote && spec.endpoint.empty()) {
        throw Error("remote embedder requires an endpoint");
    }
}

std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                   const EmbedderSpec& spec) {
    validate(spec);
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (texts[i].empty()) {
            throw Error("embed: empty text at position " + std::to_string(i));
        }
    }

    if (spec.kind == EmbedderKind::remote) {
        return remote_embed(texts, spec);
    }

    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const std::string& text : texts) {
        out.push_back(reference_embed(text, spec.dim, spec.seed));
    }
    return out;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error("cosine_similarity: dim mismatch (" + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()) + ")");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        dot += static_cast<double>(a.values[i]) * b.values[i];
        na += static_cast<double>(a.values[i]) * a.values[i];
        nb += static_cast<double>(b.values[i]) * b.values[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw Error("cosine_similarity: zero vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace teleoracle
