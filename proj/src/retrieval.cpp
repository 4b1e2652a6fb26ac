#include "teleoracle/retrieval.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

#include "teleoracle/errors.hpp"
#include "teleoracle/text.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError(endpoint, "endpoint must include a scheme, e.g. http://host:port");
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path_start), prefix};
}

double reference_rerank_score(const std::unordered_set<std::string>& query_tokens,
                              const std::string& chunk_text) {
    if (query_tokens.empty()) return 0.0;
    const std::unordered_set<std::string> chunk_tokens = content_token_set(chunk_text);
    std::size_t shared = 0;
    for (const std::string& t : query_tokens) {
        if (chunk_tokens.count(t)) ++shared;
    }
    const double score = static_cast<double>(shared) / static_cast<double>(query_tokens.size());
    return std::clamp(score, 0.0, 1.0);
}

std::vector<double> remote_rerank_scores(const std::string& query,
                                         const std::vector<std::string>& passages,
                                         const RerankerSpec& spec) {
    const auto [base, prefix] = split_endpoint(spec.endpoint);
    httplib::Client client(base);

    json request;
    request["query"] = query;
    request["passages"] = passages;
    auto res = client.Post(prefix + "/score", request.dump(), "application/json");
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
    if (!reply.is_object() || !reply.contains("scores") || !reply["scores"].is_array()) {
        throw TransportError(spec.endpoint, "malformed reply: missing \"scores\" array");
    }
    const json& rows = reply["scores"];
    if (rows.size() != passages.size()) {
        throw TransportError(spec.endpoint, "malformed reply: expected " +
                                                std::to_string(passages.size()) + " scores, got " +
                                                std::to_string(rows.size()));
    }
    std::vector<double> scores;
    scores.reserve(rows.size());
    for (const json& x : rows) {
        if (!x.is_number()) {
            throw TransportError(spec.endpoint, "malformed reply: non-numeric score");
        }
        const double s = x.get<double>();
        if (s < 0.0 || s > 1.0) {
            throw TransportError(spec.endpoint, "malformed reply: score outside [0, 1]");
        }
        scores.push_back(s);
    }
    return scores;
}

} // namespace

void validate(const RetrievalConfig& cfg) {
    if (cfg.k_first_stage < 1 || cfg.k_final < 1) {
        throw Error("retrieval k values must be >= 1");
    }
    if (cfg.k_final > cfg.k_first_stage) {
        throw Error("k_final must not exceed k_first_stage");
    }
}

std::vector<ScoredChunk> hybrid_search(const Bm25Index& bm25, const VectorStore& store,
                                       const std::string& query, std::size_t k) {
    if (k < 1) {
        throw Error("hybrid_search: k must be >= 1");
    }
    const std::vector<ScoredChunk> keyword =
        bm25.empty() ? std::vector<ScoredChunk>{} : bm25_search(bm25, query, k);
    const std::vector<ScoredChunk> vector =
        store.empty() ? std::vector<ScoredChunk>{} : vector_search(store, query, k);

    // Interleave per-list ranks, vector first; a chunk in both lists stays
    // at its earliest slot with that slot's score.
    std::vector<ScoredChunk> merged;
    merged.reserve(keyword.size() + vector.size());
    std::unordered_set<std::string> seen;
    const std::size_t depth = std::max(keyword.size(), vector.size());
    for (std::size_t rank = 0; rank < depth; ++rank) {
        if (rank < vector.size() && seen.insert(vector[rank].chunk_id).second) {
            merged.push_back(vector[rank]);
        }
        if (rank < keyword.size() && seen.insert(keyword[rank].chunk_id).second) {
            merged.push_back(keyword[rank]);
        }
    }
    return merged;
}

std::vector<ScoredChunk> rerank(const std::string& query,
                                const std::vector<ScoredChunk>& candidates,
                                const ChunkCatalog& catalog, const RerankerSpec& spec,
                                std::size_t k_final) {
    if (candidates.empty()) {
        throw Error("rerank: empty candidate list");
    }

    std::vector<ScoredChunk> scored;
    scored.reserve(candidates.size());

    if (spec.kind == RerankerKind::reference) {
        const std::unordered_set<std::string> query_tokens = content_token_set(query);
        for (const ScoredChunk& c : candidates) {
            scored.push_back({c.chunk_id,
                              reference_rerank_score(query_tokens, catalog.at(c.chunk_id).text),
                              ScoreSource::reranked});
        }
    } else {
        std::vector<std::string> passages;
        passages.reserve(candidates.size());
        for (const ScoredChunk& c : candidates) {
            passages.push_back(catalog.at(c.chunk_id).text);
        }
        const std::vector<double> scores = remote_rerank_scores(query, passages, spec);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            scored.push_back({candidates[i].chunk_id, scores[i], ScoreSource::reranked});
        }
    }

    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
    if (scored.size() > k_final) scored.resize(k_final);
    return scored;
}

std::size_t ContextBundle::total_tokens() const {
    std::size_t total = 0;
    for (const ContextEntry& e : entries) total += e.chunk.token_count;
    return total;
}

void pad_context(ContextBundle& selected, const IndexBundle& fixed_index,
                 const std::string& query, const RetrievalConfig& cfg) {
    if (selected.total_tokens() >= cfg.min_context_tokens || fixed_index.empty()) {
        return;
    }
    const ChunkCatalog catalog(fixed_index.chunks);

    // Fetch the whole fixed-size ranking so exhaustion really means the
    // corpus ran out, not the candidate list.
    const std::vector<ScoredChunk> candidates =
        hybrid_search(fixed_index.bm25, fixed_index.vectors, query, fixed_index.chunks.size());

    std::size_t total = selected.total_tokens();
    for (const ScoredChunk& cand : candidates) {
        if (total >= cfg.min_context_tokens) break;
        const Chunk& chunk = catalog.at(cand.chunk_id);
        bool overlaps = false;
        for (const ContextEntry& e : selected.entries) {
            if (chunk.overlaps(e.chunk)) {
                overlaps = true;
                break;
            }
        }
        if (overlaps) continue;
        selected.entries.push_back({chunk, cand.score, cand.source, std::nullopt});
        total += chunk.token_count;
    }
}

std::string retrieval_query(const McqItem& question, const RetrievalConfig& cfg) {
    if (!cfg.include_options_in_query) {
        return question.question;
    }
    std::string q = question.question;
    for (const std::string& opt : question.options) {
        q += ' ';
        q += opt;
    }
    return q;
}

ContextBundle retrieve(const McqItem& question, const PipelineIndexes& indexes,
                       const RetrievalConfig& cfg, const RerankerSpec& reranker,
                       bool use_semantic_chunks, bool use_rerank) {
    validate(cfg);
    const IndexBundle& first_stage = use_semantic_chunks ? indexes.semantic : indexes.fixed;
    const std::string query = retrieval_query(question, cfg);

    ContextBundle bundle;
    if (!first_stage.empty()) {
        const ChunkCatalog catalog(first_stage.chunks);
        const std::vector<ScoredChunk> hybrid =
            hybrid_search(first_stage.bm25, first_stage.vectors, query, cfg.k_first_stage);

        std::vector<ScoredChunk> kept;
        if (hybrid.empty()) {
            // nothing matched; bundle stays empty apart from padding
        } else if (use_rerank) {
            kept = rerank(query, hybrid, catalog, reranker, cfg.k_final);
        } else {
            kept.assign(hybrid.begin(),
                        hybrid.begin() + std::min<std::size_t>(cfg.k_final, hybrid.size()));
        }

        std::unordered_map<std::string, const ScoredChunk*> first_stage_by_id;
        for (const ScoredChunk& c : hybrid) first_stage_by_id[c.chunk_id] = &c;
        for (const ScoredChunk& c : kept) {
            ContextEntry entry{catalog.at(c.chunk_id), c.score, c.source, std::nullopt};
            if (c.source == ScoreSource::reranked) {
                const ScoredChunk* origin = first_stage_by_id.at(c.chunk_id);
                entry.first_stage = std::make_pair(origin->source, origin->score);
            }
            bundle.entries.push_back(std::move(entry));
        }
    }

    pad_context(bundle, indexes.fixed, query, cfg);
    return bundle;
}

} // namespace teleoracle
