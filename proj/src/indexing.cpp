#include "teleoracle/indexing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "teleoracle/errors.hpp"
#include "teleoracle/text.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

constexpr int kIndexFormatVersion = 1;

std::vector<std::string> lowercased_tokens(const std::string& text) {
    std::vector<std::string> tokens = tokenize(text);
    for (std::string& t : tokens) t = ascii_lower_copy(t);
    return tokens;
}

void sort_ranked(std::vector<ScoredChunk>& scored) {
    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.chunk_id < b.chunk_id;
    });
}

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write " + path.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

std::string checksum(const std::string& bytes) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

// Little-endian f32 serialization, independent of host byte order.
void append_f32_le(std::string& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    out.push_back(static_cast<char>(bits & 0xff));
    out.push_back(static_cast<char>((bits >> 8) & 0xff));
    out.push_back(static_cast<char>((bits >> 16) & 0xff));
    out.push_back(static_cast<char>((bits >> 24) & 0xff));
}

float read_f32_le(const std::string& bytes, std::size_t offset) {
    std::uint32_t bits = static_cast<std::uint8_t>(bytes[offset]) |
                         (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[offset + 1])) << 8) |
                         (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[offset + 2])) << 16) |
                         (static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[offset + 3])) << 24);
    float v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

json embedder_to_json(const EmbedderSpec& spec) {
    json obj;
    obj["kind"] = spec.kind == EmbedderKind::reference ? "reference" : "remote";
    obj["dim"] = spec.dim;
    obj["seed"] = spec.seed;
    obj["endpoint"] = spec.endpoint;
    obj["fingerprint"] = spec.fingerprint();
    return obj;
}

EmbedderSpec embedder_from_json(const json& obj) {
    EmbedderSpec spec;
    const std::string kind = obj.at("kind").get<std::string>();
    if (kind == "reference") {
        spec.kind = EmbedderKind::reference;
    } else if (kind == "remote") {
        spec.kind = EmbedderKind::remote;
    } else {
        throw Error("manifest: unknown embedder kind " + kind);
    }
    spec.dim = obj.at("dim").get<int>();
    spec.seed = obj.at("seed").get<std::uint64_t>();
    spec.endpoint = obj.at("endpoint").get<std::string>();
    return spec;
}

} // namespace

Bm25Index bm25_build(const std::vector<Chunk>& chunks, double k1, double b) {
    if (chunks.empty()) {
        throw Error("bm25_build: empty chunk list");
    }
    if (!(k1 > 0.0)) {
        throw Error("bm25_build: k1 must be > 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw Error("bm25_build: b must lie in [0, 1]");
    }

    Bm25Index idx;
    idx.k1 = k1;
    idx.b = b;
    idx.doc_count = chunks.size();

    std::size_t total_len = 0;
    for (const Chunk& chunk : chunks) {
        if (idx.doc_len.count(chunk.id)) {
            throw Error("bm25_build: duplicate chunk id " + chunk.id);
        }
        const std::vector<std::string> tokens = lowercased_tokens(chunk.text);
        idx.doc_len[chunk.id] = tokens.size();
        total_len += tokens.size();

        std::map<std::string, std::size_t> tf;
        for (const std::string& t : tokens) ++tf[t];
        for (const auto& [term, freq] : tf) {
            idx.postings[term].push_back({chunk.id, freq});
            ++idx.doc_freq[term];
        }
    }
    idx.avg_doc_len = static_cast<double>(total_len) / static_cast<double>(idx.doc_count);
    return idx;
}

namespace {

double idf(const Bm25Index& idx, const std::string& term) {
    const auto it = idx.doc_freq.find(term);
    const double nq = it == idx.doc_freq.end() ? 0.0 : static_cast<double>(it->second);
    const double n = static_cast<double>(idx.doc_count);
    // The +1 inside the log keeps this strictly positive for any 0 <= N(q) <= N.
    return std::log((n - nq + 0.5) / (nq + 0.5) + 1.0);
}

double term_score(const Bm25Index& idx, const std::string& term, double tf, double dl) {
    const double saturation =
        (tf * (idx.k1 + 1.0)) / (tf + idx.k1 * (1.0 - idx.b + idx.b * dl / idx.avg_doc_len));
    return saturation * idf(idx, term);
}

} // namespace

double bm25_score(const Bm25Index& idx, const std::vector<std::string>& query_terms,
                  const std::string& chunk_id) {
    const auto len_it = idx.doc_len.find(chunk_id);
    if (len_it == idx.doc_len.end()) {
        throw Error("bm25_score: unknown chunk id " + chunk_id);
    }
    const double dl = static_cast<double>(len_it->second);

    double score = 0.0;
    for (const std::string& term : query_terms) {
        const auto post_it = idx.postings.find(term);
        if (post_it == idx.postings.end()) continue;
        double tf = 0.0;
        for (const Posting& p : post_it->second) {
            if (p.chunk_id == chunk_id) {
                tf = static_cast<double>(p.term_frequency);
                break;
            }
        }
        if (tf == 0.0) continue;
        score += term_score(idx, term, tf, dl);
    }
    return score;
}

std::vector<ScoredChunk> bm25_search(const Bm25Index& idx, const std::string& query,
                                     std::size_t top_k) {
    if (top_k < 1) {
        throw Error("bm25_search: top_k must be >= 1");
    }
    if (idx.empty()) return {};

    const std::vector<std::string> terms = lowercased_tokens(query);

    // Sparse accumulation; term order matches the naive per-chunk sum so the
    // floating-point result is identical to scoring each chunk directly.
    std::unordered_map<std::string, double> acc;
    for (const std::string& term : terms) {
        const auto post_it = idx.postings.find(term);
        if (post_it == idx.postings.end()) continue;
        for (const Posting& p : post_it->second) {
            const double dl = static_cast<double>(idx.doc_len.at(p.chunk_id));
            acc[p.chunk_id] += term_score(idx, term, static_cast<double>(p.term_frequency), dl);
        }
    }

    std::vector<ScoredChunk> scored;
    scored.reserve(acc.size());
    for (const auto& [chunk_id, score] : acc) {
        if (score > 0.0) {
            scored.push_back({chunk_id, score, ScoreSource::keyword});
        }
    }
    sort_ranked(scored);
    if (scored.size() > top_k) scored.resize(top_k);
    return scored;
}

VectorStore vector_build(const std::vector<Chunk>& chunks, const EmbedderSpec& embedder) {
    validate(embedder);
    VectorStore store;
    store.embedder = embedder;
    if (chunks.empty()) return store;

    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    std::unordered_set<std::string> seen;
    for (const Chunk& chunk : chunks) {
        if (!seen.insert(chunk.id).second) {
            throw Error("vector_build: duplicate chunk id " + chunk.id);
        }
        store.chunk_ids.push_back(chunk.id);
        texts.push_back(chunk.text);
    }
    store.vectors = embed(texts, embedder);
    return store;
}

std::vector<ScoredChunk> vector_search(const VectorStore& store, const std::string& query,
                                       std::size_t top_k) {
    if (top_k < 1) {
        throw Error("vector_search: top_k must be >= 1");
    }
    if (store.empty()) return {};

    const EmbeddingVector q = embed({query}, store.embedder).front();
    std::vector<ScoredChunk> scored;
    scored.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
        scored.push_back({store.chunk_ids[i], cosine_similarity(q, store.vectors[i]),
                          ScoreSource::vector});
    }
    sort_ranked(scored);
    if (scored.size() > top_k) scored.resize(top_k);
    return scored;
}

IndexBundle build_index_bundle(const std::vector<Chunk>& chunks, const EmbedderSpec& embedder,
                               double k1, double b) {
    IndexBundle bundle;
    bundle.bm25 = bm25_build(chunks, k1, b);
    bundle.vectors = vector_build(chunks, embedder);
    bundle.chunks = chunks;
    return bundle;
}

void persist(const IndexBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string vectors_bin;
    vectors_bin.reserve(bundle.vectors.size() * static_cast<std::size_t>(bundle.vectors.embedder.dim) * 4);
    for (const EmbeddingVector& v : bundle.vectors.vectors) {
        for (float x : v.values) append_f32_le(vectors_bin, x);
    }

    std::string postings_jsonl;
    for (const auto& [term, postings] : bundle.bm25.postings) {
        json line;
        line["t"] = term;
        json plist = json::array();
        for (const Posting& p : postings) {
            plist.push_back({p.chunk_id, p.term_frequency});
        }
        line["p"] = plist;
        postings_jsonl += line.dump();
        postings_jsonl += '\n';
    }

    std::string chunks_jsonl;
    {
        const std::filesystem::path tmp_chunks = dir / "chunks.jsonl";
        write_chunks(tmp_chunks, bundle.chunks);
        chunks_jsonl = read_file_bytes(tmp_chunks);
    }

    json manifest;
    manifest["version"] = kIndexFormatVersion;
    manifest["dim"] = bundle.vectors.embedder.dim;
    manifest["counts"] = {{"chunks", bundle.chunks.size()},
                          {"terms", bundle.bm25.postings.size()}};
    manifest["embedder"] = embedder_to_json(bundle.vectors.embedder);
    manifest["k1"] = bundle.bm25.k1;
    manifest["b"] = bundle.bm25.b;
    json order = json::array();
    for (const std::string& id : bundle.vectors.chunk_ids) order.push_back(id);
    manifest["chunk_order"] = order;
    manifest["checksums"] = {{"vectors.bin", checksum(vectors_bin)},
                             {"postings.jsonl", checksum(postings_jsonl)},
                             {"chunks.jsonl", checksum(chunks_jsonl)}};

    write_file_atomic(dir / "vectors.bin", vectors_bin);
    write_file_atomic(dir / "postings.jsonl", postings_jsonl);
    write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

IndexBundle load(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / "manifest.json";
    if (!std::filesystem::exists(manifest_path)) {
        throw Error("missing manifest: " + manifest_path.string());
    }

    json manifest;
    try {
        manifest = json::parse(read_file_bytes(manifest_path));
    } catch (const json::parse_error& e) {
        throw Error("manifest " + manifest_path.string() + ": " + e.what());
    }
    const int version = manifest.at("version").get<int>();
    if (version != kIndexFormatVersion) {
        throw Error("unsupported index version " + std::to_string(version) + " (expected " +
                    std::to_string(kIndexFormatVersion) + ")");
    }

    const auto verify = [&](const char* name, const std::string& bytes) {
        const std::string expected = manifest.at("checksums").at(name).get<std::string>();
        if (checksum(bytes) != expected) {
            throw Error("checksum failure for " + (dir / name).string());
        }
        return bytes;
    };

    const std::string vectors_bin = verify("vectors.bin", read_file_bytes(dir / "vectors.bin"));
    const std::string postings_jsonl =
        verify("postings.jsonl", read_file_bytes(dir / "postings.jsonl"));
    const std::string chunks_jsonl = verify("chunks.jsonl", read_file_bytes(dir / "chunks.jsonl"));
    (void)chunks_jsonl;

    IndexBundle bundle;
    bundle.chunks = read_chunks(dir / "chunks.jsonl");

    // BM25 side: postings come from disk, statistics are recomputed from the
    // chunk catalog (same tokenizer, so they agree with build time).
    bundle.bm25.k1 = manifest.at("k1").get<double>();
    bundle.bm25.b = manifest.at("b").get<double>();
    bundle.bm25.doc_count = bundle.chunks.size();
    std::size_t total_len = 0;
    for (const Chunk& chunk : bundle.chunks) {
        const std::size_t len = lowercased_tokens(chunk.text).size();
        bundle.bm25.doc_len[chunk.id] = len;
        total_len += len;
    }
    bundle.bm25.avg_doc_len =
        bundle.chunks.empty() ? 0.0
                              : static_cast<double>(total_len) / static_cast<double>(bundle.chunks.size());

    std::istringstream postings_in(postings_jsonl);
    std::string line;
    while (std::getline(postings_in, line)) {
        if (line.empty()) continue;
        const json obj = json::parse(line);
        const std::string term = obj.at("t").get<std::string>();
        std::vector<Posting> plist;
        for (const json& p : obj.at("p")) {
            plist.push_back({p.at(0).get<std::string>(), p.at(1).get<std::size_t>()});
        }
        bundle.bm25.doc_freq[term] = plist.size();
        bundle.bm25.postings[term] = std::move(plist);
    }

    // Vector side.
    bundle.vectors.embedder = embedder_from_json(manifest.at("embedder"));
    const auto dim = static_cast<std::size_t>(manifest.at("dim").get<int>());
    const json& order = manifest.at("chunk_order");
    if (vectors_bin.size() != order.size() * dim * 4) {
        throw Error("vectors.bin has unexpected size in " + dir.string());
    }
    std::size_t offset = 0;
    for (const json& id : order) {
        EmbeddingVector v;
        v.values.reserve(dim);
        for (std::size_t j = 0; j < dim; ++j, offset += 4) {
            v.values.push_back(read_f32_le(vectors_bin, offset));
        }
        bundle.vectors.chunk_ids.push_back(id.get<std::string>());
        bundle.vectors.vectors.push_back(std::move(v));
    }
    return bundle;
}

ChunkCatalog::ChunkCatalog(const std::vector<Chunk>& chunks) {
    by_id_.reserve(chunks.size());
    for (const Chunk& chunk : chunks) {
        by_id_[chunk.id] = &chunk;
    }
}

const Chunk& ChunkCatalog::at(const std::string& id) const {
    const auto it = by_id_.find(id);
    if (it == by_id_.end()) {
        throw Error("unknown chunk id: " + id);
    }
    return *it->second;
}

} // namespace teleoracle
