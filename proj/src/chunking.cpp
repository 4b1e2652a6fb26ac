#include "teleoracle/chunking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "teleoracle/errors.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

Chunk make_chunk(const Document& doc, const std::vector<Sentence>& sentences, std::size_t first,
                 std::size_t last, std::size_t ordinal, ChunkStrategy strategy) {
    Chunk c;
    c.id = doc.id + "#" + std::to_string(ordinal);
    c.doc_id = doc.id;
    c.first_sentence = first;
    c.last_sentence = last;
    // Keep the document's own bytes, inter-sentence whitespace included.
    c.text = doc.text.substr(sentences[first].byte_start,
                             sentences[last].byte_end - sentences[first].byte_start);
    c.token_count = count_tokens(c.text);
    c.strategy = strategy;
    return c;
}

void validate(const SemanticChunkConfig& cfg) {
    if (!(cfg.breakpoint_percentile > 0.0 && cfg.breakpoint_percentile < 100.0)) {
        throw Error("breakpoint_percentile must lie in (0, 100)");
    }
    if (cfg.buffer_size < 1) {
        throw Error("buffer_size must be >= 1");
    }
}

} // namespace

double percentile(std::vector<double> values, double p) {
    if (values.empty()) {
        throw Error("percentile of an empty sample");
    }
    std::sort(values.begin(), values.end());
    const double rank = (p / 100.0) * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<Chunk> semantic_chunk(const Document& doc, const SemanticChunkConfig& cfg,
                                  const EmbedderSpec& embedder) {
    validate(cfg);
    const std::vector<Sentence> sentences = split_sentences(doc);
    const std::size_t n = sentences.size();

    if (n <= cfg.buffer_size) {
        return {make_chunk(doc, sentences, 0, n - 1, 0, ChunkStrategy::semantic)};
    }

    const std::size_t n_windows = n - cfg.buffer_size + 1;
    std::vector<std::string> window_texts;
    window_texts.reserve(n_windows);
    for (std::size_t i = 0; i < n_windows; ++i) {
        std::string w = sentences[i].text;
        for (std::size_t j = 1; j < cfg.buffer_size; ++j) {
            w += ' ';
            w += sentences[i + j].text;
        }
        window_texts.push_back(std::move(w));
    }
    const std::vector<EmbeddingVector> vectors = embed(window_texts, embedder);

    std::vector<double> dissimilarity(n_windows - 1);
    for (std::size_t i = 0; i + 1 < n_windows; ++i) {
        dissimilarity[i] = 1.0 - cosine_similarity(vectors[i], vectors[i + 1]);
    }

    const double threshold = percentile(dissimilarity, cfg.breakpoint_percentile);

    // Strict inequality: a constant-dissimilarity document yields one chunk.
    std::vector<std::size_t> break_after;
    for (std::size_t i = 0; i < dissimilarity.size(); ++i) {
        if (dissimilarity[i] > threshold) {
            break_after.push_back(i + cfg.buffer_size - 1);
        }
    }

    std::vector<Chunk> chunks;
    std::size_t first = 0;
    for (std::size_t cut : break_after) {
        chunks.push_back(
            make_chunk(doc, sentences, first, cut, chunks.size(), ChunkStrategy::semantic));
        first = cut + 1;
    }
    chunks.push_back(
        make_chunk(doc, sentences, first, n - 1, chunks.size(), ChunkStrategy::semantic));
    return chunks;
}

std::vector<Chunk> fixed_chunk(const Document& doc, std::size_t chunk_tokens,
                               std::size_t overlap_tokens) {
    if (chunk_tokens <= overlap_tokens) {
        throw Error("fixed_chunk requires chunk_tokens > overlap_tokens");
    }
    const std::vector<Sentence> sentences = split_sentences(doc);
    std::vector<std::size_t> tokens(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        tokens[i] = count_tokens(sentences[i].text);
    }

    const std::size_t n = sentences.size();
    std::vector<Chunk> chunks;
    std::size_t first = 0;      // first sentence of the chunk being packed
    std::size_t i = 0;          // next sentence to place
    std::size_t cur_tokens = 0; // token total of sentences [first, i)
    std::size_t fresh = 0;      // lowest sentence index not yet in any emitted chunk

    while (i < n) {
        // A chunk closes when the next sentence would bust the budget, but
        // only once it holds at least one fresh (non-overlap) sentence —
        // that keeps the packer moving even when the overlap tail alone
        // fills the budget.
        if (i > first && i > fresh && cur_tokens + tokens[i] > chunk_tokens) {
            chunks.push_back(
                make_chunk(doc, sentences, first, i - 1, chunks.size(), ChunkStrategy::fixed));
            fresh = i;

            // Restart with trailing sentences worth >= overlap_tokens,
            // starting strictly after the previous chunk's first sentence.
            std::size_t o = i;
            std::size_t repeated = 0;
            while (o > first + 1 && repeated < overlap_tokens) {
                --o;
                repeated += tokens[o];
            }
            first = o;
            cur_tokens = 0;
            for (std::size_t s = first; s < i; ++s) cur_tokens += tokens[s];
            continue;
        }
        cur_tokens += tokens[i];
        ++i;
    }
    chunks.push_back(make_chunk(doc, sentences, first, n - 1, chunks.size(), ChunkStrategy::fixed));
    return chunks;
}

namespace {

const char* strategy_name(ChunkStrategy s) {
    return s == ChunkStrategy::semantic ? "semantic" : "fixed";
}

ChunkStrategy strategy_from(const std::string& name) {
    if (name == "semantic") return ChunkStrategy::semantic;
    if (name == "fixed") return ChunkStrategy::fixed;
    throw Error("unknown chunk strategy: " + name);
}

} // namespace

void write_chunks(const std::filesystem::path& path, const std::vector<Chunk>& chunks) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("cannot write chunk dump: " + path.string());
        }
        for (const Chunk& c : chunks) {
            json obj;
            obj["id"] = c.id;
            obj["doc_id"] = c.doc_id;
            obj["first"] = c.first_sentence;
            obj["last"] = c.last_sentence;
            obj["text"] = c.text;
            obj["tokens"] = c.token_count;
            obj["strategy"] = strategy_name(c.strategy);
            out << obj.dump() << '\n';
        }
    }
    std::filesystem::rename(tmp, path);
}

std::vector<Chunk> read_chunks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open chunk dump: " + path.string());
    }
    std::vector<Chunk> chunks;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error("chunk dump line " + std::to_string(line_no) + ": " + e.what());
        }
        Chunk c;
        c.id = obj.at("id").get<std::string>();
        c.doc_id = obj.at("doc_id").get<std::string>();
        c.first_sentence = obj.at("first").get<std::size_t>();
        c.last_sentence = obj.at("last").get<std::size_t>();
        c.text = obj.at("text").get<std::string>();
        c.token_count = obj.at("tokens").get<std::size_t>();
        c.strategy = strategy_from(obj.at("strategy").get<std::string>());
        chunks.push_back(std::move(c));
    }
    return chunks;
}

} // namespace teleoracle
