#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "teleoracle/chunking.hpp"
#include "teleoracle/corpus.hpp"
#include "teleoracle/embedding.hpp"
#include "teleoracle/eval.hpp"
#include "teleoracle/indexing.hpp"
#include "teleoracle/lora.hpp"
#include "teleoracle/prompting.hpp"
#include "teleoracle/retrieval.hpp"
#include "teleoracle/selfextend.hpp"

namespace py = pybind11;
using namespace teleoracle;

namespace {

EmbedderSpec make_reference_spec(int dim, std::uint64_t seed) {
    EmbedderSpec spec;
    spec.kind = EmbedderKind::reference;
    spec.dim = dim;
    spec.seed = seed;
    return spec;
}

std::vector<std::vector<float>> py_embed(const std::vector<std::string>& texts, int dim,
                                         std::uint64_t seed) {
    std::vector<std::vector<float>> out;
    for (EmbeddingVector& v : embed(texts, make_reference_spec(dim, seed))) {
        out.push_back(std::move(v.values));
    }
    return out;
}

double py_cosine(const std::vector<float>& a, const std::vector<float>& b) {
    return cosine_similarity(EmbeddingVector{a}, EmbeddingVector{b});
}

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols) {
            throw Error("matrix rows must have equal length");
        }
        for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
}

std::vector<std::vector<double>> from_matrix(const Matrix& m) {
    std::vector<std::vector<double>> rows(m.rows, std::vector<double>(m.cols));
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) rows[i][j] = m.at(i, j);
    }
    return rows;
}

LoraAdapter make_adapter(const std::vector<std::vector<double>>& base,
                         const std::vector<std::vector<double>>& down,
                         const std::vector<std::vector<double>>& up, double alpha) {
    LoraAdapter adapter;
    adapter.base = to_matrix(base);
    adapter.down = to_matrix(down);
    adapter.up = to_matrix(up);
    adapter.rank = adapter.down.cols;
    adapter.alpha = alpha;
    return adapter;
}

} // namespace

PYBIND11_MODULE(_teleoracle, m) {
    m.doc() = "Retrieval-augmented QnA engine: chunking, hybrid retrieval, position "
              "remapping, and adapter math";

    py::register_exception<Error>(m, "TeleOracleError");

    // corpus
    py::class_<Document>(m, "Document")
        .def(py::init([](std::string id, std::string title, std::string source,
                         std::string text) {
                 return Document{std::move(id), std::move(title), std::move(source),
                                 std::move(text)};
             }),
             py::arg("id"), py::arg("title") = "", py::arg("source") = "", py::arg("text") = "")
        .def_readwrite("id", &Document::id)
        .def_readwrite("title", &Document::title)
        .def_readwrite("source", &Document::source)
        .def_readwrite("text", &Document::text);

    py::class_<Sentence>(m, "Sentence")
        .def_readonly("doc_id", &Sentence::doc_id)
        .def_readonly("index", &Sentence::index)
        .def_readonly("byte_start", &Sentence::byte_start)
        .def_readonly("byte_end", &Sentence::byte_end)
        .def_readonly("text", &Sentence::text);

    m.def("load_corpus", &load_corpus, py::arg("path"));
    m.def("split_sentences", &split_sentences, py::arg("doc"));
    m.def("tokenize", [](const std::string& s) { return tokenize(s); }, py::arg("text"));
    m.def("count_tokens", [](const std::string& s) { return count_tokens(s); }, py::arg("text"));

    // embedding
    m.def("embed", &py_embed, py::arg("texts"), py::arg("dim") = 384, py::arg("seed") = 42,
          "Reference 3-gram projection embedding, L2-normalized");
    m.def("cosine_similarity", &py_cosine, py::arg("a"), py::arg("b"));

    // chunking
    py::class_<Chunk>(m, "Chunk")
        .def_readonly("id", &Chunk::id)
        .def_readonly("doc_id", &Chunk::doc_id)
        .def_readonly("first_sentence", &Chunk::first_sentence)
        .def_readonly("last_sentence", &Chunk::last_sentence)
        .def_readonly("text", &Chunk::text)
        .def_readonly("token_count", &Chunk::token_count)
        .def_property_readonly("strategy", [](const Chunk& c) {
            return c.strategy == ChunkStrategy::semantic ? "semantic" : "fixed";
        });

    m.def(
        "semantic_chunk",
        [](const Document& doc, double breakpoint_percentile, std::size_t buffer_size, int dim,
           std::uint64_t seed) {
            SemanticChunkConfig cfg{breakpoint_percentile, buffer_size};
            return semantic_chunk(doc, cfg, make_reference_spec(dim, seed));
        },
        py::arg("doc"), py::arg("breakpoint_percentile") = 90.0, py::arg("buffer_size") = 3,
        py::arg("dim") = 384, py::arg("seed") = 42);
    m.def("fixed_chunk", &fixed_chunk, py::arg("doc"), py::arg("chunk_tokens"),
          py::arg("overlap_tokens") = 0);

    // indexing + retrieval
    py::class_<ScoredChunk>(m, "ScoredChunk")
        .def_readonly("chunk_id", &ScoredChunk::chunk_id)
        .def_readonly("score", &ScoredChunk::score)
        .def_property_readonly("source",
                               [](const ScoredChunk& s) { return to_string(s.source); });

    py::class_<Bm25Index>(m, "Bm25Index")
        .def_property_readonly("doc_count", [](const Bm25Index& i) { return i.doc_count; })
        .def_property_readonly("avg_doc_len", [](const Bm25Index& i) { return i.avg_doc_len; });
    py::class_<VectorStore>(m, "VectorStore")
        .def_property_readonly("size", [](const VectorStore& s) { return s.size(); });

    m.def("bm25_build", &bm25_build, py::arg("chunks"), py::arg("k1") = 1.5, py::arg("b") = 0.75);
    m.def("bm25_score", &bm25_score, py::arg("index"), py::arg("query_terms"),
          py::arg("chunk_id"));
    m.def("bm25_search", &bm25_search, py::arg("index"), py::arg("query"), py::arg("top_k"));
    m.def(
        "vector_build",
        [](const std::vector<Chunk>& chunks, int dim, std::uint64_t seed) {
            return vector_build(chunks, make_reference_spec(dim, seed));
        },
        py::arg("chunks"), py::arg("dim") = 384, py::arg("seed") = 42);
    m.def("vector_search", &vector_search, py::arg("store"), py::arg("query"), py::arg("top_k"));
    m.def("hybrid_search", &hybrid_search, py::arg("bm25"), py::arg("store"), py::arg("query"),
          py::arg("k"));
    m.def(
        "rerank",
        [](const std::string& query, const std::vector<ScoredChunk>& candidates,
           const std::vector<Chunk>& chunks, std::size_t k_final) {
            const ChunkCatalog catalog(chunks);
            return rerank(query, candidates, catalog, RerankerSpec{}, k_final);
        },
        py::arg("query"), py::arg("candidates"), py::arg("chunks"), py::arg("k_final"),
        "Reference lexical-overlap reranker");

    // selfextend
    py::class_<SelfExtendConfig>(m, "SelfExtendConfig")
        .def(py::init([](std::size_t L, std::size_t w_n, std::size_t G_s) {
                 return SelfExtendConfig{L, w_n, G_s};
             }),
             py::arg("L"), py::arg("w_n"), py::arg("G_s"))
        .def_readwrite("L", &SelfExtendConfig::trained_window)
        .def_readwrite("w_n", &SelfExtendConfig::neighbor_window)
        .def_readwrite("G_s", &SelfExtendConfig::group_size);

    m.def("capacity", &capacity, py::arg("config"));
    m.def(
        "build_position_matrix",
        [](std::size_t seq_len, const SelfExtendConfig& cfg) {
            return build_position_matrix(seq_len, cfg).rel;
        },
        py::arg("seq_len"), py::arg("config"));
    m.def(
        "detect_ood",
        [](std::size_t seq_len, const SelfExtendConfig& cfg) {
            return detect_ood(build_position_matrix(seq_len, cfg), cfg.trained_window);
        },
        py::arg("seq_len"), py::arg("config"));
    m.def("attention_weights_demo", &attention_weights_demo, py::arg("seq_len"),
          py::arg("config"), py::arg("seed") = 0);

    // lora
    m.def("trainable_params", &trainable_params, py::arg("d"), py::arg("k"), py::arg("r"));
    m.def(
        "lora_apply",
        [](const std::vector<std::vector<double>>& base,
           const std::vector<std::vector<double>>& down,
           const std::vector<std::vector<double>>& up, double alpha,
           const std::vector<double>& x) {
            return apply(make_adapter(base, down, up, alpha), x);
        },
        py::arg("base"), py::arg("down"), py::arg("up"), py::arg("alpha"), py::arg("x"));
    m.def(
        "lora_merge",
        [](const std::vector<std::vector<double>>& base,
           const std::vector<std::vector<double>>& down,
           const std::vector<std::vector<double>>& up, double alpha) {
            return from_matrix(merge(make_adapter(base, down, up, alpha)));
        },
        py::arg("base"), py::arg("down"), py::arg("up"), py::arg("alpha"));
    m.def(
        "accumulate_gradients",
        [](const std::vector<std::vector<std::vector<double>>>& grads,
           const std::vector<std::size_t>& sizes) {
            std::vector<Matrix> ms;
            ms.reserve(grads.size());
            for (const auto& g : grads) ms.push_back(to_matrix(g));
            return from_matrix(accumulate_gradients(ms, sizes));
        },
        py::arg("gradients"), py::arg("batch_sizes"));
    m.def(
        "quantize4_roundtrip",
        [](const std::vector<std::vector<double>>& rows) {
            return from_matrix(dequantize(quantize4(to_matrix(rows))));
        },
        py::arg("matrix"), "Blockwise absmax 4-bit quantize then dequantize");

    // prompting + eval helpers
    m.def("extract_answer", &extract_answer, py::arg("output"), py::arg("n_options"));
    m.def("faithfulness_proxy", &faithfulness_proxy, py::arg("answer_text"),
          py::arg("contexts"));

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
    m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
    m.attr("__version__") = "dev";
#endif
}
