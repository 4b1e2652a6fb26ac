#pragma once

#include <filesystem>
#include <string>

#include "teleoracle/chunking.hpp"
#include "teleoracle/embedding.hpp"
#include "teleoracle/eval.hpp"
#include "teleoracle/prompting.hpp"
#include "teleoracle/retrieval.hpp"
#include "teleoracle/selfextend.hpp"

namespace teleoracle {

struct ChunkingConfig {
    SemanticChunkConfig semantic;
    std::size_t fixed_chunk_tokens = 200;
    std::size_t fixed_overlap_tokens = 20;
};

struct Bm25Params {
    double k1 = 1.5;
    double b = 0.75;
};

/// Everything the CLI needs, loaded from one JSON document. Unknown keys
/// anywhere in the document are rejected.
struct AppConfig {
    std::filesystem::path corpus_path;
    std::filesystem::path index_dir = "index";
    ChunkingConfig chunking;
    RetrievalConfig retrieval;
    Bm25Params bm25;
    EmbedderSpec embedder;
    RerankerSpec reranker;
    GeneratorSpec generator;
    SelfExtendConfig selfextend;
    AblationFlags flags;
    std::string instruction_text; // empty -> PromptTemplate::standard()
};

AppConfig parse_app_config(const std::string& json_text);
AppConfig load_app_config(const std::filesystem::path& path);

void validate(const AppConfig& config);

PromptTemplate prompt_template(const AppConfig& config);

} // namespace teleoracle
