#include "teleoracle/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "teleoracle/errors.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::string& where,
                    std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) {
            if (key == a) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw Error("config: unknown key \"" + key + "\" in " + where);
        }
    }
}

template <typename T>
void read_if(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        out = obj.at(key).get<T>();
    }
}

void parse_chunking(const json& obj, ChunkingConfig& out) {
    reject_unknown(obj, "chunking",
                   {"breakpoint_percentile", "buffer_size", "fixed_chunk_tokens",
                    "fixed_overlap_tokens"});
    read_if(obj, "breakpoint_percentile", out.semantic.breakpoint_percentile);
    read_if(obj, "buffer_size", out.semantic.buffer_size);
    read_if(obj, "fixed_chunk_tokens", out.fixed_chunk_tokens);
    read_if(obj, "fixed_overlap_tokens", out.fixed_overlap_tokens);
}

void parse_retrieval(const json& obj, RetrievalConfig& out) {
    reject_unknown(obj, "retrieval",
                   {"k_first_stage", "k_final", "min_context_tokens",
                    "include_options_in_query"});
    read_if(obj, "k_first_stage", out.k_first_stage);
    read_if(obj, "k_final", out.k_final);
    read_if(obj, "min_context_tokens", out.min_context_tokens);
    read_if(obj, "include_options_in_query", out.include_options_in_query);
}

void parse_embedder(const json& obj, EmbedderSpec& out) {
    reject_unknown(obj, "embedder", {"kind", "dim", "seed", "endpoint"});
    if (obj.contains("kind")) {
        const std::string kind = obj.at("kind").get<std::string>();
        if (kind == "reference") {
            out.kind = EmbedderKind::reference;
        } else if (kind == "remote") {
            out.kind = EmbedderKind::remote;
        } else {
            throw Error("config: embedder kind must be \"reference\" or \"remote\"");
        }
    }
    read_if(obj, "dim", out.dim);
    read_if(obj, "seed", out.seed);
    read_if(obj, "endpoint", out.endpoint);
}

void parse_reranker(const json& obj, RerankerSpec& out) {
    reject_unknown(obj, "reranker", {"kind", "endpoint"});
    if (obj.contains("kind")) {
        const std::string kind = obj.at("kind").get<std::string>();
        if (kind == "reference") {
            out.kind = RerankerKind::reference;
        } else if (kind == "remote") {
            out.kind = RerankerKind::remote;
        } else {
            throw Error("config: reranker kind must be \"reference\" or \"remote\"");
        }
    }
    read_if(obj, "endpoint", out.endpoint);
    if (out.kind == RerankerKind::remote && out.endpoint.empty()) {
        throw Error("config: remote reranker requires an endpoint");
    }
}

void parse_generator(const json& obj, GeneratorSpec& out) {
    reject_unknown(obj, "generator", {"kind", "seed", "endpoint", "max_tokens"});
    if (obj.contains("kind")) {
        const std::string kind = obj.at("kind").get<std::string>();
        if (kind == "stub-oracle") {
            out.kind = GeneratorKind::stub_oracle;
        } else if (kind == "stub-random") {
            out.kind = GeneratorKind::stub_random;
        } else if (kind == "remote") {
            out.kind = GeneratorKind::remote;
        } else {
            throw Error("config: generator kind must be stub-oracle, stub-random, or remote");
        }
    }
    read_if(obj, "seed", out.seed);
    read_if(obj, "endpoint", out.endpoint);
    read_if(obj, "max_tokens", out.max_tokens);
    if (out.kind == GeneratorKind::remote && out.endpoint.empty()) {
        throw Error("config: remote generator requires an endpoint");
    }
}

void parse_selfextend(const json& obj, SelfExtendConfig& out) {
    reject_unknown(obj, "selfextend", {"L", "w_n", "G_s"});
    read_if(obj, "L", out.trained_window);
    read_if(obj, "w_n", out.neighbor_window);
    read_if(obj, "G_s", out.group_size);
}

void parse_flags(const json& obj, AblationFlags& out) {
    reject_unknown(obj, "flags", {"SE", "RR", "SC", "MC"});
    read_if(obj, "SE", out.se);
    read_if(obj, "RR", out.rr);
    read_if(obj, "SC", out.sc);
    read_if(obj, "MC", out.mc);
}

void parse_bm25(const json& obj, Bm25Params& out) {
    reject_unknown(obj, "bm25", {"k1", "b"});
    read_if(obj, "k1", out.k1);
    read_if(obj, "b", out.b);
}

} // namespace

AppConfig parse_app_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error("config: top level must be a JSON object");
    }
    reject_unknown(doc, "top level",
                   {"corpus", "index_dir", "chunking", "retrieval", "bm25", "embedder",
                    "reranker", "generator", "selfextend", "flags", "instruction_text"});

    AppConfig config;
    if (doc.contains("corpus")) config.corpus_path = doc.at("corpus").get<std::string>();
    if (doc.contains("index_dir")) config.index_dir = doc.at("index_dir").get<std::string>();
    if (doc.contains("chunking")) parse_chunking(doc.at("chunking"), config.chunking);
    if (doc.contains("retrieval")) parse_retrieval(doc.at("retrieval"), config.retrieval);
    if (doc.contains("bm25")) parse_bm25(doc.at("bm25"), config.bm25);
    if (doc.contains("embedder")) parse_embedder(doc.at("embedder"), config.embedder);
    if (doc.contains("reranker")) parse_reranker(doc.at("reranker"), config.reranker);
    if (doc.contains("generator")) parse_generator(doc.at("generator"), config.generator);
    if (doc.contains("selfextend")) parse_selfextend(doc.at("selfextend"), config.selfextend);
    if (doc.contains("flags")) parse_flags(doc.at("flags"), config.flags);
    read_if(doc, "instruction_text", config.instruction_text);

    validate(config);
    return config;
}

AppConfig load_app_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config file: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_app_config(ss.str());
}

void validate(const AppConfig& config) {
    validate(config.retrieval);
    validate(config.embedder);
    validate(config.selfextend);
    if (!(config.chunking.semantic.breakpoint_percentile > 0.0 &&
          config.chunking.semantic.breakpoint_percentile < 100.0)) {
        throw Error("config: breakpoint_percentile must lie in (0, 100)");
    }
    if (config.chunking.semantic.buffer_size < 1) {
        throw Error("config: buffer_size must be >= 1");
    }
    if (config.chunking.fixed_chunk_tokens <= config.chunking.fixed_overlap_tokens) {
        throw Error("config: fixed_chunk_tokens must exceed fixed_overlap_tokens");
    }
    if (!(config.bm25.k1 > 0.0)) {
        throw Error("config: bm25 k1 must be > 0");
    }
    if (!(config.bm25.b >= 0.0 && config.bm25.b <= 1.0)) {
        throw Error("config: bm25 b must lie in [0, 1]");
    }
}

PromptTemplate prompt_template(const AppConfig& config) {
    PromptTemplate tpl = PromptTemplate::standard();
    if (!config.instruction_text.empty()) {
        tpl.instruction_text = config.instruction_text;
    }
    return tpl;
}

} // namespace teleoracle
