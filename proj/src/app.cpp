#include "teleoracle/app.hpp"

#include <fstream>

#include "teleoracle/errors.hpp"

namespace teleoracle {

namespace {

constexpr std::size_t kHistogramBucket = 50;

StrategyStats collect_stats(const std::vector<Chunk>& chunks) {
    StrategyStats stats;
    stats.chunk_count = chunks.size();
    for (const Chunk& c : chunks) {
        stats.total_tokens += c.token_count;
        ++stats.token_histogram[(c.token_count / kHistogramBucket) * kHistogramBucket];
    }
    return stats;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << text;
}

} // namespace

IngestStats cmd_ingest(const AppConfig& config) {
    validate(config);
    const std::vector<Document> docs = load_corpus(config.corpus_path);
    if (docs.empty()) {
        throw Error("no documents in " + config.corpus_path.string());
    }

    std::vector<Chunk> semantic;
    std::vector<Chunk> fixed;
    for (const Document& doc : docs) {
        for (Chunk& c : semantic_chunk(doc, config.chunking.semantic, config.embedder)) {
            semantic.push_back(std::move(c));
        }
        for (Chunk& c : fixed_chunk(doc, config.chunking.fixed_chunk_tokens,
                                    config.chunking.fixed_overlap_tokens)) {
            fixed.push_back(std::move(c));
        }
    }

    std::filesystem::create_directories(config.index_dir);
    IngestStats stats;
    stats.documents = docs.size();
    stats.semantic = collect_stats(semantic);
    stats.fixed = collect_stats(fixed);
    stats.semantic_dump = config.index_dir / "semantic_chunks.jsonl";
    stats.fixed_dump = config.index_dir / "fixed_chunks.jsonl";
    write_chunks(stats.semantic_dump, semantic);
    write_chunks(stats.fixed_dump, fixed);
    return stats;
}

IndexStats cmd_index(const AppConfig& config) {
    validate(config);
    const std::filesystem::path semantic_dump = config.index_dir / "semantic_chunks.jsonl";
    const std::filesystem::path fixed_dump = config.index_dir / "fixed_chunks.jsonl";
    if (!std::filesystem::exists(semantic_dump) || !std::filesystem::exists(fixed_dump)) {
        throw Error("chunk dumps not found under " + config.index_dir.string() +
                    ": run `teleoracle ingest` first");
    }

    IndexStats stats;
    stats.semantic_dir = config.index_dir / "semantic";
    stats.fixed_dir = config.index_dir / "fixed";

    const std::vector<Chunk> semantic = read_chunks(semantic_dump);
    const std::vector<Chunk> fixed = read_chunks(fixed_dump);
    stats.semantic_chunks = semantic.size();
    stats.fixed_chunks = fixed.size();

    persist(build_index_bundle(semantic, config.embedder, config.bm25.k1, config.bm25.b),
            stats.semantic_dir);
    persist(build_index_bundle(fixed, config.embedder, config.bm25.k1, config.bm25.b),
            stats.fixed_dir);
    return stats;
}

PipelineIndexes load_indexes(const AppConfig& config) {
    const std::filesystem::path semantic_dir = config.index_dir / "semantic";
    const std::filesystem::path fixed_dir = config.index_dir / "fixed";
    if (!std::filesystem::exists(semantic_dir / "manifest.json") ||
        !std::filesystem::exists(fixed_dir / "manifest.json")) {
        throw Error("no persisted indexes under " + config.index_dir.string() +
                    ": run `teleoracle ingest` then `teleoracle index` first");
    }
    PipelineIndexes indexes;
    indexes.semantic = load(semantic_dir);
    indexes.fixed = load(fixed_dir);
    return indexes;
}

PipelineConfig make_pipeline_config(const AppConfig& config, const PipelineIndexes& indexes) {
    PipelineConfig pc;
    pc.indexes = &indexes;
    pc.retrieval = config.retrieval;
    pc.reranker = config.reranker;
    pc.selfextend = config.selfextend;
    pc.prompt = prompt_template(config);
    return pc;
}

QueryResult cmd_query(const AppConfig& config, const PipelineIndexes& indexes,
                      const McqItem& question, const AblationFlags& flags) {
    validate(question);
    const PipelineConfig pc = make_pipeline_config(config, indexes);

    QueryResult result;
    result.bundle =
        retrieve(question, indexes, pc.retrieval, pc.reranker, flags.sc, flags.rr);
    if (!flags.mc && result.bundle.entries.size() > 1) {
        result.bundle.entries.resize(1);
    }
    result.budget_tokens =
        flags.se ? capacity(pc.selfextend) : pc.selfextend.trained_window;

    const std::string prompt =
        assemble_prompt(pc.prompt, result.bundle, question, result.budget_tokens);
    result.prompt_tokens = count_tokens(prompt);
    result.raw_output = generate(prompt, config.generator);
    result.chosen_option =
        extract_answer(result.raw_output, static_cast<int>(question.options.size()));
    if (result.chosen_option) {
        result.chosen_text = question.options[static_cast<std::size_t>(*result.chosen_option - 1)];
    }
    return result;
}

EvalRunResult cmd_eval(const AppConfig& config, const PipelineIndexes& indexes,
                       const std::filesystem::path& questions_path, bool sweep,
                       const std::filesystem::path& out_dir) {
    const std::vector<McqItem> questions = load_questions(questions_path);
    const PipelineConfig pc = make_pipeline_config(config, indexes);
    std::filesystem::create_directories(out_dir);

    std::vector<AblationFlags> combos;
    if (sweep) {
        for (int bits = 0; bits < 16; ++bits) {
            combos.push_back({(bits & 8) != 0, (bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
        }
    } else {
        combos.push_back(config.flags);
    }

    EvalRunResult result;
    for (const AblationFlags& flags : combos) {
        EvalReport report = run_eval(questions, pc, flags, config.generator);
        const std::filesystem::path path = out_dir / ("report_" + flags.label() + ".json");
        write_text_file(path, report_to_json(report));
        result.report_paths.push_back(path);
        result.reports.push_back(std::move(report));
    }

    result.comparison_text = compare_reports_text(result.reports);
    result.comparison_json = compare_reports_json(result.reports);
    write_text_file(out_dir / "comparison.txt", result.comparison_text);
    write_text_file(out_dir / "comparison.json", result.comparison_json);
    return result;
}

} // namespace teleoracle
