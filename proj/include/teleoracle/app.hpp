#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "teleoracle/config.hpp"
#include "teleoracle/eval.hpp"

namespace teleoracle {

// Command layer behind the CLI. Each cmd_* returns a result object the CLI
// renders as text or JSON.

struct StrategyStats {
    std::size_t chunk_count = 0;
    std::size_t total_tokens = 0;
    std::map<std::size_t, std::size_t> token_histogram; // bucket lower bound -> count
};

struct IngestStats {
    std::size_t documents = 0;
    StrategyStats semantic;
    StrategyStats fixed;
    std::filesystem::path semantic_dump;
    std::filesystem::path fixed_dump;
};

/// Loads the corpus, chunks it both ways, and writes the two chunk dumps
/// under index_dir. Rerunning on unchanged input rewrites identical dumps.
IngestStats cmd_ingest(const AppConfig& config);

struct IndexStats {
    std::size_t semantic_chunks = 0;
    std::size_t fixed_chunks = 0;
    std::filesystem::path semantic_dir;
    std::filesystem::path fixed_dir;
};

/// Builds and persists the semantic and fixed index bundles from the chunk
/// dumps cmd_ingest wrote.
IndexStats cmd_index(const AppConfig& config);

/// Loads both persisted bundles; errors name the command to run first.
PipelineIndexes load_indexes(const AppConfig& config);

PipelineConfig make_pipeline_config(const AppConfig& config, const PipelineIndexes& indexes);

struct QueryResult {
    std::string raw_output;
    std::optional<int> chosen_option;
    std::string chosen_text;
    ContextBundle bundle;
    std::size_t prompt_tokens = 0;
    std::size_t budget_tokens = 0;
};

QueryResult cmd_query(const AppConfig& config, const PipelineIndexes& indexes,
                      const McqItem& question, const AblationFlags& flags);

struct EvalRunResult {
    std::vector<EvalReport> reports;
    std::vector<std::filesystem::path> report_paths;
    std::string comparison_text;
    std::string comparison_json;
};

/// Evaluates the question file under one flag combination, or all sixteen
/// when sweep is set, writing one report JSON per combination plus the
/// comparison table.
EvalRunResult cmd_eval(const AppConfig& config, const PipelineIndexes& indexes,
                       const std::filesystem::path& questions_path, bool sweep,
                       const std::filesystem::path& out_dir);

} // namespace teleoracle
