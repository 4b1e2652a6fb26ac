#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teleoracle/app.hpp"
#include "teleoracle/errors.hpp"
#include "teleoracle/selfextend.hpp"

namespace {

using nlohmann::json;
using namespace teleoracle;

json histogram_to_json(const StrategyStats& stats) {
    json obj;
    obj["chunks"] = stats.chunk_count;
    obj["total_tokens"] = stats.total_tokens;
    json hist = json::object();
    for (const auto& [bucket, count] : stats.token_histogram) {
        hist[std::to_string(bucket)] = count;
    }
    obj["token_histogram"] = hist;
    return obj;
}

void print_histogram(const char* name, const StrategyStats& stats) {
    std::cout << name << ": " << stats.chunk_count << " chunks, " << stats.total_tokens
              << " tokens\n";
    for (const auto& [bucket, count] : stats.token_histogram) {
        std::cout << "  [" << bucket << ", " << bucket + 50 << "): " << count << "\n";
    }
}

json bundle_to_json(const ContextBundle& bundle) {
    json entries = json::array();
    for (const ContextEntry& e : bundle.entries) {
        json entry;
        entry["chunk_id"] = e.chunk.id;
        entry["source"] = to_string(e.source);
        entry["score"] = e.score;
        entry["tokens"] = e.chunk.token_count;
        if (e.first_stage) {
            entry["first_stage"] = {{"source", to_string(e.first_stage->first)},
                                    {"score", e.first_stage->second}};
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

int run(int argc, char** argv) {
    CLI::App app{"TeleOracle: retrieval-augmented question answering over technical corpora"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    bool json_out = false;
    std::uint64_t seed = 0;
    bool seed_given = false;
    app.add_option("--config", config_path, "Path to the JSON config")
        ->envname("TELEORACLE_CONFIG");
    app.add_flag("--json", json_out, "Emit machine-readable JSON");
    app.add_option("--seed", seed, "Override embedder and stub-generator seeds")
        ->each([&seed_given](const std::string&) { seed_given = true; });

    CLI::App* ingest = app.add_subcommand("ingest", "Chunk the corpus and write chunk dumps");
    CLI::App* index = app.add_subcommand("index", "Build and persist the search indexes");

    CLI::App* query = app.add_subcommand("query", "Answer one multiple-choice question");
    std::string question_text;
    std::vector<std::string> options;
    bool no_rerank = false, no_selfextend = false, fixed_chunks = false, single_context = false;
    query->add_option("question", question_text, "Question stem")->required();
    query->add_option("--option", options, "Answer option (repeat 2..5 times)")->required();
    query->add_flag("--no-rerank", no_rerank, "Skip the rerank stage (RR off)");
    query->add_flag("--no-selfextend", no_selfextend, "Use the native token budget (SE off)");
    query->add_flag("--fixed-chunks", fixed_chunks, "Search fixed-size chunks (SC off)");
    query->add_flag("--single-context", single_context, "Keep only the best chunk (MC off)");

    CLI::App* eval = app.add_subcommand("eval", "Evaluate a question file");
    std::string questions_path;
    std::string out_dir;
    bool sweep = false;
    eval->add_option("--questions", questions_path, "Question file (JSON)")->required();
    eval->add_option("--out", out_dir, "Output directory for reports");
    eval->add_flag("--sweep", sweep, "Run all 16 SE/RR/SC/MC combinations");
    eval->add_flag("--no-rerank", no_rerank, "RR off for a single run");
    eval->add_flag("--no-selfextend", no_selfextend, "SE off for a single run");
    eval->add_flag("--fixed-chunks", fixed_chunks, "SC off for a single run");
    eval->add_flag("--single-context", single_context, "MC off for a single run");

    CLI::App* positions = app.add_subcommand("positions", "Inspect remapped relative positions");
    std::size_t pos_T = 0, pos_L = 0, pos_wn = 0, pos_gs = 0;
    positions->add_option("T", pos_T, "Sequence length")->required();
    positions->add_option("L", pos_L, "Trained context window")->required();
    positions->add_option("w_n", pos_wn, "Neighbor window")->required();
    positions->add_option("G_s", pos_gs, "Group size")->required();

    CLI11_PARSE(app, argc, argv);

    // `positions` is pure computation and needs no config file.
    if (positions->parsed()) {
        SelfExtendConfig cfg{pos_L, pos_wn, pos_gs};
        const PositionMatrix m = build_position_matrix(pos_T, cfg);
        if (json_out) {
            json obj;
            obj["T"] = pos_T;
            obj["L"] = pos_L;
            obj["w_n"] = pos_wn;
            obj["G_s"] = pos_gs;
            obj["capacity"] = capacity(cfg);
            obj["rel"] = m.rel;
            json ood = json::array();
            for (const auto& [q, k] : detect_ood(m, pos_L)) ood.push_back({q, k});
            obj["ood"] = ood;
            std::cout << obj.dump(2) << "\n";
        } else {
            std::cout << "capacity(L=" << pos_L << ", w_n=" << pos_wn << ", G_s=" << pos_gs
                      << ") = " << capacity(cfg) << "\n";
            std::cout << format_position_matrix(m, pos_L);
        }
        return 0;
    }

    if (config_path.empty()) {
        throw Error("no config given: pass --config or set TELEORACLE_CONFIG");
    }
    AppConfig config = load_app_config(config_path);
    if (seed_given) {
        config.embedder.seed = seed;
        config.generator.seed = seed;
    }

    if (ingest->parsed()) {
        const IngestStats stats = cmd_ingest(config);
        if (json_out) {
            json obj;
            obj["documents"] = stats.documents;
            obj["semantic"] = histogram_to_json(stats.semantic);
            obj["fixed"] = histogram_to_json(stats.fixed);
            obj["semantic_dump"] = stats.semantic_dump.string();
            obj["fixed_dump"] = stats.fixed_dump.string();
            std::cout << obj.dump(2) << "\n";
        } else {
            std::cout << "ingested " << stats.documents << " documents\n";
            print_histogram("semantic", stats.semantic);
            print_histogram("fixed", stats.fixed);
            std::cout << "dumps: " << stats.semantic_dump.string() << ", "
                      << stats.fixed_dump.string() << "\n";
        }
        return 0;
    }

    if (index->parsed()) {
        const IndexStats stats = cmd_index(config);
        if (json_out) {
            json obj;
            obj["semantic_chunks"] = stats.semantic_chunks;
            obj["fixed_chunks"] = stats.fixed_chunks;
            obj["semantic_dir"] = stats.semantic_dir.string();
            obj["fixed_dir"] = stats.fixed_dir.string();
            std::cout << obj.dump(2) << "\n";
        } else {
            std::cout << "indexed " << stats.semantic_chunks << " semantic chunks -> "
                      << stats.semantic_dir.string() << "\n";
            std::cout << "indexed " << stats.fixed_chunks << " fixed chunks -> "
                      << stats.fixed_dir.string() << "\n";
        }
        return 0;
    }

    AblationFlags flags = config.flags;
    if (no_selfextend) flags.se = false;
    if (no_rerank) flags.rr = false;
    if (fixed_chunks) flags.sc = false;
    if (single_context) flags.mc = false;

    const PipelineIndexes indexes = load_indexes(config);

    if (query->parsed()) {
        McqItem item;
        item.id = "cli";
        item.question = question_text;
        item.options = options;
        const QueryResult result = cmd_query(config, indexes, item, flags);
        if (json_out) {
            json obj;
            obj["output"] = result.raw_output;
            obj["chosen_option"] =
                result.chosen_option ? json(*result.chosen_option) : json(nullptr);
            obj["chosen_text"] = result.chosen_text;
            obj["prompt_tokens"] = result.prompt_tokens;
            obj["budget_tokens"] = result.budget_tokens;
            obj["contexts"] = bundle_to_json(result.bundle);
            std::cout << obj.dump(2) << "\n";
        } else {
            std::cout << "generator output: " << result.raw_output << "\n";
            if (result.chosen_option) {
                std::cout << "chosen option: " << *result.chosen_option << ") "
                          << result.chosen_text << "\n";
            } else {
                std::cout << "chosen option: none (unparseable output)\n";
            }
            std::cout << "prompt tokens: " << result.prompt_tokens << " (budget "
                      << result.budget_tokens << ")\n";
            std::cout << "contexts (" << result.bundle.entries.size() << ", "
                      << result.bundle.total_tokens() << " tokens):\n";
            std::size_t rank = 1;
            for (const ContextEntry& e : result.bundle.entries) {
                std::cout << "  " << rank++ << ". " << e.chunk.id << " [" << to_string(e.source)
                          << " " << e.score << "]";
                if (e.first_stage) {
                    std::cout << " (first stage: " << to_string(e.first_stage->first) << " "
                              << e.first_stage->second << ")";
                }
                std::cout << " tokens=" << e.chunk.token_count << "\n";
            }
        }
        return 0;
    }

    if (eval->parsed()) {
        const std::filesystem::path out =
            out_dir.empty() ? config.index_dir / "reports" : std::filesystem::path(out_dir);
        if (sweep) {
            const EvalRunResult result = cmd_eval(config, indexes, questions_path, true, out);
            std::cout << (json_out ? result.comparison_json : result.comparison_text);
        } else {
            AppConfig single = config;
            single.flags = flags;
            const EvalRunResult result = cmd_eval(single, indexes, questions_path, false, out);
            std::cout << (json_out ? result.comparison_json : result.comparison_text);
        }
        std::cout << (json_out ? "" : "reports written to " + out.string() + "\n");
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
