#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "teleoracle/mcq.hpp"
#include "teleoracle/prompting.hpp"
#include "teleoracle/retrieval.hpp"
#include "teleoracle/selfextend.hpp"

namespace teleoracle {

/// Ablation toggles: SelfExtend budget, reranking, semantic chunking, and
/// multiple contexts in the prompt.
struct AblationFlags {
    bool se = true;
    bool rr = true;
    bool sc = true;
    bool mc = true;

    std::string label() const; // e.g. "SE+RR+SC+MC" or "base"
};

struct PipelineConfig {
    const PipelineIndexes* indexes = nullptr;
    RetrievalConfig retrieval;
    RerankerSpec reranker;
    SelfExtendConfig selfextend;
    PromptTemplate prompt;
    bool retrieval_enabled = true;
};

struct QuestionRecord {
    std::string qid;
    std::optional<int> predicted;
    std::optional<int> gold;
    std::vector<std::string> context_ids;
    double faithfulness = 0.0;
};

struct EvalReport {
    AblationFlags flags;
    std::size_t n = 0;
    std::size_t n_correct = 0;
    std::size_t n_unparsed = 0;
    double faithfulness = 0.0; // mean of per-question proxies
    std::vector<QuestionRecord> records;

    double accuracy() const { return n == 0 ? 0.0 : static_cast<double>(n_correct) / n; }
};

/// Runs retrieve -> assemble -> generate -> extract -> score over labeled
/// questions. SE picks the prompt budget (capacity(selfextend) vs the native
/// trained window), RR and SC steer retrieval, MC off keeps only the single
/// best chunk in the prompt. Unparseable generator output scores as
/// incorrect; unlabeled questions are an error (use run_predict).
EvalReport run_eval(const std::vector<McqItem>& questions, const PipelineConfig& config,
                    const AblationFlags& flags, const GeneratorSpec& generator);

/// Same pipeline without scoring, for unlabeled sets. Returns one predicted
/// index (or nullopt) per question, in order.
std::vector<std::optional<int>> run_predict(const std::vector<McqItem>& questions,
                                            const PipelineConfig& config,
                                            const AblationFlags& flags,
                                            const GeneratorSpec& generator);

/// Fraction of the answer's content tokens present in the concatenated
/// contexts; an answer with no content tokens counts as fully supported.
double faithfulness_proxy(const std::string& answer_text,
                          const std::vector<std::string>& contexts);

/// Rows sorted by accuracy descending; ties keep a fixed order on the
/// (SE, RR, SC, MC) tuple, enabled flags first.
std::string compare_reports_text(std::vector<EvalReport> reports);
std::string compare_reports_json(std::vector<EvalReport> reports);

std::string report_to_json(const EvalReport& report);

/// Accepts a JSON array or an object map of question entries, each either
/// TeleQnA-shaped ({"question","option 1".."option 5","answer":"option k: ..",
/// "explanation"}) or plain ({"question","options","answer_index"}).
std::vector<McqItem> load_questions(const std::filesystem::path& path);

} // namespace teleoracle
