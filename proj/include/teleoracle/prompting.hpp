#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "teleoracle/mcq.hpp"
#include "teleoracle/retrieval.hpp"

namespace teleoracle {

/// Prompt scaffold. Sections always render in the order instructions,
/// contexts, question, options, answer cue.
struct PromptTemplate {
    std::string instruction_text;
    std::string answer_cue = "Answer:";

    static PromptTemplate standard();
};

enum class GeneratorKind { stub_oracle, stub_random, remote };

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::stub_oracle;
    std::uint64_t seed = 0;   // stub_random
    std::string endpoint;     // remote
    int max_tokens = 64;      // remote
};

/// Renders the prompt with contexts numbered "Context 1: ..." in bundle
/// order and options as "1) ..." lines. When the full render exceeds
/// budget_tokens, trailing contexts are dropped whole until it fits.
/// Throws "scaffold exceeds budget" if even the context-free render is
/// over budget.
std::string assemble_prompt(const PromptTemplate& tpl, const ContextBundle& contexts,
                            const McqItem& question, std::size_t budget_tokens);

/// stub_oracle answers "Answer: i" for the option whose content tokens
/// overlap the prompt's context blocks most (ties to the lowest index);
/// stub_random picks a seed-and-prompt-determined uniform option; remote
/// POSTs {endpoint}/generate with {"prompt","max_tokens"} and expects
/// {"text"}.
std::string generate(const std::string& prompt, const GeneratorSpec& spec);

/// Extraction ladder, most to least strict, case-insensitive:
///   1. "answer: <i>"   2. "option <i>"   3. a line that is "<i>" or "<i>)"
/// The first matching pattern decides; an index outside [1, n_options] or
/// no match at all yields nullopt.
std::optional<int> extract_answer(const std::string& output, int n_options);

} // namespace teleoracle
