#include "teleoracle/prompting.hpp"

#include <algorithm>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "teleoracle/corpus.hpp"
#include "teleoracle/errors.hpp"
#include "teleoracle/text.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

std::string render(const PromptTemplate& tpl, const ContextBundle& contexts, std::size_t n_contexts,
                   const McqItem& q) {
    std::ostringstream out;
    out << tpl.instruction_text << "\n\n";
    for (std::size_t i = 0; i < n_contexts; ++i) {
        out << "Context " << (i + 1) << ": " << contexts.entries[i].chunk.text << '\n';
    }
    if (n_contexts > 0) out << '\n';
    out << "Question: " << q.question << '\n';
    out << "Options:\n";
    for (std::size_t i = 0; i < q.options.size(); ++i) {
        out << (i + 1) << ") " << q.options[i] << '\n';
    }
    out << tpl.answer_cue;
    return out.str();
}

struct ParsedPrompt {
    std::vector<std::string> contexts;
    std::vector<std::string> options;
};

// Recovers the sections assemble_prompt rendered. Section markers are taken
// from the back of the prompt, where the real question and options live.
ParsedPrompt parse_prompt(const std::string& prompt) {
    ParsedPrompt parsed;

    const std::size_t options_pos = prompt.rfind("\nOptions:\n");
    const std::size_t question_pos = prompt.rfind("\nQuestion: ",
                                                  options_pos == std::string::npos ? std::string::npos
                                                                                   : options_pos);
    if (options_pos == std::string::npos || question_pos == std::string::npos) {
        return parsed;
    }

    // Context blocks sit between the instruction section and the question.
    const std::string head = prompt.substr(0, question_pos);
    std::size_t pos = head.find("\nContext 1: ");
    std::size_t ordinal = 1;
    while (pos != std::string::npos) {
        const std::size_t body_start = pos + 11 + std::to_string(ordinal).size();
        const std::string next_marker = "\nContext " + std::to_string(ordinal + 1) + ": ";
        std::size_t next = head.find(next_marker, pos + 1);
        const std::size_t body_end = next == std::string::npos ? head.size() : next;
        std::string body = head.substr(body_start, body_end - body_start);
        while (!body.empty() && body.back() == '\n') body.pop_back();
        parsed.contexts.push_back(std::move(body));
        pos = next;
        ++ordinal;
    }

    std::istringstream tail(prompt.substr(options_pos + 10));
    std::string line;
    while (std::getline(tail, line)) {
        std::size_t d = 0;
        while (d < line.size() && is_ascii_digit(line[d])) ++d;
        if (d == 0 || d + 1 >= line.size() || line[d] != ')' || line[d + 1] != ' ') break;
        parsed.options.push_back(line.substr(d + 2));
    }
    return parsed;
}

std::string oracle_answer(const std::string& prompt) {
    const ParsedPrompt parsed = parse_prompt(prompt);
    if (parsed.options.empty()) {
        return "Answer: 1";
    }

    std::string all_contexts;
    for (const std::string& c : parsed.contexts) {
        all_contexts += c;
        all_contexts += ' ';
    }
    const std::unordered_set<std::string> context_tokens = content_token_set(all_contexts);

    std::size_t best = 0;
    double best_overlap = -1.0;
    for (std::size_t i = 0; i < parsed.options.size(); ++i) {
        const std::unordered_set<std::string> opt_tokens = content_token_set(parsed.options[i]);
        double overlap = 0.0;
        if (!opt_tokens.empty()) {
            std::size_t shared = 0;
            for (const std::string& t : opt_tokens) {
                if (context_tokens.count(t)) ++shared;
            }
            overlap = static_cast<double>(shared) / static_cast<double>(opt_tokens.size());
        }
        if (overlap > best_overlap) {
            best_overlap = overlap;
            best = i;
        }
    }
    return "Answer: " + std::to_string(best + 1);
}

std::string random_answer(const std::string& prompt, std::uint64_t seed) {
    const ParsedPrompt parsed = parse_prompt(prompt);
    const std::size_t n = parsed.options.empty() ? 1 : parsed.options.size();
    const std::uint64_t pick = splitmix64(seed ^ fnv1a64(prompt)) % n;
    return "Answer: " + std::to_string(pick + 1);
}

std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    auto scheme_end = endpoint.find("://");
    if (scheme_end == std::string::npos) {
        throw TransportError(endpoint, "endpoint must include a scheme, e.g. http://host:port");
    }
    auto path_start = endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path_start), prefix};
}

std::string remote_generate(const std::string& prompt, const GeneratorSpec& spec) {
    const auto [base, prefix] = split_endpoint(spec.endpoint);
    httplib::Client client(base);

    json request;
    request["prompt"] = prompt;
    request["max_tokens"] = spec.max_tokens;
    auto res = client.Post(prefix + "/generate", request.dump(), "application/json");
    if (!res) {
        throw TransportError(spec.endpoint, httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw TransportError(spec.endpoint, "HTTP " + std::to_string(res->status));
    }
    json reply;
    try {
        reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
        throw TransportError(spec.endpoint, std::string("malformed reply: ") + e.what());
    }
    if (!reply.is_object() || !reply.contains("text") || !reply["text"].is_string()) {
        throw TransportError(spec.endpoint, "malformed reply: missing \"text\" string");
    }
    return reply["text"].get<std::string>();
}

} // namespace

PromptTemplate PromptTemplate::standard() {
    PromptTemplate tpl;
    tpl.instruction_text =
        "You are a telecom standards assistant. Answer the multiple-choice question using only "
        "the numbered context passages below. Pay close attention to critical key terms such as "
        "'main' and 'primary' and to telecom-specific terminology when interpreting the question. "
        "Reply with exactly one line of the form 'Answer: <option number>'.";
    return tpl;
}

std::string assemble_prompt(const PromptTemplate& tpl, const ContextBundle& contexts,
                            const McqItem& question, std::size_t budget_tokens) {
    validate(question);
    const std::string scaffold = render(tpl, contexts, 0, question);
    if (count_tokens(scaffold) > budget_tokens) {
        throw Error("scaffold exceeds budget");
    }

    // Drop whole trailing contexts until the render fits.
    std::size_t n = contexts.entries.size();
    std::string prompt = render(tpl, contexts, n, question);
    while (n > 0 && count_tokens(prompt) > budget_tokens) {
        --n;
        prompt = render(tpl, contexts, n, question);
    }
    return prompt;
}

std::string generate(const std::string& prompt, const GeneratorSpec& spec) {
    if (prompt.empty()) {
        throw Error("generate: empty prompt");
    }
    switch (spec.kind) {
    case GeneratorKind::stub_oracle:
        return oracle_answer(prompt);
    case GeneratorKind::stub_random:
        return random_answer(prompt, spec.seed);
    case GeneratorKind::remote:
        return remote_generate(prompt, spec);
    }
    throw Error("generate: invalid generator kind");
}

std::optional<int> extract_answer(const std::string& output, int n_options) {
    if (n_options < 2 || n_options > 5) {
        throw Error("extract_answer: n_options must lie in [2, 5]");
    }
    const std::string lower = ascii_lower_copy(output);

    const auto in_range = [n_options](long v) -> std::optional<int> {
        if (v >= 1 && v <= n_options) return static_cast<int>(v);
        return std::nullopt;
    };
    const auto number_at = [&lower](std::size_t pos) -> std::optional<long> {
        std::size_t end = pos;
        while (end < lower.size() && is_ascii_digit(lower[end]) && end - pos < 4) ++end;
        if (end == pos) return std::nullopt;
        return std::stol(lower.substr(pos, end - pos));
    };

    // Ladder, most to least strict: the first pattern that matches decides.
    if (std::size_t pos = lower.find("answer:"); pos != std::string::npos) {
        std::size_t p = pos + 7;
        while (p < lower.size() && (lower[p] == ' ' || lower[p] == '\t')) ++p;
        if (const auto num = number_at(p)) return in_range(*num);
    }

    std::size_t pos = 0;
    while ((pos = lower.find("option", pos)) != std::string::npos) {
        std::size_t p = pos + 6;
        if (p < lower.size() && is_ascii_space(lower[p])) {
            while (p < lower.size() && is_ascii_space(lower[p])) ++p;
            if (const auto num = number_at(p)) return in_range(*num);
        }
        pos += 6;
    }

    std::istringstream lines(lower);
    std::string line;
    while (std::getline(lines, line)) {
        std::size_t begin = 0, end = line.size();
        while (begin < end && is_ascii_space(line[begin])) ++begin;
        while (end > begin && is_ascii_space(line[end - 1])) --end;
        std::string_view trimmed(line.data() + begin, end - begin);
        if (trimmed.empty()) continue;
        std::size_t d = 0;
        while (d < trimmed.size() && is_ascii_digit(trimmed[d])) ++d;
        if (d == 0 || d > 3) continue;
        const bool bare = d == trimmed.size();
        const bool parenthesized = d + 1 == trimmed.size() && trimmed[d] == ')';
        if (bare || parenthesized) {
            return in_range(std::stol(std::string(trimmed.substr(0, d))));
        }
    }
    return std::nullopt;
}

} // namespace teleoracle
