#include "teleoracle/eval.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "teleoracle/errors.hpp"
#include "teleoracle/text.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

std::tuple<bool, bool, bool, bool> flag_tuple(const AblationFlags& f) {
    return {f.se, f.rr, f.sc, f.mc};
}

struct QuestionOutcome {
    QuestionRecord record;
    bool correct = false;
    bool unparsed = false;
};

QuestionOutcome evaluate_question(const McqItem& q, const PipelineConfig& config,
                                  const AblationFlags& flags, const GeneratorSpec& generator) {
    validate(q);

    ContextBundle bundle;
    if (config.retrieval_enabled && config.indexes != nullptr) {
        bundle = retrieve(q, *config.indexes, config.retrieval, config.reranker, flags.sc,
                          flags.rr);
    }
    if (!flags.mc && bundle.entries.size() > 1) {
        bundle.entries.resize(1); // single best chunk
    }

    const std::size_t budget =
        flags.se ? capacity(config.selfextend) : config.selfextend.trained_window;
    const std::string prompt = assemble_prompt(config.prompt, bundle, q, budget);
    const std::string output = generate(prompt, generator);
    const std::optional<int> predicted =
        extract_answer(output, static_cast<int>(q.options.size()));

    QuestionOutcome outcome;
    outcome.record.qid = q.id;
    outcome.record.predicted = predicted;
    outcome.record.gold = q.answer_index;
    for (const ContextEntry& e : bundle.entries) {
        outcome.record.context_ids.push_back(e.chunk.id);
    }

    std::vector<std::string> context_texts;
    context_texts.reserve(bundle.entries.size());
    for (const ContextEntry& e : bundle.entries) context_texts.push_back(e.chunk.text);
    // Faithfulness is judged on what the model effectively asserted: the
    // chosen option's text, or the raw output when nothing parsed.
    const std::string& answer_text =
        predicted ? q.options[static_cast<std::size_t>(*predicted - 1)] : output;
    outcome.record.faithfulness = faithfulness_proxy(answer_text, context_texts);

    outcome.unparsed = !predicted.has_value();
    outcome.correct = predicted.has_value() && q.answer_index.has_value() &&
                      *predicted == *q.answer_index;
    return outcome;
}

} // namespace

void validate(const McqItem& item) {
    if (item.question.empty()) {
        throw Error("question text must be non-empty");
    }
    if (item.options.size() < 2 || item.options.size() > 5) {
        throw Error("question " + item.id + ": needs 2..5 options, has " +
                    std::to_string(item.options.size()));
    }
    if (item.answer_index &&
        (*item.answer_index < 1 || *item.answer_index > static_cast<int>(item.options.size()))) {
        throw Error("question " + item.id + ": answer_index out of range");
    }
}

std::string AblationFlags::label() const {
    std::string out;
    if (se) out += "SE+";
    if (rr) out += "RR+";
    if (sc) out += "SC+";
    if (mc) out += "MC+";
    if (out.empty()) return "base";
    out.pop_back();
    return out;
}

double faithfulness_proxy(const std::string& answer_text,
                          const std::vector<std::string>& contexts) {
    const std::unordered_set<std::string> answer_tokens = content_token_set(answer_text);
    if (answer_tokens.empty()) {
        return 1.0; // nothing asserted, nothing unsupported
    }
    std::string joined;
    for (const std::string& c : contexts) {
        joined += c;
        joined += ' ';
    }
    const std::unordered_set<std::string> context_tokens = content_token_set(joined);
    std::size_t supported = 0;
    for (const std::string& t : answer_tokens) {
        if (context_tokens.count(t)) ++supported;
    }
    return static_cast<double>(supported) / static_cast<double>(answer_tokens.size());
}

EvalReport run_eval(const std::vector<McqItem>& questions, const PipelineConfig& config,
                    const AblationFlags& flags, const GeneratorSpec& generator) {
    for (const McqItem& q : questions) {
        if (!q.answer_index.has_value()) {
            throw Error("run_eval: question " + q.id +
                        " is unlabeled; use run_predict for unlabeled sets");
        }
    }

    EvalReport report;
    report.flags = flags;
    report.n = questions.size();

    double faithfulness_sum = 0.0;
    for (const McqItem& q : questions) {
        QuestionOutcome outcome = evaluate_question(q, config, flags, generator);
        if (outcome.correct) ++report.n_correct;
        if (outcome.unparsed) ++report.n_unparsed;
        faithfulness_sum += outcome.record.faithfulness;
        report.records.push_back(std::move(outcome.record));
    }
    report.faithfulness = questions.empty() ? 0.0 : faithfulness_sum / questions.size();
    return report;
}

std::vector<std::optional<int>> run_predict(const std::vector<McqItem>& questions,
                                            const PipelineConfig& config,
                                            const AblationFlags& flags,
                                            const GeneratorSpec& generator) {
    std::vector<std::optional<int>> out;
    out.reserve(questions.size());
    for (const McqItem& q : questions) {
        out.push_back(evaluate_question(q, config, flags, generator).record.predicted);
    }
    return out;
}

namespace {

void sort_reports(std::vector<EvalReport>& reports) {
    std::sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
        if (a.accuracy() != b.accuracy()) return a.accuracy() > b.accuracy();
        return flag_tuple(a.flags) > flag_tuple(b.flags); // enabled flags first on ties
    });
}

const char* onoff(bool v) {
    return v ? "on" : "off";
}

} // namespace

std::string compare_reports_text(std::vector<EvalReport> reports) {
    if (reports.empty()) {
        throw Error("compare_reports: need at least one report");
    }
    sort_reports(reports);

    std::ostringstream out;
    out << "SE   RR   SC   MC   accuracy  faithfulness     n  unparsed\n";
    for (const EvalReport& r : reports) {
        char line[128];
        std::snprintf(line, sizeof(line), "%-4s %-4s %-4s %-4s %8.4f  %12.4f  %4zu  %8zu\n",
                      onoff(r.flags.se), onoff(r.flags.rr), onoff(r.flags.sc), onoff(r.flags.mc),
                      r.accuracy(), r.faithfulness, r.n, r.n_unparsed);
        out << line;
    }
    return out.str();
}

namespace {

json flags_to_json(const AblationFlags& flags) {
    return {{"SE", flags.se}, {"RR", flags.rr}, {"SC", flags.sc}, {"MC", flags.mc}};
}

json report_to_json_obj(const EvalReport& report) {
    json obj;
    obj["flags"] = flags_to_json(report.flags);
    obj["n"] = report.n;
    obj["accuracy"] = report.accuracy();
    obj["unparsed"] = report.n_unparsed;
    obj["faithfulness"] = report.faithfulness;
    json records = json::array();
    for (const QuestionRecord& rec : report.records) {
        json r;
        r["qid"] = rec.qid;
        r["predicted"] = rec.predicted ? json(*rec.predicted) : json(nullptr);
        r["gold"] = rec.gold ? json(*rec.gold) : json(nullptr);
        r["contexts"] = rec.context_ids;
        records.push_back(std::move(r));
    }
    obj["records"] = std::move(records);
    return obj;
}

} // namespace

std::string report_to_json(const EvalReport& report) {
    return report_to_json_obj(report).dump(2) + "\n";
}

std::string compare_reports_json(std::vector<EvalReport> reports) {
    if (reports.empty()) {
        throw Error("compare_reports: need at least one report");
    }
    sort_reports(reports);
    json rows = json::array();
    for (const EvalReport& r : reports) {
        json row;
        row["flags"] = flags_to_json(r.flags);
        row["accuracy"] = r.accuracy();
        row["faithfulness"] = r.faithfulness;
        row["n"] = r.n;
        row["unparsed"] = r.n_unparsed;
        rows.push_back(std::move(row));
    }
    return rows.dump(2) + "\n";
}

namespace {

McqItem parse_question(const std::string& qid, const json& obj) {
    McqItem item;
    item.id = qid;
    item.question = obj.at("question").get<std::string>();

    if (obj.contains("options")) {
        // plain form: {"question", "options": [...], "answer_index": k}
        for (const json& opt : obj.at("options")) {
            item.options.push_back(opt.get<std::string>());
        }
        if (obj.contains("answer_index")) {
            item.answer_index = obj.at("answer_index").get<int>();
        }
    } else {
        // TeleQnA form: {"option 1".."option 5", "answer": "option k: ..."}
        for (int i = 1; i <= 5; ++i) {
            const std::string key = "option " + std::to_string(i);
            if (!obj.contains(key)) break;
            item.options.push_back(obj.at(key).get<std::string>());
        }
        if (obj.contains("answer")) {
            const std::string answer = ascii_lower_copy(obj.at("answer").get<std::string>());
            const std::size_t pos = answer.find("option");
            if (pos == std::string::npos) {
                throw Error("question " + qid + ": answer must name an option");
            }
            std::size_t p = pos + 6;
            while (p < answer.size() && is_ascii_space(answer[p])) ++p;
            std::size_t end = p;
            while (end < answer.size() && is_ascii_digit(answer[end])) ++end;
            if (end == p) {
                throw Error("question " + qid + ": answer must name an option number");
            }
            item.answer_index = std::stoi(answer.substr(p, end - p));
        }
    }
    if (obj.contains("explanation")) {
        item.explanation = obj.at("explanation").get<std::string>();
    }
    validate(item);
    return item;
}

} // namespace

std::vector<McqItem> load_questions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open question file: " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("question file " + path.string() + ": " + e.what());
    }

    std::vector<McqItem> questions;
    if (doc.is_array()) {
        std::size_t i = 0;
        for (const json& obj : doc) {
            questions.push_back(parse_question("q" + std::to_string(i++), obj));
        }
    } else if (doc.is_object()) {
        for (const auto& [key, obj] : doc.items()) {
            questions.push_back(parse_question(key, obj));
        }
    } else {
        throw Error("question file must be a JSON array or object map");
    }
    return questions;
}

} // namespace teleoracle
