#include "teleoracle/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

#include "teleoracle/errors.hpp"
#include "teleoracle/text.hpp"

namespace teleoracle {

namespace {

using nlohmann::json;

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
    if (!obj.contains(key)) {
        throw Error("line " + std::to_string(line_no) + ": missing field " + key);
    }
    if (!obj.at(key).is_string()) {
        throw Error("line " + std::to_string(line_no) + ": field " + key + " must be a string");
    }
    return obj.at(key).get<std::string>();
}

bool blank(const std::string& line) {
    for (char c : line) {
        if (!is_ascii_space(c)) return false;
    }
    return true;
}

// Words that end in '.' without ending a sentence. Compared lowercased,
// terminator stripped.
const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> abbrevs = {
        "e.g", "i.e", "etc", "vs", "cf",  "al",  "fig", "figs", "eq",   "eqs",  "sec",
        "no",  "vol", "rel", "mr", "mrs", "ms",  "dr",  "prof", "inc",  "ltd",  "dept",
        "est", "st",  "approx", "resp", "ref", "refs", "ch", "pp",
    };
    return abbrevs;
}

bool is_terminator(char c) {
    return c == '.' || c == '!' || c == '?';
}

// The whitespace-delimited word ending at (and excluding) the terminator.
std::string word_before(const std::string& text, std::size_t term_pos) {
    std::size_t start = term_pos;
    while (start > 0 && !is_ascii_space(text[start - 1])) --start;
    return ascii_lower_copy(std::string_view(text).substr(start, term_pos - start));
}

} // namespace

std::vector<Document> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open corpus file: " + path.string());
    }

    std::vector<Document> docs;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;

        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error("line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!obj.is_object()) {
            throw Error("line " + std::to_string(line_no) + ": expected a JSON object");
        }

        Document doc;
        doc.id = require_string(obj, "id", line_no);
        doc.title = require_string(obj, "title", line_no);
        doc.source = require_string(obj, "source", line_no);
        doc.text = require_string(obj, "text", line_no);
        if (doc.id.empty()) {
            throw Error("line " + std::to_string(line_no) + ": empty id");
        }
        if (doc.text.empty()) {
            throw Error("line " + std::to_string(line_no) + ": empty text");
        }
        if (!seen_ids.insert(doc.id).second) {
            throw Error("line " + std::to_string(line_no) + ": duplicate id " + doc.id);
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

std::vector<Sentence> split_sentences(const Document& doc) {
    const std::string& text = doc.text;
    if (text.empty()) {
        throw Error("split_sentences: document " + doc.id + " has empty text");
    }

    // Candidate break positions: one past a terminator that is followed by
    // whitespace and then an uppercase letter or digit.
    std::vector<std::size_t> breaks;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (!is_terminator(text[i])) continue;

        std::size_t j = i + 1;
        // Absorb a trailing run of closers/terminators: `)."` ends at the run's end.
        while (j < text.size() && (is_terminator(text[j]) || text[j] == ')' || text[j] == ']' ||
                                   text[j] == '"' || text[j] == '\'')) {
            ++j;
        }
        std::size_t ws = j;
        while (ws < text.size() && is_ascii_space(text[ws])) ++ws;
        if (ws == j || ws == text.size()) continue; // no whitespace gap or end of text
        if (!is_ascii_upper(text[ws]) && !is_ascii_digit(text[ws])) continue;

        if (text[i] == '.' && abbreviations().count(word_before(text, i)) > 0) continue;

        breaks.push_back(j);
        i = j - 1;
    }
    breaks.push_back(text.size());

    std::vector<Sentence> sentences;
    std::size_t cursor = 0;
    for (std::size_t brk : breaks) {
        std::size_t start = cursor;
        while (start < brk && is_ascii_space(text[start])) ++start;
        std::size_t end = brk;
        while (end > start && is_ascii_space(text[end - 1])) --end;
        if (start < end) {
            Sentence s;
            s.doc_id = doc.id;
            s.index = sentences.size();
            s.byte_start = start;
            s.byte_end = end;
            s.text = text.substr(start, end - start);
            sentences.push_back(std::move(s));
        }
        cursor = brk;
    }

    if (sentences.empty()) {
        // Whitespace-only text still counts as one (degenerate) sentence so
        // downstream chunking has a unit to work with.
        Sentence s;
        s.doc_id = doc.id;
        s.index = 0;
        s.byte_start = 0;
        s.byte_end = text.size();
        s.text = text;
        sentences.push_back(std::move(s));
    }
    return sentences;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_ascii_space(text[i])) ++i;
        if (i >= text.size()) break;
        std::size_t j = i;
        while (j < text.size() && !is_ascii_space(text[j])) ++j;
        std::string_view word = text.substr(i, j - i);

        std::size_t lead = 0;
        while (lead < word.size() && is_ascii_punct(word[lead])) ++lead;
        std::size_t trail = word.size();
        while (trail > lead && is_ascii_punct(word[trail - 1])) --trail;

        for (std::size_t p = 0; p < lead; ++p) tokens.emplace_back(1, word[p]);
        if (trail > lead) tokens.emplace_back(word.substr(lead, trail - lead));
        for (std::size_t p = trail; p < word.size(); ++p) tokens.emplace_back(1, word[p]);

        i = j;
    }
    return tokens;
}

std::size_t count_tokens(std::string_view text) {
    return tokenize(text).size();
}

} // namespace teleoracle
