#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/text.hpp"

namespace mosaic {

enum class Condition { HS, DL, OTHER };

inline const char* condition_name(Condition c) {
    switch (c) {
        case Condition::HS: return "HS";
        case Condition::DL: return "DL";
        default: return "OTHER";
    }
}

inline Condition parse_condition(const std::string& s) {
    if (s == "HS") return Condition::HS;
    if (s == "DL") return Condition::DL;
    return Condition::OTHER;
}

struct Report {
    std::string id;
    Condition condition = Condition::OTHER;
    std::string text;                             // normalized
    std::map<std::string, std::string> metadata;  // extra columns/keys, verbatim
};

struct SentenceUnit {
    std::string report_id;
    size_t index = 0;  // position within the report
    std::string text;
};

struct LoadSummary {
    size_t rows_read = 0;
    size_t reports_loaded = 0;
    size_t dropped_empty = 0;      // empty text after trim
    size_t dropped_no_sentences = 0;
};

struct Corpus {
    std::vector<Report> reports;
    std::vector<SentenceUnit> sentences;
    LoadSummary summary;
};

enum class CorpusFormat { JSONL, CSV };

namespace detail {

inline void add_report(Corpus& corpus, Report rep,
                       std::unordered_set<std::string>& seen) {
    if (!seen.insert(rep.id).second)
        throw DuplicateIdError("duplicate report id '" + rep.id + "'");
    rep.text = normalize_text(rep.text);
    ++corpus.summary.rows_read;
    if (rep.text.empty()) {
        ++corpus.summary.dropped_empty;
        return;
    }
    std::vector<std::string> parts = split_sentences(rep.text);
    if (parts.empty()) {
        ++corpus.summary.dropped_no_sentences;
        return;
    }
    for (size_t i = 0; i < parts.size(); ++i)
        corpus.sentences.push_back({rep.id, i, std::move(parts[i])});
    corpus.reports.push_back(std::move(rep));
    ++corpus.summary.reports_loaded;
}

inline std::string json_to_string(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

inline Corpus load_jsonl(std::istream& in, const std::string& path) {
    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        bool blank = true;
        for (char c : line)
            if (!is_ascii_space(c)) { blank = false; break; }
        if (blank) continue;

        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded())
            throw FormatError(path, lineno, "invalid JSON");
        if (!obj.is_object())
            throw FormatError(path, lineno, "expected a JSON object");
        if (!obj.contains("id"))
            throw FormatError(path, lineno, "missing key 'id'");
        if (!obj.contains("text") || !obj["text"].is_string())
            throw FormatError(path, lineno, "missing string key 'text'");

        Report rep;
        rep.id = json_to_string(obj["id"]);
        rep.text = obj["text"].get<std::string>();
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (it.key() == "id" || it.key() == "text") continue;
            if (it.key() == "condition" && it.value().is_string()) {
                rep.condition = parse_condition(it.value().get<std::string>());
                continue;
            }
            rep.metadata[it.key()] = json_to_string(it.value());
        }
        add_report(corpus, std::move(rep), seen);
    }
    return corpus;
}

inline Corpus load_csv(std::istream& in, const std::string& path) {
    CsvReader reader(in);
    reader.set_name(path);
    std::vector<std::string> header;
    if (!reader.next(header))
        throw FormatError(path, 1, "missing header row");
    long id_col = -1, text_col = -1, cond_col = -1;
    for (size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "id") id_col = static_cast<long>(c);
        else if (header[c] == "text") text_col = static_cast<long>(c);
        else if (header[c] == "condition") cond_col = static_cast<long>(c);
    }
    if (id_col < 0) throw FormatError(path, 1, "missing required column 'id'");
    if (text_col < 0) throw FormatError(path, 1, "missing required column 'text'");

    Corpus corpus;
    std::unordered_set<std::string> seen;
    std::vector<std::string> row;
    while (reader.next(row)) {
        size_t lineno = reader.line();
        if (row.size() != header.size())
            throw FormatError(path, lineno, "expected " + std::to_string(header.size()) +
                                                " fields, got " + std::to_string(row.size()));
        Report rep;
        rep.id = row[static_cast<size_t>(id_col)];
        rep.text = row[static_cast<size_t>(text_col)];
        if (cond_col >= 0) rep.condition = parse_condition(row[static_cast<size_t>(cond_col)]);
        for (size_t c = 0; c < header.size(); ++c) {
            if (static_cast<long>(c) == id_col || static_cast<long>(c) == text_col ||
                static_cast<long>(c) == cond_col)
                continue;
            rep.metadata[header[c]] = row[c];
        }
        add_report(corpus, std::move(rep), seen);
    }
    return corpus;
}

}  // namespace detail

inline Corpus load_corpus_stream(std::istream& in, CorpusFormat format,
                                 const std::string& path_for_errors = "<stream>") {
    return format == CorpusFormat::JSONL ? detail::load_jsonl(in, path_for_errors)
                                         : detail::load_csv(in, path_for_errors);
}

inline Corpus load_corpus(const std::string& path, CorpusFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFoundError("cannot open corpus file: " + path);
    return load_corpus_stream(in, format, path);
}

// Infer format from the file extension; ".csv" means CSV, everything else
// (.jsonl, .json, .ndjson, ...) is treated as JSONL.
inline CorpusFormat sniff_format(const std::string& path) {
    auto dot = path.find_last_of('.');
    std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    for (char& c : ext)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return ext == ".csv" ? CorpusFormat::CSV : CorpusFormat::JSONL;
}

}  // namespace mosaic
