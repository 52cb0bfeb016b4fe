#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/clusterer.hpp"
#include "mosaic/coherence.hpp"
#include "mosaic/corpus.hpp"
#include "mosaic/csv.hpp"
#include "mosaic/embedder.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/topics.hpp"

namespace mosaic {

inline void write_text_file(const std::string& path, const std::string& content) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

inline std::string read_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json parse_artifact_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_artifact(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path, 0, e.what());
    }
}

// ---- corpus.json ----

inline std::string corpus_json(const Corpus& corpus) {
    nlohmann::json j;
    j["reports"] = nlohmann::json::array();
    for (const auto& r : corpus.reports) {
        nlohmann::json jr;
        jr["id"] = r.id;
        jr["condition"] = condition_name(r.condition);
        jr["text"] = r.text;
        jr["metadata"] = r.metadata;
        j["reports"].push_back(std::move(jr));
    }
    j["sentences"] = nlohmann::json::array();
    for (const auto& s : corpus.sentences)
        j["sentences"].push_back(
            {{"report_id", s.report_id}, {"index", s.index}, {"text", s.text}});
    j["summary"] = {{"rows_read", corpus.summary.rows_read},
                    {"reports_loaded", corpus.summary.reports_loaded},
                    {"dropped_empty", corpus.summary.dropped_empty},
                    {"dropped_no_sentences", corpus.summary.dropped_no_sentences}};
    return j.dump(2) + "\n";
}

inline Corpus corpus_from_json(const nlohmann::json& j) {
    Corpus corpus;
    for (const auto& jr : j.at("reports")) {
        Report r;
        r.id = jr.at("id").get<std::string>();
        r.condition = parse_condition(jr.at("condition").get<std::string>());
        r.text = jr.at("text").get<std::string>();
        if (jr.contains("metadata"))
            for (const auto& [k, v] : jr.at("metadata").items())
                r.metadata[k] = v.get<std::string>();
        corpus.reports.push_back(std::move(r));
    }
    for (const auto& js : j.at("sentences"))
        corpus.sentences.push_back({js.at("report_id").get<std::string>(),
                                    js.at("index").get<size_t>(),
                                    js.at("text").get<std::string>()});
    const auto& s = j.at("summary");
    corpus.summary = {s.at("rows_read").get<size_t>(),
                      s.at("reports_loaded").get<size_t>(),
                      s.at("dropped_empty").get<size_t>(),
                      s.at("dropped_no_sentences").get<size_t>()};
    return corpus;
}

// ---- embeddings.json (full-precision stage artifact; must round-trip) ----

inline std::string embeddings_json(const EmbeddingMatrix& emb) {
    nlohmann::json j;
    j["provider_tag"] = emb.provider_tag;
    j["rows"] = emb.vectors.rows();
    j["cols"] = emb.vectors.cols();
    nlohmann::json data = nlohmann::json::array();
    for (size_t i = 0; i < emb.vectors.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t c = 0; c < emb.vectors.cols(); ++c)
            row.push_back(emb.vectors.at(i, c));
        data.push_back(std::move(row));
    }
    j["vectors"] = std::move(data);
    return j.dump() + "\n";
}

inline EmbeddingMatrix embeddings_from_json(const nlohmann::json& j) {
    EmbeddingMatrix emb;
    emb.provider_tag = j.at("provider_tag").get<std::string>();
    size_t rows = j.at("rows").get<size_t>(), cols = j.at("cols").get<size_t>();
    emb.vectors = Matrix(rows, cols);
    const auto& data = j.at("vectors");
    for (size_t i = 0; i < rows; ++i)
        for (size_t c = 0; c < cols; ++c)
            emb.vectors.at(i, c) = data.at(i).at(c).get<double>();
    return emb;
}

// ---- fit.json ----

struct FitArtifact {
    bool grid_mode = false;
    size_t n_components = 0, n_neighbors = 0;
    double min_dist = 0.0;
    size_t min_cluster_size = 0, min_samples = 0;
    size_t n_topics = 0;
    double cv = 0.0, umass = 0.0;
    ClusterAssignment assignment;  // after outlier reduction
};

inline std::string fit_json(const FitArtifact& fit) {
    nlohmann::json j;
    j["mode"] = fit.grid_mode ? "grid" : "single";
    j["config"] = {{"n_components", fit.n_components},
                   {"n_neighbors", fit.n_neighbors},
                   {"min_dist", fit.min_dist},
                   {"min_cluster_size", fit.min_cluster_size},
                   {"min_samples", fit.min_samples}};
    j["n_topics"] = fit.n_topics;
    j["cv"] = round_sig(fit.cv, 6);
    j["umass"] = round_sig(fit.umass, 6);
    j["labels"] = fit.assignment.labels;
    nlohmann::json probs = nlohmann::json::array();
    for (double p : fit.assignment.probabilities)
        probs.push_back(round_sig(p, 4));
    j["probabilities"] = std::move(probs);
    return j.dump(2) + "\n";
}

inline FitArtifact fit_from_json(const nlohmann::json& j) {
    FitArtifact fit;
    fit.grid_mode = j.at("mode").get<std::string>() == "grid";
    const auto& c = j.at("config");
    fit.n_components = c.at("n_components").get<size_t>();
    fit.n_neighbors = c.at("n_neighbors").get<size_t>();
    fit.min_dist = c.at("min_dist").get<double>();
    fit.min_cluster_size = c.at("min_cluster_size").get<size_t>();
    fit.min_samples = c.at("min_samples").get<size_t>();
    fit.n_topics = j.at("n_topics").get<size_t>();
    fit.cv = j.at("cv").get<double>();
    fit.umass = j.at("umass").get<double>();
    fit.assignment.labels = j.at("labels").get<std::vector<int>>();
    fit.assignment.probabilities =
        j.at("probabilities").get<std::vector<double>>();
    return fit;
}

// ---- topics.json (full topic model) ----

inline std::string topics_json(const TopicModel& model) {
    nlohmann::json j;
    j["outlier_count"] = model.outlier_count;
    j["topics"] = nlohmann::json::array();
    for (const auto& t : model.topics) {
        nlohmann::json jt;
        jt["id"] = t.id;
        jt["label"] = t.label;
        jt["size"] = t.size;
        jt["keywords"] = nlohmann::json::array();
        for (const auto& [term, w] : t.keywords)
            jt["keywords"].push_back({{"term", term}, {"weight", round_sig(w, 6)}});
        jt["representatives"] = t.representatives;
        j["topics"].push_back(std::move(jt));
    }
    j["vocabulary"] = {{"terms", model.vocabulary.terms},
                       {"df", model.vocabulary.df}};
    nlohmann::json w = nlohmann::json::array();
    for (size_t i = 0; i < model.ctfidf.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (size_t c = 0; c < model.ctfidf.cols(); ++c)
            row.push_back(round_sig(model.ctfidf.at(i, c), 6));
        w.push_back(std::move(row));
    }
    j["ctfidf"] = std::move(w);
    j["assignment"] = nlohmann::json::object();
    j["assignment"]["labels"] = model.assignment.labels;
    nlohmann::json probs = nlohmann::json::array();
    for (double p : model.assignment.probabilities)
        probs.push_back(round_sig(p, 4));
    j["assignment"]["probabilities"] = std::move(probs);
    return j.dump(2) + "\n";
}

inline TopicModel topic_model_from_json(const nlohmann::json& j) {
    TopicModel model;
    model.outlier_count = j.at("outlier_count").get<size_t>();
    for (const auto& jt : j.at("topics")) {
        Topic t;
        t.id = jt.at("id").get<int>();
        t.label = jt.at("label").get<std::string>();
        t.size = jt.at("size").get<size_t>();
        for (const auto& kw : jt.at("keywords"))
            t.keywords.emplace_back(kw.at("term").get<std::string>(),
                                    kw.at("weight").get<double>());
        t.representatives = jt.at("representatives").get<std::vector<size_t>>();
        model.topics.push_back(std::move(t));
    }
    model.vocabulary.terms =
        j.at("vocabulary").at("terms").get<std::vector<std::string>>();
    model.vocabulary.df =
        j.at("vocabulary").at("df").get<std::vector<size_t>>();
    for (size_t i = 0; i < model.vocabulary.terms.size(); ++i)
        model.vocabulary.index[model.vocabulary.terms[i]] = i;
    const auto& w = j.at("ctfidf");
    size_t rows = w.size(), cols = rows ? w.at(0).size() : 0;
    model.ctfidf = Matrix(rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t c = 0; c < cols; ++c)
            model.ctfidf.at(i, c) = w.at(i).at(c).get<double>();
    model.assignment.labels = j.at("assignment").at("labels").get<std::vector<int>>();
    model.assignment.probabilities =
        j.at("assignment").at("probabilities").get<std::vector<double>>();
    return model;
}

// ---- coherence.json ----

inline std::string coherence_json(const CoherenceReport& rep) {
    nlohmann::json j;
    j["cv"] = round_sig(rep.cv, 6);
    j["umass"] = round_sig(rep.umass, 6);
    j["window_size"] = rep.window_size;
    j["epsilon"] = rep.epsilon;
    j["skipped_pairs"] = rep.skipped_pairs;
    nlohmann::json pc = nlohmann::json::array(), pu = nlohmann::json::array();
    for (double v : rep.per_topic_cv)
        pc.push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(round_sig(v, 6)));
    for (double v : rep.per_topic_umass)
        pu.push_back(std::isnan(v) ? nlohmann::json() : nlohmann::json(round_sig(v, 6)));
    j["per_topic_cv"] = std::move(pc);
    j["per_topic_umass"] = std::move(pu);
    return j.dump(2) + "\n";
}

// ---- assignments.csv ----

inline std::string assignments_csv(const Corpus& corpus,
                                   const ClusterAssignment& assignment) {
    std::string out = "sentence_id,report_id,topic_id,probability\n";
    for (size_t i = 0; i < corpus.sentences.size(); ++i) {
        out += csv_join({std::to_string(i), corpus.sentences[i].report_id,
                         std::to_string(assignment.labels[i]),
                         format_sig(assignment.probabilities[i], 4)});
    }
    return out;
}

}  // namespace mosaic
