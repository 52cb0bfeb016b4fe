#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mosaic/clusterer.hpp"
#include "mosaic/corpus.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/tokenize.hpp"

namespace mosaic {

struct TopicConfig {
    size_t top_k_keywords = 10;  // hard cap 15
    size_t representatives = 3;
    size_t min_df = 2;           // sentence-level document frequency floor
    double outlier_threshold = 0.3;
};

struct Vocabulary {
    std::vector<std::string> terms;  // lexicographic
    std::vector<size_t> df;          // sentence-level document frequency
    std::unordered_map<std::string, size_t> index;
};

struct Topic {
    int id = 0;
    std::vector<std::pair<std::string, double>> keywords;  // weight descending
    size_t size = 0;
    std::vector<size_t> representatives;  // sentence indices
    std::string label;
};

struct TopicModel {
    std::vector<Topic> topics;
    Matrix ctfidf;  // m x |V|
    Vocabulary vocabulary;
    size_t outlier_count = 0;
    ClusterAssignment assignment;
};

// Vocabulary + per-class counts over clustered (non-noise) sentences.
// min_df filters on the number of distinct sentences containing a term.
inline std::pair<Vocabulary, Matrix> build_vocabulary(
    const std::vector<SentenceUnit>& sentences, const ClusterAssignment& assignment,
    size_t min_df = 2) {
    int m = 0;
    for (int l : assignment.labels) m = std::max(m, l + 1);
    if (m == 0) throw EmptyVocabularyError("no clustered sentences to build vocabulary from");

    std::vector<std::vector<std::string>> grams(sentences.size());
    std::map<std::string, size_t> df;
    for (size_t i = 0; i < sentences.size(); ++i) {
        if (assignment.labels[i] < 0) continue;
        grams[i] = tokenize_with_bigrams(sentences[i].text);
        std::unordered_set<std::string> uniq(grams[i].begin(), grams[i].end());
        for (const auto& t : uniq) ++df[t];
    }

    Vocabulary vocab;
    for (const auto& [term, n] : df) {
        if (n < min_df) continue;
        vocab.index[term] = vocab.terms.size();
        vocab.terms.push_back(term);
        vocab.df.push_back(n);
    }
    if (vocab.terms.empty())
        throw EmptyVocabularyError("all terms filtered out (stopwords/min_df)");

    Matrix counts(static_cast<size_t>(m), vocab.terms.size());
    for (size_t i = 0; i < sentences.size(); ++i) {
        int l = assignment.labels[i];
        if (l < 0) continue;
        for (const auto& t : grams[i]) {
            auto it = vocab.index.find(t);
            if (it != vocab.index.end())
                counts.at(static_cast<size_t>(l), it->second) += 1.0;
        }
    }
    return {std::move(vocab), std::move(counts)};
}

// Class-based TF-IDF: W[c,t] = tf(c,t) * ln(1 + A / f_t) with tf the
// within-class term share, f_t the corpus-wide count of t, and A the
// average class total.
inline Matrix ctfidf(const Matrix& counts) {
    size_t m = counts.rows(), v = counts.cols();
    std::vector<double> class_total(m, 0.0), term_total(v, 0.0);
    double grand = 0.0;
    for (size_t c = 0; c < m; ++c)
        for (size_t t = 0; t < v; ++t) {
            double x = counts.at(c, t);
            class_total[c] += x;
            term_total[t] += x;
            grand += x;
        }
    double avg = grand / static_cast<double>(m);

    Matrix w(m, v);
    for (size_t c = 0; c < m; ++c) {
        if (class_total[c] == 0.0) continue;
        for (size_t t = 0; t < v; ++t) {
            if (counts.at(c, t) == 0.0 || term_total[t] == 0.0) continue;
            double tf = counts.at(c, t) / class_total[c];
            w.at(c, t) = tf * std::log(1.0 + avg / term_total[t]);
        }
    }
    return w;
}

// The r member sentences closest (cosine) to the topic centroid; ties by
// lower sentence index.
inline std::vector<size_t> select_representatives(const std::vector<size_t>& members,
                                                  const Matrix& embeddings, size_t r) {
    std::vector<double> centroid(embeddings.cols(), 0.0);
    for (size_t idx : members) {
        auto row = embeddings.row(idx);
        for (size_t c = 0; c < centroid.size(); ++c) centroid[c] += row[c];
    }
    for (double& x : centroid) x /= static_cast<double>(members.size());

    std::vector<std::pair<double, size_t>> scored;
    scored.reserve(members.size());
    for (size_t idx : members)
        scored.emplace_back(-cosine_similarity(embeddings.row(idx), centroid), idx);
    std::sort(scored.begin(), scored.end());
    std::vector<size_t> out;
    for (size_t i = 0; i < std::min(r, scored.size()); ++i)
        out.push_back(scored[i].second);
    return out;
}

// Reassign each outlier to the nearest topic centroid when the similarity
// clears the threshold. Only the -1 points move; centroids are taken from
// the incoming assignment, fixed for the whole pass. The similarity itself
// becomes the membership probability, so only strictly positive matches
// are eligible (a zero probability must keep meaning "outlier").
inline ClusterAssignment reduce_outliers(const ClusterAssignment& assignment,
                                         const Matrix& embeddings, double threshold) {
    if (threshold < 0.0 || threshold > 1.0)
        throw ConfigError("outlier threshold must be in [0, 1]");
    size_t n = assignment.labels.size();
    int m = 0;
    for (int l : assignment.labels) m = std::max(m, l + 1);
    ClusterAssignment out = assignment;
    if (m == 0) return out;

    size_t dim = embeddings.cols();
    std::vector<std::vector<double>> centroids(static_cast<size_t>(m),
                                               std::vector<double>(dim, 0.0));
    std::vector<size_t> sizes(static_cast<size_t>(m), 0);
    for (size_t i = 0; i < n; ++i) {
        int l = assignment.labels[i];
        if (l < 0) continue;
        auto row = embeddings.row(i);
        for (size_t c = 0; c < dim; ++c) centroids[static_cast<size_t>(l)][c] += row[c];
        ++sizes[static_cast<size_t>(l)];
    }
    for (int c = 0; c < m; ++c)
        if (sizes[static_cast<size_t>(c)] > 0)
            for (double& x : centroids[static_cast<size_t>(c)])
                x /= static_cast<double>(sizes[static_cast<size_t>(c)]);

    for (size_t i = 0; i < n; ++i) {
        if (assignment.labels[i] >= 0) continue;
        int best = -1;
        double best_sim = -2.0;
        for (int c = 0; c < m; ++c) {
            double s = cosine_similarity(embeddings.row(i),
                                         centroids[static_cast<size_t>(c)]);
            if (s > best_sim) { best_sim = s; best = c; }
        }
        if (best >= 0 && best_sim >= threshold && best_sim > 0.0) {
            out.labels[i] = best;
            out.probabilities[i] = std::min(best_sim, 1.0);
        }
    }
    return out;
}

// Assemble the topic model for an assignment: vocabulary, c-TF-IDF matrix,
// per-topic keywords, sizes, and representative sentences.
inline TopicModel extract_topics(const std::vector<SentenceUnit>& sentences,
                                 const Matrix& embeddings,
                                 const ClusterAssignment& assignment,
                                 const TopicConfig& cfg) {
    if (cfg.top_k_keywords < 1 || cfg.top_k_keywords > 15)
        throw ConfigError("top_k_keywords must be in [1, 15]");
    if (cfg.representatives < 1)
        throw ConfigError("representatives must be >= 1");

    TopicModel model;
    model.assignment = assignment;
    auto [vocab, counts] = build_vocabulary(sentences, assignment, cfg.min_df);
    model.vocabulary = std::move(vocab);
    model.ctfidf = ctfidf(counts);

    int m = static_cast<int>(model.ctfidf.rows());
    std::vector<std::vector<size_t>> members(static_cast<size_t>(m));
    size_t outliers = 0;
    for (size_t i = 0; i < assignment.labels.size(); ++i) {
        int l = assignment.labels[i];
        if (l < 0) ++outliers;
        else members[static_cast<size_t>(l)].push_back(i);
    }
    model.outlier_count = outliers;

    for (int c = 0; c < m; ++c) {
        Topic topic;
        topic.id = c;
        topic.size = members[static_cast<size_t>(c)].size();

        std::vector<std::pair<double, std::string>> ranked;
        for (size_t t = 0; t < model.vocabulary.terms.size(); ++t) {
            double w = model.ctfidf.at(static_cast<size_t>(c), t);
            if (w > 0.0) ranked.emplace_back(-w, model.vocabulary.terms[t]);
        }
        std::sort(ranked.begin(), ranked.end());
        for (size_t k = 0; k < std::min(cfg.top_k_keywords, ranked.size()); ++k)
            topic.keywords.emplace_back(ranked[k].second, -ranked[k].first);

        if (!members[static_cast<size_t>(c)].empty())
            topic.representatives = select_representatives(
                members[static_cast<size_t>(c)], embeddings, cfg.representatives);
        model.topics.push_back(std::move(topic));
    }
    return model;
}

}  // namespace mosaic
