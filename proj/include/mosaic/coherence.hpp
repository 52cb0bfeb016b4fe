#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mosaic/corpus.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/tokenize.hpp"

namespace mosaic {

struct CoherenceReport {
    double cv = 0.0;     // mean of defined per-topic scores, clipped to [0,1]
    double umass = 0.0;  // mean of defined per-topic scores, raw
    std::vector<double> per_topic_cv;     // NaN where undefined
    std::vector<double> per_topic_umass;  // NaN where undefined
    size_t window_size = 110;
    double epsilon = 1e-12;
    size_t skipped_pairs = 0;  // UMass pairs dropped because D(w_j) = 0
};

// Precomputed co-occurrence statistics: sentence-level document sets for
// UMass and sliding-window sets for C_v. A sentence shorter than the window
// contributes exactly one window. Term membership bitmaps are cached per
// word (topic word lists repeat heavily during grid search); the cache is
// mutex-guarded so combinations can score in parallel.
class CoherenceStats {
public:
    CoherenceStats(const std::vector<SentenceUnit>& sentences, size_t window_size)
        : window_size_(window_size) {
        if (window_size_ < 2) throw ConfigError("window_size must be >= 2");
        for (const auto& s : sentences) {
            std::vector<std::string> uni = tokenize(s.text);
            sentence_sets_.emplace_back();
            auto& sset = sentence_sets_.back();
            for (const auto& t : uni) sset.insert(t);
            for (size_t i = 0; i + 1 < uni.size(); ++i)
                sset.insert(uni[i] + " " + uni[i + 1]);

            size_t n_windows =
                uni.size() > window_size_ ? uni.size() - window_size_ + 1 : 1;
            for (size_t w = 0; w < n_windows; ++w) {
                size_t end = std::min(uni.size(), w + window_size_);
                window_sets_.emplace_back();
                auto& wset = window_sets_.back();
                for (size_t i = w; i < end; ++i) {
                    wset.insert(uni[i]);
                    if (i + 1 < end) wset.insert(uni[i] + " " + uni[i + 1]);
                }
            }
        }
    }

    size_t n_sentences() const { return sentence_sets_.size(); }
    size_t n_windows() const { return window_sets_.size(); }
    size_t window_size() const { return window_size_; }

    // Sentence-level document frequency.
    size_t doc_freq(const std::string& w) const { return word(w).doc_count; }
    size_t joint_doc_freq(const std::string& a, const std::string& b) const {
        return joint(word(a).doc_bits, word(b).doc_bits);
    }
    // Window probabilities.
    double p_window(const std::string& w) const {
        return static_cast<double>(word(w).win_count) /
               static_cast<double>(window_sets_.size());
    }
    double p_window_joint(const std::string& a, const std::string& b) const {
        return static_cast<double>(joint(word(a).win_bits, word(b).win_bits)) /
               static_cast<double>(window_sets_.size());
    }

private:
    struct WordBits {
        std::vector<uint64_t> doc_bits, win_bits;
        size_t doc_count = 0, win_count = 0;
    };

    const WordBits& word(const std::string& w) const {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = cache_.find(w);
        if (it != cache_.end()) return it->second;
        WordBits bits;
        bits.doc_bits.assign((sentence_sets_.size() + 63) / 64, 0);
        bits.win_bits.assign((window_sets_.size() + 63) / 64, 0);
        for (size_t i = 0; i < sentence_sets_.size(); ++i)
            if (sentence_sets_[i].count(w)) {
                bits.doc_bits[i / 64] |= uint64_t{1} << (i % 64);
                ++bits.doc_count;
            }
        for (size_t i = 0; i < window_sets_.size(); ++i)
            if (window_sets_[i].count(w)) {
                bits.win_bits[i / 64] |= uint64_t{1} << (i % 64);
                ++bits.win_count;
            }
        return cache_.emplace(w, std::move(bits)).first->second;
    }

    static size_t joint(const std::vector<uint64_t>& a,
                        const std::vector<uint64_t>& b) {
        size_t acc = 0;
        for (size_t i = 0; i < a.size(); ++i)
            acc += static_cast<size_t>(std::popcount(a[i] & b[i]));
        return acc;
    }

    size_t window_size_;
    std::vector<std::unordered_set<std::string>> sentence_sets_;
    std::vector<std::unordered_set<std::string>> window_sets_;
    mutable std::mutex mu_;
    mutable std::unordered_map<std::string, WordBits> cache_;
};

// UMass per-topic score with the fixed 2/(N(N-1)) normalization. Pairs whose
// conditioning word never occurs are skipped (counted); a topic where every
// pair is skipped is undefined (NaN). Natural logarithm throughout.
inline double umass_topic(const std::vector<std::string>& words,
                          const CoherenceStats& stats, double eps,
                          size_t* skipped = nullptr) {
    size_t n = words.size();
    if (n < 2) return 0.0;
    double sum = 0.0;
    size_t used = 0, skip = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            size_t dj = stats.doc_freq(words[j]);
            if (dj == 0) {
                ++skip;
                continue;
            }
            size_t dij = stats.joint_doc_freq(words[i], words[j]);
            sum += std::log((static_cast<double>(dij) + eps) /
                            static_cast<double>(dj));
            ++used;
        }
    }
    if (skipped) *skipped += skip;
    if (used == 0) return std::numeric_limits<double>::quiet_NaN();
    return 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1)) * sum;
}

// C_v per-topic score: NPMI vectors over the topic's own words (diagonal
// excluded), one-set segmentation against the sum vector, cosine averaged
// over words. Degenerate rules are explicit: a single-word topic scores 1,
// an NPMI cell with any zero probability is 0, and a word whose vector has
// near-zero norm contributes 0.
inline double cv_topic(const std::vector<std::string>& words,
                       const CoherenceStats& stats, double eps) {
    size_t n = words.size();
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    if (n == 1)
        return stats.p_window(words[0]) > 0.0
                   ? 1.0
                   : std::numeric_limits<double>::quiet_NaN();

    std::vector<double> p(n);
    bool any_present = false;
    for (size_t i = 0; i < n; ++i) {
        p[i] = stats.p_window(words[i]);
        if (p[i] > 0.0) any_present = true;
    }
    if (!any_present) return std::numeric_limits<double>::quiet_NaN();

    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (p[i] == 0.0 || p[j] == 0.0) continue;
            double pij = stats.p_window_joint(words[i], words[j]);
            if (pij == 0.0) continue;
            double npmi = std::log((pij + eps) / (p[i] * p[j])) /
                          (-std::log(pij + eps));
            npmi = std::clamp(npmi, -1.0, 1.0);
            v[i][j] = npmi;
            v[j][i] = npmi;
        }
    }

    std::vector<double> sum(n, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) sum[j] += v[i][j];

    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double nv = norm(v[i]);
        acc += nv < 1e-9 ? 0.0 : cosine_similarity(v[i], sum);
    }
    return acc / static_cast<double>(n);
}

// Scores every topic under both metrics. Topics whose score is undefined
// are excluded from the aggregates; if every topic is undefined for a
// metric the whole report is unusable and AllPairsSkipped is raised.
inline CoherenceReport score_coherence(
    const std::vector<std::vector<std::string>>& topic_words,
    const CoherenceStats& stats, double umass_eps = 1.0, double cv_eps = 1e-12) {
    if (topic_words.empty()) throw EmptyInputError("no topics to score");
    CoherenceReport rep;
    rep.window_size = stats.window_size();
    rep.epsilon = cv_eps;

    double cv_sum = 0.0, um_sum = 0.0;
    size_t cv_n = 0, um_n = 0;
    for (const auto& words : topic_words) {
        double um = umass_topic(words, stats, umass_eps, &rep.skipped_pairs);
        double cv = cv_topic(words, stats, cv_eps);
        rep.per_topic_umass.push_back(um);
        rep.per_topic_cv.push_back(cv);
        if (!std::isnan(um)) { um_sum += um; ++um_n; }
        if (!std::isnan(cv)) { cv_sum += cv; ++cv_n; }
    }
    if (cv_n == 0 || um_n == 0)
        throw AllPairsSkippedError(
            "every topic was undefined under at least one coherence metric");
    rep.umass = um_sum / static_cast<double>(um_n);
    rep.cv = std::clamp(cv_sum / static_cast<double>(cv_n), 0.0, 1.0);
    return rep;
}

}  // namespace mosaic
