#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"

namespace mosaic {

struct ParamGrid {
    std::vector<size_t> n_components{10, 15, 18, 20};
    std::vector<size_t> n_neighbors{15, 20, 25};
    std::vector<double> min_dist{0.0, 0.025, 0.1};
    std::vector<size_t> min_cluster_size{5, 10, 15};
    std::vector<size_t> min_samples{5, 10};
};

struct GridCombo {
    size_t n_components = 0;
    size_t n_neighbors = 0;
    double min_dist = 0.0;
    size_t min_cluster_size = 0;
    size_t min_samples = 0;

    auto key() const {
        return std::make_tuple(n_components, n_neighbors, min_dist,
                               min_cluster_size, min_samples);
    }
};

enum class RejectReason { NONE, TOO_FEW, TOO_MANY, DEGENERATE };

inline const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::TOO_FEW: return "TOO_FEW";
        case RejectReason::TOO_MANY: return "TOO_MANY";
        case RejectReason::DEGENERATE: return "DEGENERATE";
        default: return "NONE";
    }
}

struct GridSearchResult {
    GridCombo config;
    size_t n_topics = 0;
    double cv = std::numeric_limits<double>::quiet_NaN();
    double umass = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
    RejectReason reject_reason = RejectReason::DEGENERATE;
};

// What one combination's end-to-end evaluation reports back.
struct ComboEval {
    size_t n_topics = 0;
    double cv = std::numeric_limits<double>::quiet_NaN();
    double umass = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
};

using FitFn = std::function<ComboEval(const GridCombo&)>;

struct GridOutcome {
    // Sorted: accepted first, then cv descending, then fewer topics, then
    // config order. best is results[0] when anything was accepted.
    std::vector<GridSearchResult> results;
    long best_index = -1;  // -1: every combination rejected
};

inline std::vector<GridCombo> expand_grid(const ParamGrid& grid) {
    if (grid.n_components.empty() || grid.n_neighbors.empty() ||
        grid.min_dist.empty() || grid.min_cluster_size.empty() ||
        grid.min_samples.empty())
        throw ConfigError("every grid dimension needs at least one value");
    std::vector<GridCombo> combos;
    for (size_t nc : grid.n_components)
        for (size_t nn : grid.n_neighbors)
            for (double md : grid.min_dist)
                for (size_t mcs : grid.min_cluster_size)
                    for (size_t ms : grid.min_samples)
                        combos.push_back({nc, nn, md, mcs, ms});
    return combos;
}

// Evaluate every combination (optionally with a worker pool), filter by the
// admissible topic-count window, and rank. The fit function is injected so
// the filter/ranking logic is testable without running the real pipeline.
inline GridOutcome run_grid(const std::vector<GridCombo>& combos,
                            std::pair<size_t, size_t> bounds, const FitFn& fit,
                            size_t jobs = 1) {
    if (bounds.first < 1 || bounds.first >= bounds.second)
        throw ConfigError("topic bounds must satisfy 1 <= min < max");
    GridOutcome out;
    out.results.resize(combos.size());

    auto eval_one = [&](size_t idx) {
        GridSearchResult r;
        r.config = combos[idx];
        ComboEval ev;
        try {
            ev = fit(combos[idx]);
        } catch (const Error&) {
            ev.degenerate = true;
        }
        r.n_topics = ev.n_topics;
        r.cv = ev.cv;
        r.umass = ev.umass;
        if (ev.degenerate) {
            r.reject_reason = RejectReason::DEGENERATE;
        } else if (ev.n_topics < bounds.first) {
            r.reject_reason = RejectReason::TOO_FEW;
        } else if (ev.n_topics > bounds.second) {
            r.reject_reason = RejectReason::TOO_MANY;
        } else {
            r.reject_reason = RejectReason::NONE;
            r.accepted = true;
        }
        out.results[idx] = std::move(r);
    };

    if (jobs <= 1) {
        for (size_t i = 0; i < combos.size(); ++i) eval_one(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::thread> pool;
        for (size_t t = 0; t < std::min(jobs, combos.size()); ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < combos.size();
                     i = next.fetch_add(1))
                    eval_one(i);
            });
        for (auto& th : pool) th.join();
    }

    auto rank_cv = [](double cv) { return std::isnan(cv) ? -2.0 : cv; };
    std::stable_sort(out.results.begin(), out.results.end(),
                     [&](const GridSearchResult& a, const GridSearchResult& b) {
                         if (a.accepted != b.accepted) return a.accepted;
                         if (rank_cv(a.cv) != rank_cv(b.cv))
                             return rank_cv(a.cv) > rank_cv(b.cv);
                         if (a.n_topics != b.n_topics) return a.n_topics < b.n_topics;
                         return a.config.key() < b.config.key();
                     });
    if (!out.results.empty() && out.results[0].accepted) out.best_index = 0;
    return out;
}

// One CSV row per combination, in the ranked order.
inline std::string grid_ledger_csv(const GridOutcome& outcome) {
    std::string csv =
        "n_components,n_neighbors,min_dist,min_cluster_size,min_samples,"
        "n_topics,cv,umass,accepted,reject_reason\n";
    for (const auto& r : outcome.results) {
        csv += csv_join({std::to_string(r.config.n_components),
                         std::to_string(r.config.n_neighbors),
                         format_sig(r.config.min_dist, 6),
                         std::to_string(r.config.min_cluster_size),
                         std::to_string(r.config.min_samples),
                         std::to_string(r.n_topics), format_sig(r.cv, 6),
                         format_sig(r.umass, 6), r.accepted ? "true" : "false",
                         reject_reason_name(r.reject_reason)});
    }
    return csv;
}

}  // namespace mosaic
