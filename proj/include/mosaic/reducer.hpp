#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mosaic/errors.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

enum class Metric { EUCLIDEAN, COSINE };

struct ReducerConfig {
    size_t n_components = 15;
    size_t n_neighbors = 15;
    double min_dist = 0.1;
    size_t n_epochs = 500;
    uint64_t seed = 0;
    Metric metric = Metric::COSINE;
};

struct KnnGraph {
    std::vector<std::vector<size_t>> indices;    // n x k, ties broken by lower index
    std::vector<std::vector<double>> distances;  // sorted ascending per row
};

struct FuzzyEdge {
    size_t i, j;  // i < j
    double weight;
};

struct FuzzyGraph {
    size_t n_points = 0;
    std::vector<FuzzyEdge> edges;  // sorted by (i, j)
    std::vector<double> rho;
    std::vector<double> sigma;
    size_t degenerate_points = 0;  // neighborhoods where all neighbors coincide
};

inline double pair_distance(std::span<const double> a, std::span<const double> b,
                            Metric metric) {
    return metric == Metric::COSINE ? cosine_distance(a, b)
                                    : euclidean_distance(a, b);
}

// Exact brute-force kNN. O(n^2) on purpose: at this scale it is fast enough
// and has no approximation noise to reason about in tests.
inline KnnGraph knn_graph(const Matrix& X, size_t k, Metric metric,
                          size_t n_jobs = 1) {
    size_t n = X.rows();
    if (k == 0 || k >= n)
        throw TooFewPointsError("need more points than neighbors: n=" +
                                std::to_string(n) + " k=" + std::to_string(k));
    KnnGraph g;
    g.indices.assign(n, {});
    g.distances.assign(n, {});

    auto row_job = [&](size_t i) {
        std::vector<std::pair<double, size_t>> cand;
        cand.reserve(n - 1);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back(pair_distance(X.row(i), X.row(j), metric), j);
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k),
                          cand.end());
        g.indices[i].resize(k);
        g.distances[i].resize(k);
        for (size_t m = 0; m < k; ++m) {
            g.distances[i][m] = cand[m].first;
            g.indices[i][m] = cand[m].second;
        }
    };

    if (n_jobs <= 1) {
        for (size_t i = 0; i < n; ++i) row_job(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (size_t t = 0; t < n_jobs; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                    row_job(i);
            });
        for (auto& th : pool) th.join();
    }
    return g;
}

// Per-point adaptive bandwidths and symmetrized membership graph.
inline FuzzyGraph smooth_weights(const KnnGraph& knn, size_t k) {
    size_t n = knn.indices.size();
    FuzzyGraph graph;
    graph.n_points = n;
    graph.rho.assign(n, 0.0);
    graph.sigma.assign(n, 1.0);

    double target = std::log2(static_cast<double>(k));
    std::map<std::pair<size_t, size_t>, std::pair<double, double>> directed;

    for (size_t i = 0; i < n; ++i) {
        const auto& dist = knn.distances[i];
        double rho = 0.0;
        for (double d : dist)
            if (d > 0.0) { rho = d; break; }
        graph.rho[i] = rho;

        double sigma = 1.0;
        if (rho == 0.0 && dist.back() == 0.0) {
            // Every neighbor coincides with the point; weights all 1.
            ++graph.degenerate_points;
            graph.sigma[i] = 1.0;
        } else {
            auto weight_sum = [&](double s) {
                double acc = 0.0;
                for (double d : dist) acc += std::exp(-std::max(0.0, d - rho) / s);
                return acc;
            };
            double lo = 0.0, hi = 1.0;
            while (weight_sum(hi) < target && hi < 1e12) hi *= 2.0;
            sigma = hi;
            for (int it = 0; it < 64; ++it) {
                double mid = (lo + hi) / 2.0;
                double val = weight_sum(mid);
                if (std::fabs(val - target) <= 1e-5) { sigma = mid; break; }
                if (val > target) hi = mid; else lo = mid;
                sigma = mid;
            }
            // Floor from the reference scheme, keeps weights usable when the
            // root is unreachable (many duplicate neighbors).
            double mean_d = std::accumulate(dist.begin(), dist.end(), 0.0) /
                            static_cast<double>(dist.size());
            sigma = std::max(sigma, 1e-3 * std::max(mean_d, 1e-12));
            graph.sigma[i] = sigma;
        }

        for (size_t m = 0; m < knn.indices[i].size(); ++m) {
            size_t j = knn.indices[i][m];
            double w = std::exp(-std::max(0.0, dist[m] - rho) / graph.sigma[i]);
            auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
            auto& slot = directed[key];
            if (i < j) slot.first = std::max(slot.first, w);
            else slot.second = std::max(slot.second, w);
        }
    }

    graph.edges.reserve(directed.size());
    for (const auto& [key, ab] : directed) {
        double w = ab.first + ab.second - ab.first * ab.second;  // t-conorm
        if (w > 0.0) graph.edges.push_back({key.first, key.second, w});
    }
    return graph;
}

// Least-squares fit of 1/(1 + a d^{2b}) to the min_dist kernel target over
// d in [0,3] (300 samples): coarse grid then Levenberg-Marquardt, both
// deterministic.
inline std::pair<double, double> fit_ab(double min_dist) {
    constexpr int kSamples = 300;
    std::vector<double> xs(kSamples), ys(kSamples);
    for (int s = 0; s < kSamples; ++s) {
        double d = 3.0 * s / (kSamples - 1);
        xs[s] = d;
        ys[s] = d <= min_dist ? 1.0 : std::exp(-(d - min_dist));
    }

    auto sse = [&](double a, double b) {
        double acc = 0.0;
        for (int s = 0; s < kSamples; ++s) {
            double f = 1.0 / (1.0 + a * std::pow(xs[s], 2.0 * b));
            double r = f - ys[s];
            acc += r * r;
        }
        return acc;
    };

    double best_a = 1.0, best_b = 1.0, best = sse(1.0, 1.0);
    for (int ia = 0; ia < 60; ++ia) {
        double a = 0.05 * (ia + 1);  // 0.05 .. 3.0
        for (int ib = 0; ib < 40; ++ib) {
            double b = 0.05 * (ib + 1);  // 0.05 .. 2.0
            double v = sse(a, b);
            if (v < best) { best = v; best_a = a; best_b = b; }
        }
    }

    double a = best_a, b = best_b, lambda = 1e-3;
    for (int it = 0; it < 200; ++it) {
        double jtj00 = 0, jtj01 = 0, jtj11 = 0, jtr0 = 0, jtr1 = 0;
        for (int s = 0; s < kSamples; ++s) {
            double d = xs[s];
            double p = d > 0.0 ? std::pow(d, 2.0 * b) : 0.0;
            double denom = 1.0 + a * p;
            double f = 1.0 / denom;
            double r = f - ys[s];
            double da = -p / (denom * denom);
            double db = d > 0.0 ? -2.0 * a * p * std::log(d) / (denom * denom) : 0.0;
            jtj00 += da * da;
            jtj01 += da * db;
            jtj11 += db * db;
            jtr0 += da * r;
            jtr1 += db * r;
        }
        double m00 = jtj00 * (1.0 + lambda), m11 = jtj11 * (1.0 + lambda);
        double det = m00 * m11 - jtj01 * jtj01;
        if (std::fabs(det) < 1e-300) break;
        double step_a = -(m11 * jtr0 - jtj01 * jtr1) / det;
        double step_b = -(-jtj01 * jtr0 + m00 * jtr1) / det;
        double na = a + step_a, nb = b + step_b;
        if (na <= 0.0 || nb <= 0.0 || sse(na, nb) >= best) {
            lambda *= 3.0;
            if (lambda > 1e12) break;
            continue;
        }
        a = na;
        b = nb;
        best = sse(a, b);
        lambda = std::max(lambda / 3.0, 1e-12);
        if (std::fabs(step_a) + std::fabs(step_b) < 1e-12) break;
    }
    return {a, b};
}

// Eigenvectors 1..max_dim (skipping the trivial one) of the symmetric
// normalized Laplacian of the membership graph. Columns are sign-fixed
// (largest-magnitude entry positive) and left unscaled so callers can slice
// any prefix of components.
inline Matrix spectral_eigenvectors(const FuzzyGraph& graph, size_t max_dim) {
    size_t n = graph.n_points;
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<long>(n),
                                              static_cast<long>(n));
    for (const auto& e : graph.edges) {
        W(static_cast<long>(e.i), static_cast<long>(e.j)) = e.weight;
        W(static_cast<long>(e.j), static_cast<long>(e.i)) = e.weight;
    }
    Eigen::VectorXd deg = W.rowwise().sum();
    Eigen::VectorXd dinv = deg.unaryExpr(
        [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 0.0; });
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(static_cast<long>(n),
                                                  static_cast<long>(n)) -
                        dinv.asDiagonal() * W * dinv.asDiagonal();
    // Symmetrize away rounding asymmetry before the solver.
    L = ((L + L.transpose()) / 2.0).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L);
    size_t dim = std::min(max_dim, n >= 2 ? n - 1 : size_t{0});
    Matrix out(n, dim);
    for (size_t c = 0; c < dim; ++c) {
        Eigen::VectorXd v = solver.eigenvectors().col(static_cast<long>(c + 1));
        long arg = 0;
        double mx = -1.0;
        for (long r = 0; r < v.size(); ++r)
            if (std::fabs(v[r]) > mx) { mx = std::fabs(v[r]); arg = r; }
        if (v[arg] < 0.0) v = -v;
        for (size_t r = 0; r < n; ++r) out.at(r, c) = v[static_cast<long>(r)];
    }
    return out;
}

namespace detail {

inline double clip4(double v) { return v > 4.0 ? 4.0 : (v < -4.0 ? -4.0 : v); }

}  // namespace detail

// Stochastic gradient layout with the per-edge sampling schedule of the
// reference algorithm: each edge fires every max_w/w epochs, five negative
// samples per positive (head and tail each repel their own draws), learning
// rate annealed linearly from 1 to 0. Single-threaded by contract so a seed
// pins the exact result.
inline Matrix optimize_layout(const FuzzyGraph& graph, Matrix init,
                              const ReducerConfig& cfg, double a, double b) {
    constexpr double kNegativeRate = 5.0;
    constexpr double kGamma = 1.0;
    size_t n = graph.n_points;
    size_t dim = init.cols();
    Matrix& emb = init;

    double max_w = 0.0;
    for (const auto& e : graph.edges) max_w = std::max(max_w, e.weight);
    size_t n_edges = graph.edges.size();
    std::vector<double> eps(n_edges), eons(n_edges), epns(n_edges), eonns(n_edges);
    for (size_t e = 0; e < n_edges; ++e) {
        eps[e] = max_w / graph.edges[e].weight;
        eons[e] = eps[e];
        epns[e] = eps[e] / kNegativeRate;
        eonns[e] = epns[e];
    }

    SplitMix64 rng(derive_seed(cfg.seed, "layout"));
    double n_epochs = static_cast<double>(cfg.n_epochs);

    auto repel = [&](size_t head, size_t skip, double alpha) {
        size_t t = static_cast<size_t>(rng.next_below(n));
        if (t == head || t == skip) return;
        double* xh = &emb.at(head, 0);
        const double* xt = &emb.at(t, 0);
        double d2 = 0.0;
        for (size_t c = 0; c < dim; ++c) {
            double diff = xh[c] - xt[c];
            d2 += diff * diff;
        }
        double coef = 2.0 * kGamma * b /
                      ((0.001 + d2) * (1.0 + a * std::pow(d2, b)));
        for (size_t c = 0; c < dim; ++c)
            xh[c] += alpha * detail::clip4(coef * (xh[c] - xt[c]));
    };

    for (size_t epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
        double alpha = 1.0 - static_cast<double>(epoch - 1) / n_epochs;
        double en = static_cast<double>(epoch);
        for (size_t e = 0; e < n_edges; ++e) {
            if (eons[e] > en) continue;
            size_t i = graph.edges[e].i;
            size_t j = graph.edges[e].j;
            double* xi = &emb.at(i, 0);
            double* xj = &emb.at(j, 0);
            double d2 = 0.0;
            for (size_t c = 0; c < dim; ++c) {
                double diff = xi[c] - xj[c];
                d2 += diff * diff;
            }
            if (d2 > 0.0) {
                double coef = -2.0 * a * b * std::pow(d2, b - 1.0) /
                              (1.0 + a * std::pow(d2, b));
                for (size_t c = 0; c < dim; ++c) {
                    double g = detail::clip4(coef * (xi[c] - xj[c]));
                    xi[c] += alpha * g;
                    xj[c] -= alpha * g;
                }
            }
            eons[e] += eps[e];

            int n_neg = static_cast<int>((en - eonns[e]) / epns[e]);
            for (int s = 0; s < n_neg; ++s) repel(i, j, alpha);
            for (int s = 0; s < n_neg; ++s) repel(j, i, alpha);
            eonns[e] += n_neg * epns[e];
        }
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < dim; ++c)
                if (!std::isfinite(emb.at(r, c)))
                    throw NonFiniteGradientError(
                        "non-finite coordinate at epoch " + std::to_string(epoch) +
                        " point " + std::to_string(r));
    }
    return init;
}

// Full reduction. Optional precomputed kNN graph and spectral eigenvectors
// let the grid search share work between combinations that only differ in
// cluster parameters; passing them is purely an optimization and never
// changes the result.
inline Matrix reduce_embedding(const Matrix& X, const ReducerConfig& cfg,
                               size_t n_jobs = 1, const KnnGraph* knn_in = nullptr,
                               const Matrix* eigvecs_in = nullptr) {
    size_t n = X.rows();
    if (cfg.n_components < 2 || cfg.n_components >= X.cols())
        throw ConfigError("n_components must be in [2, input dim)");
    if (cfg.n_neighbors < 2 || cfg.n_neighbors >= n)
        throw ConfigError("n_neighbors must be in [2, n points)");
    if (cfg.min_dist < 0.0 || cfg.min_dist >= 1.0)
        throw ConfigError("min_dist must be in [0, 1)");

    KnnGraph local_knn;
    const KnnGraph* knn = knn_in;
    if (!knn) {
        local_knn = knn_graph(X, cfg.n_neighbors, cfg.metric, n_jobs);
        knn = &local_knn;
    }
    FuzzyGraph graph = smooth_weights(*knn, cfg.n_neighbors);

    Matrix init(n, cfg.n_components);
    if (n <= 2000) {
        Matrix local_eig;
        const Matrix* eig = eigvecs_in;
        if (!eig || eig->cols() < cfg.n_components) {
            local_eig = spectral_eigenvectors(graph, cfg.n_components);
            eig = &local_eig;
        }
        double mx = 0.0;
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < cfg.n_components; ++c)
                mx = std::max(mx, std::fabs(eig->at(r, c)));
        double scale = mx > 0.0 ? 10.0 / mx : 1.0;
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < cfg.n_components; ++c)
                init.at(r, c) = eig->at(r, c) * scale;
    } else {
        SplitMix64 rng(derive_seed(cfg.seed, "random-init"));
        for (size_t r = 0; r < n; ++r)
            for (size_t c = 0; c < cfg.n_components; ++c)
                init.at(r, c) = rng.next_range(-10.0, 10.0);
    }

    auto [a, b] = fit_ab(cfg.min_dist);
    return optimize_layout(graph, std::move(init), cfg, a, b);
}

}  // namespace mosaic
