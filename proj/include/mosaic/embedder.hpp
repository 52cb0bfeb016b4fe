#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/corpus.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/http.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

enum class Provider { REMOTE, LOCAL_HASH };

struct EmbedderConfig {
    Provider provider = Provider::LOCAL_HASH;
    std::string endpoint_url;
    std::string model_name = "sentence-transformers/all-mpnet-base-v2";
    size_t batch_size = 32;
    uint64_t seed = 0;          // LOCAL_HASH only
    size_t local_dim = 768;     // LOCAL_HASH only
    bool normalize = true;      // L2-normalize remote vectors after retrieval
    size_t batch_parallelism = 4;
    int max_attempts = 3;
    int backoff_ms = 1000;      // doubled after each failed attempt: 1s, 2s, 4s
};

struct EmbeddingMatrix {
    Matrix vectors;
    std::string provider_tag;
};

namespace detail {

constexpr size_t kHashBuckets = 4096;  // 2^12

// Polar-method Gaussian: uses only *, /, log and sqrt, all of which round
// identically across the platforms we care about (unlike sin/cos), so the
// embedder stays bit-reproducible.
class GaussianStream {
public:
    explicit GaussianStream(uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, s;
        do {
            u = 2.0 * rng_.next_double() - 1.0;
            v = 2.0 * rng_.next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m;
    }

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace detail

// Deterministic offline embedder: lowercase -> byte 3-grams (short texts are
// space-padded to one gram) -> signed feature hashing into 4096 buckets ->
// seeded Gaussian projection to `dim` -> L2 normalization. Pure function of
// (text, seed, dim).
inline std::vector<double> local_hash_embed(const std::string& text, uint64_t seed,
                                            size_t dim) {
    std::string low = text;
    for (char& c : low)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (low.size() < 3) low.append(3 - low.size(), ' ');

    std::vector<double> buckets(detail::kHashBuckets, 0.0);
    for (size_t i = 0; i + 3 <= low.size(); ++i) {
        uint64_t h = fnv1a(std::string_view(low).substr(i, 3));
        size_t b = static_cast<size_t>(h & (detail::kHashBuckets - 1));
        double sign = ((h >> 12) & 1u) ? 1.0 : -1.0;
        buckets[b] += sign;
    }

    std::vector<double> out(dim, 0.0);
    for (size_t b = 0; b < detail::kHashBuckets; ++b) {
        if (buckets[b] == 0.0) continue;
        detail::GaussianStream g(derive_seed(seed, 0x700000000000ULL + b));
        double v = buckets[b];
        for (size_t d = 0; d < dim; ++d) out[d] += v * g.next();
    }

    double n = norm(out);
    if (n > 0.0)
        for (double& x : out) x /= n;
    return out;
}

namespace detail {

inline Matrix remote_embed(const std::vector<std::string>& texts,
                           const EmbedderConfig& cfg, const PostJsonFn& post) {
    if (!post)
        throw ProviderUnavailableError("remote embedder selected but no HTTP transport configured");

    size_t n = texts.size();
    size_t n_batches = (n + cfg.batch_size - 1) / cfg.batch_size;
    std::vector<std::vector<std::vector<double>>> batch_rows(n_batches);

    auto fetch_batch = [&](size_t bi) {
        size_t lo = bi * cfg.batch_size;
        size_t hi = std::min(n, lo + cfg.batch_size);
        nlohmann::json req;
        req["model"] = cfg.model_name;
        req["input"] = nlohmann::json::array();
        for (size_t i = lo; i < hi; ++i) req["input"].push_back(texts[i]);
        std::string body = req.dump();

        std::string last_err;
        for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(
                    std::chrono::milliseconds(cfg.backoff_ms << (attempt - 1)));
            HttpResponse resp = post("/v1/embeddings", body);
            if (resp.status != 200) {
                last_err = "status " + std::to_string(resp.status);
                continue;
            }
            nlohmann::json parsed = nlohmann::json::parse(resp.body, nullptr, false);
            if (parsed.is_discarded() || !parsed.contains("data") ||
                !parsed["data"].is_array() || parsed["data"].size() != hi - lo) {
                last_err = "malformed response body";
                continue;
            }
            std::vector<std::vector<double>> rows(hi - lo);
            bool ok = true;
            for (size_t k = 0; k < parsed["data"].size(); ++k) {
                const auto& item = parsed["data"][k];
                if (!item.contains("embedding") || !item["embedding"].is_array()) {
                    ok = false;
                    break;
                }
                size_t idx = item.contains("index") && item["index"].is_number_unsigned()
                                 ? item["index"].get<size_t>()
                                 : k;
                if (idx >= rows.size()) { ok = false; break; }
                rows[idx] = item["embedding"].get<std::vector<double>>();
            }
            if (!ok) {
                last_err = "malformed embedding entry";
                continue;
            }
            batch_rows[bi] = std::move(rows);
            return;
        }
        throw ProviderUnavailableError("embedding endpoint failed after " +
                                       std::to_string(cfg.max_attempts) +
                                       " attempts: " + last_err);
    };

    // Waves of at most batch_parallelism in-flight requests; assembly below
    // is by batch index, so results are order-independent.
    size_t stride = std::max<size_t>(1, cfg.batch_parallelism);
    for (size_t base = 0; base < n_batches; base += stride) {
        size_t end = std::min(n_batches, base + stride);
        std::vector<std::future<void>> inflight;
        for (size_t bi = base; bi < end; ++bi)
            inflight.push_back(std::async(std::launch::async, fetch_batch, bi));
        for (auto& f : inflight) f.get();
    }

    size_t d = 0;
    for (const auto& rows : batch_rows)
        for (const auto& r : rows) {
            if (d == 0) d = r.size();
            if (r.size() != d || d == 0)
                throw DimensionMismatchError(
                    "remote endpoint returned inconsistent embedding dimension");
        }
    Matrix m(n, d);
    size_t row = 0;
    for (const auto& rows : batch_rows)
        for (const auto& r : rows) {
            for (size_t j = 0; j < d; ++j) m.at(row, j) = r[j];
            ++row;
        }
    return m;
}

}  // namespace detail

// Embeds sentence units in order; row i corresponds to sentences[i].
inline EmbeddingMatrix embed(const std::vector<SentenceUnit>& sentences,
                             const EmbedderConfig& cfg, const PostJsonFn& post = {}) {
    if (sentences.empty()) throw EmptyInputError("no sentences to embed");

    if (cfg.provider == Provider::LOCAL_HASH) {
        Matrix m(sentences.size(), cfg.local_dim);
        for (size_t i = 0; i < sentences.size(); ++i) {
            std::vector<double> row = local_hash_embed(sentences[i].text, cfg.seed,
                                                       cfg.local_dim);
            for (size_t j = 0; j < cfg.local_dim; ++j) m.at(i, j) = row[j];
        }
        return {std::move(m), "local-hash/dim=" + std::to_string(cfg.local_dim) +
                                  "/seed=" + std::to_string(cfg.seed)};
    }

    std::vector<std::string> texts;
    texts.reserve(sentences.size());
    for (const auto& s : sentences) texts.push_back(s.text);
    Matrix m = detail::remote_embed(texts, cfg, post);
    if (!m.all_finite())
        throw DimensionMismatchError("remote endpoint returned non-finite values");
    if (cfg.normalize) {
        for (size_t i = 0; i < m.rows(); ++i) {
            auto r = m.row(i);
            double nr = 0.0;
            for (double x : r) nr += x * x;
            nr = std::sqrt(nr);
            if (nr > 0.0)
                for (size_t j = 0; j < m.cols(); ++j) m.at(i, j) /= nr;
        }
    }
    return {std::move(m), "remote/" + cfg.model_name};
}

}  // namespace mosaic
