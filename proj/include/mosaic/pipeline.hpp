#pragma once

#include <chrono>
#include <cstring>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/clusterer.hpp"
#include "mosaic/coherence.hpp"
#include "mosaic/corpus.hpp"
#include "mosaic/embedder.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/labeler.hpp"
#include "mosaic/reducer.hpp"
#include "mosaic/report.hpp"
#include "mosaic/search.hpp"
#include "mosaic/serialize.hpp"
#include "mosaic/topics.hpp"
#include "mosaic/version.hpp"

namespace mosaic {

struct RunConfig {
    std::string corpus_path;
    CorpusFormat corpus_format = CorpusFormat::JSONL;
    bool format_given = false;

    EmbedderConfig embedder;

    bool grid_mode = false;
    ReducerConfig reducer;      // single mode; carries metric/n_epochs in grid mode
    ClustererConfig clusterer;  // single mode
    ParamGrid grid;

    TopicConfig topic;
    size_t coherence_window = 110;
    size_t coherence_top_n = 10;
    size_t min_topics = 5, max_topics = 25;
    LabelerConfig labeler;

    uint64_t seed = 0;
    std::string output_dir = "run-out";
    bool svg = false;
    Linkage linkage = Linkage::AVERAGE;
    bool offline = false;
    size_t jobs = 1;
};

namespace detail {

inline Metric parse_metric(const std::string& s) {
    if (s == "cosine") return Metric::COSINE;
    if (s == "euclidean") return Metric::EUCLIDEAN;
    throw ConfigError("unknown metric: " + s);
}

inline const char* metric_name(Metric m) {
    return m == Metric::COSINE ? "cosine" : "euclidean";
}

inline const char* linkage_name(Linkage l) {
    switch (l) {
        case Linkage::AVERAGE: return "average";
        case Linkage::COMPLETE: return "complete";
        default: return "single";
    }
}

template <class T>
void maybe(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    RunConfig cfg;
    if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();

    if (!j.contains("corpus") || !j.at("corpus").contains("path"))
        throw ConfigError("config requires corpus.path");
    const auto& jc = j.at("corpus");
    cfg.corpus_path = jc.at("path").get<std::string>();
    if (jc.contains("format")) {
        std::string f = jc.at("format").get<std::string>();
        if (f == "jsonl") cfg.corpus_format = CorpusFormat::JSONL;
        else if (f == "csv") cfg.corpus_format = CorpusFormat::CSV;
        else throw ConfigError("corpus.format must be jsonl or csv");
        cfg.format_given = true;
    }

    cfg.embedder.seed = cfg.seed;
    if (j.contains("embedder")) {
        const auto& e = j.at("embedder");
        if (e.contains("provider")) {
            std::string p = e.at("provider").get<std::string>();
            if (p == "local_hash") cfg.embedder.provider = Provider::LOCAL_HASH;
            else if (p == "remote") cfg.embedder.provider = Provider::REMOTE;
            else throw ConfigError("embedder.provider must be local_hash or remote");
        }
        detail::maybe(e, "endpoint_url", cfg.embedder.endpoint_url);
        detail::maybe(e, "model_name", cfg.embedder.model_name);
        detail::maybe(e, "batch_size", cfg.embedder.batch_size);
        detail::maybe(e, "local_dim", cfg.embedder.local_dim);
        detail::maybe(e, "normalize", cfg.embedder.normalize);
        detail::maybe(e, "batch_parallelism", cfg.embedder.batch_parallelism);
        detail::maybe(e, "max_attempts", cfg.embedder.max_attempts);
        detail::maybe(e, "backoff_ms", cfg.embedder.backoff_ms);
        detail::maybe(e, "seed", cfg.embedder.seed);
    }

    bool has_fixed = j.contains("reducer") || j.contains("clusterer");
    bool has_grid = j.contains("grid");
    if (has_fixed == has_grid)
        throw ConfigError(
            "config must contain exactly one of {reducer+clusterer, grid}");
    if (has_fixed) {
        if (!j.contains("reducer") || !j.contains("clusterer"))
            throw ConfigError("fixed mode requires both reducer and clusterer");
        const auto& r = j.at("reducer");
        detail::maybe(r, "n_components", cfg.reducer.n_components);
        detail::maybe(r, "n_neighbors", cfg.reducer.n_neighbors);
        detail::maybe(r, "min_dist", cfg.reducer.min_dist);
        detail::maybe(r, "n_epochs", cfg.reducer.n_epochs);
        if (r.contains("metric"))
            cfg.reducer.metric =
                detail::parse_metric(r.at("metric").get<std::string>());
        const auto& c = j.at("clusterer");
        detail::maybe(c, "min_cluster_size", cfg.clusterer.min_cluster_size);
        detail::maybe(c, "min_samples", cfg.clusterer.min_samples);
    } else {
        cfg.grid_mode = true;
        const auto& g = j.at("grid");
        detail::maybe(g, "n_components", cfg.grid.n_components);
        detail::maybe(g, "n_neighbors", cfg.grid.n_neighbors);
        detail::maybe(g, "min_dist", cfg.grid.min_dist);
        detail::maybe(g, "min_cluster_size", cfg.grid.min_cluster_size);
        detail::maybe(g, "min_samples", cfg.grid.min_samples);
        detail::maybe(g, "n_epochs", cfg.reducer.n_epochs);
        if (g.contains("metric"))
            cfg.reducer.metric =
                detail::parse_metric(g.at("metric").get<std::string>());
    }

    if (j.contains("topic")) {
        const auto& t = j.at("topic");
        detail::maybe(t, "top_k_keywords", cfg.topic.top_k_keywords);
        detail::maybe(t, "outlier_threshold", cfg.topic.outlier_threshold);
        detail::maybe(t, "representatives", cfg.topic.representatives);
        detail::maybe(t, "min_df", cfg.topic.min_df);
    }
    if (j.contains("coherence")) {
        const auto& c = j.at("coherence");
        detail::maybe(c, "window_size", cfg.coherence_window);
        detail::maybe(c, "top_n", cfg.coherence_top_n);
    }
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        detail::maybe(b, "min_topics", cfg.min_topics);
        detail::maybe(b, "max_topics", cfg.max_topics);
    }
    if (cfg.min_topics < 1 || cfg.min_topics >= cfg.max_topics)
        throw ConfigError("bounds must satisfy 1 <= min_topics < max_topics");
    if (j.contains("labeler")) {
        const auto& l = j.at("labeler");
        detail::maybe(l, "endpoint_url", cfg.labeler.endpoint_url);
        detail::maybe(l, "model_name", cfg.labeler.model_name);
        detail::maybe(l, "temperature", cfg.labeler.temperature);
        detail::maybe(l, "max_label_words", cfg.labeler.max_label_words);
        detail::maybe(l, "attempts", cfg.labeler.attempts);
        detail::maybe(l, "offline", cfg.labeler.offline);
    }

    detail::maybe(j, "output_dir", cfg.output_dir);
    detail::maybe(j, "svg", cfg.svg);
    detail::maybe(j, "offline", cfg.offline);
    detail::maybe(j, "jobs", cfg.jobs);
    if (j.contains("linkage"))
        cfg.linkage = parse_linkage(j.at("linkage").get<std::string>());
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileNotFoundError(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_run_config(j);
}

// The layout seed depends only on reducer-relevant parameters, so combos
// differing just in cluster settings share one reduction.
inline uint64_t reducer_seed(uint64_t global_seed, size_t n_components,
                             size_t n_neighbors, double min_dist) {
    uint64_t s = derive_seed(global_seed, "reducer");
    s = derive_seed(s, static_cast<uint64_t>(n_components));
    s = derive_seed(s, static_cast<uint64_t>(n_neighbors));
    uint64_t bits;
    std::memcpy(&bits, &min_dist, sizeof bits);
    return derive_seed(s, bits);
}

inline nlohmann::json resolved_config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["output_dir"] = cfg.output_dir;
    j["offline"] = cfg.offline;
    j["jobs"] = cfg.jobs;
    j["svg"] = cfg.svg;
    j["linkage"] = detail::linkage_name(cfg.linkage);
    j["corpus"] = {{"path", cfg.corpus_path},
                   {"format", cfg.corpus_format == CorpusFormat::CSV ? "csv"
                                                                     : "jsonl"}};
    j["embedder"] = {
        {"provider",
         cfg.embedder.provider == Provider::REMOTE ? "remote" : "local_hash"},
        {"endpoint_url", cfg.embedder.endpoint_url},
        {"model_name", cfg.embedder.model_name},
        {"batch_size", cfg.embedder.batch_size},
        {"local_dim", cfg.embedder.local_dim},
        {"normalize", cfg.embedder.normalize},
        {"batch_parallelism", cfg.embedder.batch_parallelism},
        {"max_attempts", cfg.embedder.max_attempts},
        {"backoff_ms", cfg.embedder.backoff_ms},
        {"seed", cfg.embedder.seed}};
    if (cfg.grid_mode) {
        j["grid"] = {{"n_components", cfg.grid.n_components},
                     {"n_neighbors", cfg.grid.n_neighbors},
                     {"min_dist", cfg.grid.min_dist},
                     {"min_cluster_size", cfg.grid.min_cluster_size},
                     {"min_samples", cfg.grid.min_samples},
                     {"n_epochs", cfg.reducer.n_epochs},
                     {"metric", detail::metric_name(cfg.reducer.metric)}};
    } else {
        j["reducer"] = {{"n_components", cfg.reducer.n_components},
                        {"n_neighbors", cfg.reducer.n_neighbors},
                        {"min_dist", cfg.reducer.min_dist},
                        {"n_epochs", cfg.reducer.n_epochs},
                        {"metric", detail::metric_name(cfg.reducer.metric)}};
        j["clusterer"] = {{"min_cluster_size", cfg.clusterer.min_cluster_size},
                          {"min_samples", cfg.clusterer.min_samples}};
    }
    j["topic"] = {{"top_k_keywords", cfg.topic.top_k_keywords},
                  {"outlier_threshold", cfg.topic.outlier_threshold},
                  {"representatives", cfg.topic.representatives},
                  {"min_df", cfg.topic.min_df}};
    j["coherence"] = {{"window_size", cfg.coherence_window},
                      {"top_n", cfg.coherence_top_n}};
    j["bounds"] = {{"min_topics", cfg.min_topics},
                   {"max_topics", cfg.max_topics}};
    j["labeler"] = {{"endpoint_url", cfg.labeler.endpoint_url},
                    {"model_name", cfg.labeler.model_name},
                    {"temperature", cfg.labeler.temperature},
                    {"max_label_words", cfg.labeler.max_label_words},
                    {"attempts", cfg.labeler.attempts},
                    {"offline", cfg.labeler.offline}};
    return j;
}

namespace detail {

// Concurrent compute-once cache; waiters block on the first caller's result,
// and a thrown exception propagates to every waiter of that key.
template <class K, class V>
class Memo {
  public:
    template <class F>
    V get(const K& key, F&& make) {
        std::shared_future<V> fut;
        std::shared_ptr<std::promise<V>> owner;
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cache_.find(key);
            if (it == cache_.end()) {
                owner = std::make_shared<std::promise<V>>();
                fut = owner->get_future().share();
                cache_.emplace(key, fut);
            } else {
                fut = it->second;
            }
        }
        if (owner) {
            try {
                owner->set_value(make());
            } catch (...) {
                owner->set_exception(std::current_exception());
            }
        }
        return fut.get();
    }

  private:
    std::mutex mu_;
    std::map<K, std::shared_future<V>> cache_;
};

// Clamp the model to its serialized precision so downstream stages see the
// same numbers whether they run in-process or reload topics.json.
inline void round_model(TopicModel& m) {
    for (auto& t : m.topics)
        for (auto& kw : t.keywords) kw.second = round_sig(kw.second, 6);
    for (size_t i = 0; i < m.ctfidf.rows(); ++i)
        for (size_t c = 0; c < m.ctfidf.cols(); ++c)
            m.ctfidf.at(i, c) = round_sig(m.ctfidf.at(i, c), 6);
    for (double& p : m.assignment.probabilities) p = round_sig(p, 4);
}

inline std::vector<std::vector<std::string>> topic_word_lists(
    const TopicModel& model, size_t top_n) {
    std::vector<std::vector<std::string>> lists;
    for (const auto& t : model.topics) {
        std::vector<std::string> words;
        for (size_t i = 0; i < std::min(top_n, t.keywords.size()); ++i)
            words.push_back(t.keywords[i].first);
        lists.push_back(std::move(words));
    }
    return lists;
}

}  // namespace detail

class Pipeline {
  public:
    explicit Pipeline(RunConfig cfg, PostJsonFn embed_post = {},
                      PostJsonFn label_post = {})
        : cfg_(std::move(cfg)),
          embed_post_(std::move(embed_post)),
          label_post_(std::move(label_post)) {
        if (cfg_.offline) {
            cfg_.embedder.provider = Provider::LOCAL_HASH;
            cfg_.labeler.offline = true;
        }
    }

    const RunConfig& config() const { return cfg_; }

    int run() { return guarded("run", [&] { run_all(); }); }

    // Single-stage entry points; prerequisites are read from output_dir.
    int run_stage(const std::string& name) {
        return guarded(name, [&] {
            if (name == "ingest") {
                do_ingest();
            } else if (name == "embed") {
                Corpus corpus = need_corpus();
                do_embed(corpus);
            } else if (name == "fit") {
                Corpus corpus = need_corpus();
                EmbeddingMatrix emb = need_embeddings();
                do_fit(corpus, emb);
            } else if (name == "score") {
                Corpus corpus = need_corpus();
                TopicModel model = need_topics();
                do_score(corpus, model);
            } else if (name == "label") {
                Corpus corpus = need_corpus();
                TopicModel model = need_topics();
                do_label(model, corpus);
            } else if (name == "report") {
                Corpus corpus = need_corpus();
                EmbeddingMatrix emb = need_embeddings();
                TopicModel model = need_topics();
                FitArtifact fit = fit_from_json(
                    parse_artifact_json(out_path("fit.json")));
                do_report(corpus, emb, model, fit);
            } else {
                throw ConfigError("unknown stage: " + name);
            }
        });
    }

  private:
    RunConfig cfg_;
    PostJsonFn embed_post_, label_post_;
    std::vector<std::string> artifacts_;
    nlohmann::json timings_ = nlohmann::json::object();
    std::string embedder_tag_, labeler_tag_;
    std::string stage_ = "init";

    std::string out_path(const std::string& name) const {
        return cfg_.output_dir + "/" + name;
    }

    void put(const std::string& name, const std::string& content) {
        write_text_file(out_path(name), content);
        // label rewrites topics.json; the manifest lists each file once
        if (std::find(artifacts_.begin(), artifacts_.end(), name) ==
            artifacts_.end())
            artifacts_.push_back(name);
    }

    template <class F>
    auto timed(const std::string& name, F&& fn) {
        stage_ = name;
        auto t0 = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(fn())>) {
            fn();
            auto ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            timings_[name] = round_sig(ms, 6);
        } else {
            auto out = fn();
            auto ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
            timings_[name] = round_sig(ms, 6);
            return out;
        }
    }

    template <class F>
    int guarded(const std::string& command, F&& body) {
        try {
            body();
            write_manifest(command, "ok", "");
            return 0;
        } catch (const AllRejectedError& e) {
            write_manifest(command, "error", e.what());
            return 2;
        } catch (const std::exception& e) {
            write_manifest(command, "error", e.what());
            return 1;
        }
    }

    void write_manifest(const std::string& command, const std::string& status,
                        const std::string& error) {
        nlohmann::json m;
        m["command"] = command;
        m["status"] = status;
        if (status != "ok") m["error"] = {{"stage", stage_}, {"message", error}};
        m["config"] = resolved_config_json(cfg_);
        m["seed"] = cfg_.seed;
        m["versions"] = {{"mosaic", kVersion}};
        m["timings_ms"] = timings_;
        m["artifacts"] = artifacts_;
        m["provider"] = {{"embedder", embedder_tag_}, {"labeler", labeler_tag_}};
        write_text_file(out_path("run_manifest.json"), m.dump(2) + "\n");
    }

    Corpus need_corpus() {
        return corpus_from_json(parse_artifact_json(out_path("corpus.json")));
    }
    EmbeddingMatrix need_embeddings() {
        return embeddings_from_json(
            parse_artifact_json(out_path("embeddings.json")));
    }
    TopicModel need_topics() {
        return topic_model_from_json(parse_artifact_json(out_path("topics.json")));
    }

    void run_all() {
        Corpus corpus = timed("ingest", [&] { return do_ingest(); });
        EmbeddingMatrix emb = timed("embed", [&] { return do_embed(corpus); });
        auto [fit, model] = timed("fit", [&] { return do_fit(corpus, emb); });
        timed("score", [&] { do_score(corpus, model); });
        timed("label", [&] { do_label(model, corpus); });
        timed("report", [&] { do_report(corpus, emb, model, fit); });
    }

    Corpus do_ingest() {
        stage_ = "ingest";
        CorpusFormat fmt = cfg_.format_given ? cfg_.corpus_format
                                             : sniff_format(cfg_.corpus_path);
        Corpus corpus = load_corpus(cfg_.corpus_path, fmt);
        put("corpus.json", corpus_json(corpus));
        return corpus;
    }

    EmbeddingMatrix do_embed(const Corpus& corpus) {
        stage_ = "embed";
        EmbeddingMatrix emb = embed(corpus.sentences, cfg_.embedder, embed_post_);
        embedder_tag_ = emb.provider_tag;
        put("embeddings.json", embeddings_json(emb));
        return emb;
    }

    ReducerConfig make_reducer(size_t nc, size_t nn, double md) const {
        ReducerConfig rc;
        rc.n_components = nc;
        rc.n_neighbors = nn;
        rc.min_dist = md;
        rc.n_epochs = cfg_.reducer.n_epochs;
        rc.metric = cfg_.reducer.metric;
        rc.seed = reducer_seed(cfg_.seed, nc, nn, md);
        return rc;
    }

    std::pair<FitArtifact, TopicModel> do_fit(const Corpus& corpus,
                                              const EmbeddingMatrix& emb) {
        stage_ = "fit";
        CoherenceStats stats(corpus.sentences, cfg_.coherence_window);

        FitArtifact fit;
        ClusterAssignment raw;

        if (cfg_.grid_mode) {
            auto combos = expand_grid(cfg_.grid);
            size_t max_nc = *std::max_element(cfg_.grid.n_components.begin(),
                                              cfg_.grid.n_components.end());

            detail::Memo<size_t, std::shared_ptr<KnnGraph>> knn_memo;
            detail::Memo<size_t, std::shared_ptr<Matrix>> eig_memo;
            detail::Memo<std::tuple<size_t, size_t, double>,
                         std::shared_ptr<Matrix>>
                red_memo;
            detail::Memo<std::tuple<size_t, size_t, double, size_t>,
                         std::shared_ptr<std::vector<MstEdge>>>
                mst_memo;

            auto reduction_for = [&](size_t nc, size_t nn, double md) {
                auto knn = knn_memo.get(nn, [&] {
                    return std::make_shared<KnnGraph>(
                        knn_graph(emb.vectors, nn, cfg_.reducer.metric));
                });
                auto eig = eig_memo.get(nn, [&] {
                    if (emb.vectors.rows() > 2000)
                        return std::make_shared<Matrix>();
                    FuzzyGraph fg = smooth_weights(*knn, nn);
                    return std::make_shared<Matrix>(
                        spectral_eigenvectors(fg, max_nc));
                });
                return red_memo.get(std::make_tuple(nc, nn, md), [&] {
                    return std::make_shared<Matrix>(reduce_embedding(
                        emb.vectors, make_reducer(nc, nn, md), 1, knn.get(),
                        eig->cols() ? eig.get() : nullptr));
                });
            };

            auto cluster_for = [&](const GridCombo& c) {
                auto red = reduction_for(c.n_components, c.n_neighbors, c.min_dist);
                auto mst = mst_memo.get(
                    std::make_tuple(c.n_components, c.n_neighbors, c.min_dist,
                                    c.min_samples),
                    [&] {
                        MutualReachability mreach(*red, c.min_samples);
                        return std::make_shared<std::vector<MstEdge>>(
                            build_mst(mreach, red->rows()));
                    });
                ClustererConfig cc{c.min_cluster_size, c.min_samples};
                return extract_clusters(*mst, cc);
            };

            FitFn fit_fn = [&](const GridCombo& c) -> ComboEval {
                ClusterResult cr = cluster_for(c);
                int max_label = -1;
                size_t outliers = 0;
                for (int l : cr.assignment.labels) {
                    max_label = std::max(max_label, l);
                    if (l < 0) ++outliers;
                }
                size_t n_topics = static_cast<size_t>(max_label + 1);
                ComboEval ev;
                ev.n_topics = n_topics;
                if (n_topics == 0 ||
                    outliers * 10 > cr.assignment.labels.size() * 9) {
                    ev.degenerate = true;
                    return ev;
                }
                auto [vocab, counts] =
                    build_vocabulary(corpus.sentences, cr.assignment,
                                     cfg_.topic.min_df);
                Matrix w = ctfidf(counts);
                std::vector<std::vector<std::string>> lists(n_topics);
                for (size_t cl = 0; cl < n_topics; ++cl) {
                    std::vector<std::pair<double, std::string>> scored;
                    for (size_t t = 0; t < vocab.terms.size(); ++t)
                        if (w.at(cl, t) > 0.0)
                            scored.emplace_back(-w.at(cl, t), vocab.terms[t]);
                    std::sort(scored.begin(), scored.end());
                    for (size_t i = 0;
                         i < std::min(cfg_.coherence_top_n, scored.size()); ++i)
                        lists[cl].push_back(scored[i].second);
                }
                CoherenceReport rep = score_coherence(lists, stats);
                ev.cv = rep.cv;
                ev.umass = rep.umass;
                return ev;
            };

            GridOutcome outcome =
                run_grid(combos, {cfg_.min_topics, cfg_.max_topics}, fit_fn,
                         cfg_.jobs);
            put("grid_ledger.csv", grid_ledger_csv(outcome));
            if (outcome.best_index < 0)
                throw AllRejectedError(
                    "every grid combination was rejected; see grid_ledger.csv");

            const GridCombo& win = outcome.results[0].config;
            fit.grid_mode = true;
            fit.n_components = win.n_components;
            fit.n_neighbors = win.n_neighbors;
            fit.min_dist = win.min_dist;
            fit.min_cluster_size = win.min_cluster_size;
            fit.min_samples = win.min_samples;
            raw = cluster_for(win).assignment;
        } else {
            ReducerConfig rc = make_reducer(cfg_.reducer.n_components,
                                            cfg_.reducer.n_neighbors,
                                            cfg_.reducer.min_dist);
            Matrix reduced = reduce_embedding(emb.vectors, rc, cfg_.jobs);
            raw = cluster_points(reduced, cfg_.clusterer).assignment;
            fit.grid_mode = false;
            fit.n_components = rc.n_components;
            fit.n_neighbors = rc.n_neighbors;
            fit.min_dist = rc.min_dist;
            fit.min_cluster_size = cfg_.clusterer.min_cluster_size;
            fit.min_samples = cfg_.clusterer.min_samples;
        }

        ClusterAssignment final_assignment =
            reduce_outliers(raw, emb.vectors, cfg_.topic.outlier_threshold);
        TopicModel model = extract_topics(corpus.sentences, emb.vectors,
                                          final_assignment, cfg_.topic);
        detail::round_model(model);

        CoherenceReport rep = score_coherence(
            detail::topic_word_lists(model, cfg_.coherence_top_n), stats);
        fit.cv = rep.cv;
        fit.umass = rep.umass;
        fit.n_topics = model.topics.size();
        fit.assignment = model.assignment;

        put("fit.json", fit_json(fit));
        put("topics.json", topics_json(model));
        return {fit, model};
    }

    CoherenceReport do_score(const Corpus& corpus, const TopicModel& model) {
        stage_ = "score";
        CoherenceStats stats(corpus.sentences, cfg_.coherence_window);
        CoherenceReport rep = score_coherence(
            detail::topic_word_lists(model, cfg_.coherence_top_n), stats);
        put("coherence.json", coherence_json(rep));
        return rep;
    }

    void do_label(TopicModel& model, const Corpus& corpus) {
        stage_ = "label";
        PostJsonFn post = label_post_;
        label_all(model, corpus.sentences, cfg_.labeler, post);
        labeler_tag_ = (cfg_.labeler.offline || !post)
                           ? "fallback"
                           : cfg_.labeler.model_name;
        put("topics.json", topics_json(model));
    }

    void do_report(const Corpus& corpus, const EmbeddingMatrix& emb,
                   const TopicModel& model, const FitArtifact& fit) {
        stage_ = "report";
        put("assignments.csv", assignments_csv(corpus, model.assignment));
        put("table.csv", table_csv(topic_table(model)));

        if (model.topics.size() >= 2) {
            Dendrogram dendro = topic_dendrogram(model.ctfidf, cfg_.linkage);
            std::vector<std::string> labels;
            for (const auto& t : model.topics) labels.push_back(t.label);
            put("dendrogram.json", dendrogram_json(dendro, labels));
        }

        ReducerConfig rc2 = make_reducer(2, fit.n_neighbors, fit.min_dist);
        Matrix coords = reduce_embedding(emb.vectors, rc2, cfg_.jobs);
        std::map<int, std::string> label_map;
        for (const auto& t : model.topics) label_map[t.id] = t.label;
        auto rows = scatter_rows(coords, model.assignment, label_map);
        put("scatter.csv", scatter_csv(rows));
        if (cfg_.svg) put("scatter.svg", scatter_svg(rows));
    }
};

}  // namespace mosaic
