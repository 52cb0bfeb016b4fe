#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/csv.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/labeler.hpp"
#include "mosaic/matrix.hpp"
#include "mosaic/topics.hpp"

namespace mosaic {

struct TableRow {
    std::string label;
    size_t count = 0;
    double percentage = 0.0;  // exact 2-decimal value
};

// Topic distribution table: topics plus the outlier row, count-descending,
// with a total row appended. Percentages are apportioned by largest
// remainder so the 2-decimal column sums to exactly 100.00.
inline std::vector<TableRow> topic_table(const TopicModel& model) {
    struct Item {
        std::string label;
        size_t count;
        size_t order;  // tie-break: topic id, outliers last
    };
    std::vector<Item> items;
    for (const auto& t : model.topics)
        items.push_back({t.label.empty() ? "Topic " + std::to_string(t.id) : t.label,
                         t.size, static_cast<size_t>(t.id)});
    items.push_back({kOutlierLabel, model.outlier_count, items.size() + 1});

    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.order < b.order;
    });

    size_t total = 0;
    for (const auto& it : items) total += it.count;
    if (total == 0) throw EmptyInputError("topic table over zero sentences");

    // Largest-remainder apportionment in hundredths of a percent.
    size_t budget = 10000;
    std::vector<size_t> cents(items.size());
    std::vector<std::pair<size_t, size_t>> rema;  // (remainder numerator, index)
    size_t used = 0;
    for (size_t i = 0; i < items.size(); ++i) {
        size_t num = items[i].count * 10000;
        cents[i] = num / total;
        used += cents[i];
        rema.emplace_back(num % total, i);
    }
    std::sort(rema.begin(), rema.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        if (items[a.second].count != items[b.second].count)
            return items[a.second].count > items[b.second].count;
        return a.second < b.second;
    });
    for (size_t k = 0; k < budget - used && k < rema.size(); ++k)
        ++cents[rema[k].second];

    std::vector<TableRow> rows;
    for (size_t i = 0; i < items.size(); ++i)
        rows.push_back({items[i].label, items[i].count,
                        static_cast<double>(cents[i]) / 100.0});
    rows.push_back({"Total", total, 100.0});
    return rows;
}

inline std::string table_csv(const std::vector<TableRow>& rows) {
    std::string out = "label,count,percentage\n";
    char buf[32];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.2f", r.percentage);
        out += csv_join({r.label, std::to_string(r.count), buf});
    }
    return out;
}

enum class Linkage { AVERAGE, COMPLETE, SINGLE };

inline Linkage parse_linkage(const std::string& s) {
    if (s == "average") return Linkage::AVERAGE;
    if (s == "complete") return Linkage::COMPLETE;
    if (s == "single") return Linkage::SINGLE;
    throw ConfigError("unknown linkage: " + s);
}

struct DendroMerge {
    size_t node_a, node_b;  // node_a < node_b
    double distance;
    size_t new_node;
};

struct Dendrogram {
    std::vector<DendroMerge> merges;  // m-1 entries, leaf ids = topic ids
};

// Agglomerative clustering of topic c-TF-IDF rows under cosine distance.
// Ties pick the pair with the smallest contained leaf ids, so the merge
// sequence is unique.
inline Dendrogram topic_dendrogram(const Matrix& ctfidf,
                                   Linkage linkage = Linkage::AVERAGE) {
    size_t m = ctfidf.rows();
    if (m < 2) throw TooFewTopicsError("dendrogram needs at least 2 topics");

    std::map<std::pair<size_t, size_t>, double> dist;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = i + 1; j < m; ++j)
            dist[{i, j}] = cosine_distance(ctfidf.row(i), ctfidf.row(j));

    struct Cluster {
        size_t id;
        size_t size;
        size_t min_leaf;
    };
    std::vector<Cluster> active;
    for (size_t i = 0; i < m; ++i) active.push_back({i, 1, i});

    auto d_of = [&](size_t a, size_t b) {
        return dist.at({std::min(a, b), std::max(a, b)});
    };

    Dendrogram out;
    size_t next_id = m;
    while (active.size() > 1) {
        size_t bi = 0, bj = 1;
        double best = d_of(active[0].id, active[1].id);
        auto tie_key = [&](size_t i, size_t j) {
            return std::make_pair(std::min(active[i].min_leaf, active[j].min_leaf),
                                  std::max(active[i].min_leaf, active[j].min_leaf));
        };
        for (size_t i = 0; i < active.size(); ++i)
            for (size_t j = i + 1; j < active.size(); ++j) {
                double d = d_of(active[i].id, active[j].id);
                if (d < best || (d == best && tie_key(i, j) < tie_key(bi, bj))) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }

        Cluster a = active[bi], b = active[bj];
        Cluster merged{next_id++, a.size + b.size, std::min(a.min_leaf, b.min_leaf)};
        out.merges.push_back({std::min(a.id, b.id), std::max(a.id, b.id), best,
                              merged.id});

        active.erase(active.begin() + static_cast<long>(bj));
        active.erase(active.begin() + static_cast<long>(bi));
        for (const auto& c : active) {
            double da = d_of(c.id, a.id), db = d_of(c.id, b.id);
            double nd;
            switch (linkage) {
                case Linkage::AVERAGE:
                    nd = (static_cast<double>(a.size) * da +
                          static_cast<double>(b.size) * db) /
                         static_cast<double>(a.size + b.size);
                    break;
                case Linkage::COMPLETE: nd = std::max(da, db); break;
                default: nd = std::min(da, db); break;
            }
            dist[{std::min(c.id, merged.id), std::max(c.id, merged.id)}] = nd;
        }
        active.push_back(merged);
    }
    return out;
}

inline std::string dendrogram_json(const Dendrogram& dendro,
                                   const std::vector<std::string>& leaf_labels) {
    nlohmann::json j;
    j["leaves"] = nlohmann::json::array();
    for (size_t i = 0; i < leaf_labels.size(); ++i)
        j["leaves"].push_back({{"topic_id", i}, {"label", leaf_labels[i]}});
    j["merges"] = nlohmann::json::array();
    for (const auto& mg : dendro.merges)
        j["merges"].push_back({{"node_a", mg.node_a},
                               {"node_b", mg.node_b},
                               {"distance", round_sig(mg.distance, 6)},
                               {"new_node", mg.new_node}});
    return j.dump(2) + "\n";
}

struct ScatterRow {
    size_t sentence_id;
    double x, y;
    int topic_id;
    std::string topic_label;
};

inline std::vector<ScatterRow> scatter_rows(
    const Matrix& coords2d, const ClusterAssignment& assignment,
    const std::map<int, std::string>& topic_labels) {
    std::vector<ScatterRow> rows;
    for (size_t i = 0; i < coords2d.rows(); ++i) {
        int t = assignment.labels[i];
        auto it = topic_labels.find(t);
        std::string label =
            t < 0 ? kOutlierLabel
                  : (it != topic_labels.end() && !it->second.empty()
                         ? it->second
                         : "Topic " + std::to_string(t));
        rows.push_back({i, coords2d.at(i, 0), coords2d.at(i, 1), t, label});
    }
    return rows;
}

inline std::string scatter_csv(const std::vector<ScatterRow>& rows) {
    std::string out = "sentence_id,x,y,topic_id,topic_label\n";
    for (const auto& r : rows) {
        out += csv_join({std::to_string(r.sentence_id), format_sig(r.x, 6),
                         format_sig(r.y, 6), std::to_string(r.topic_id),
                         r.topic_label});
    }
    return out;
}

// Static SVG scatter: one circle per sentence, fixed categorical palette,
// legend of topic labels. Deterministic output for a given input.
inline std::string scatter_svg(const std::vector<ScatterRow>& rows) {
    static const std::vector<std::string> kPalette = {
        "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
        "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#1170aa", "#a3cce9"};
    const std::string kGrey = "#999999";

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!rows.empty()) {
        xmin = xmax = rows[0].x;
        ymin = ymax = rows[0].y;
        for (const auto& r : rows) {
            xmin = std::min(xmin, r.x);
            xmax = std::max(xmax, r.x);
            ymin = std::min(ymin, r.y);
            ymax = std::max(ymax, r.y);
        }
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;

    const double W = 760, H = 560, ML = 20, MT = 20;
    auto sx = [&](double x) { return ML + (x - xmin) / (xmax - xmin) * W; };
    auto sy = [&](double y) { return MT + (ymax - y) / (ymax - ymin) * H; };
    auto color = [&](int t) {
        return t < 0 ? kGrey : kPalette[static_cast<size_t>(t) % kPalette.size()];
    };

    std::map<int, std::string> legend;
    for (const auto& r : rows) legend.emplace(r.topic_id, r.topic_label);

    char buf[160];
    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"600\" "
        "viewBox=\"0 0 1000 600\">\n<rect width=\"1000\" height=\"600\" "
        "fill=\"white\"/>\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"%s\" "
                      "fill-opacity=\"0.7\"/>\n",
                      sx(r.x), sy(r.y), color(r.topic_id).c_str());
        svg += buf;
    }
    double ly = 30;
    for (const auto& [t, label] : legend) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.2f\" r=\"5\" fill=\"%s\"/>\n",
                      820.0, ly - 4, color(t).c_str());
        svg += buf;
        std::string esc;
        for (char c : label) {
            if (c == '&') esc += "&amp;";
            else if (c == '<') esc += "&lt;";
            else if (c == '>') esc += "&gt;";
            else esc.push_back(c);
        }
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.2f\" font-size=\"12\" "
                      "font-family=\"sans-serif\">%s</text>\n",
                      832.0, ly, esc.c_str());
        svg += buf;
        ly += 18;
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace mosaic
