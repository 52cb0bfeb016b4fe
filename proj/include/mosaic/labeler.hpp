#pragma once

#include <algorithm>
#include <cctype>
#include <future>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/corpus.hpp"
#include "mosaic/http.hpp"
#include "mosaic/topics.hpp"

namespace mosaic {

inline constexpr const char* kOutlierLabel = "Unlabelled";
inline constexpr const char* kPromptTemplateVersion = "v1";

struct LabelerConfig {
    std::string endpoint_url;
    std::string model_name = "meta-llama/Meta-Llama-3-8B-Instruct";
    double temperature = 0.0;
    size_t max_label_words = 5;
    int attempts = 2;
    bool offline = false;
};

// Chat messages for one topic; a pure function of the keyword ranking, the
// representative texts, and the template version, so the request body is
// byte-stable across attempts and runs.
inline nlohmann::json build_label_messages(
    const std::vector<std::string>& keywords,
    const std::vector<std::string>& representatives, size_t max_label_words) {
    std::string user = "Keywords (most important first): ";
    for (size_t i = 0; i < keywords.size(); ++i) {
        if (i) user += ", ";
        user += keywords[i];
    }
    user += "\n\nRepresentative sentences:\n";
    size_t shown = std::min<size_t>(representatives.size(), 3);
    for (size_t i = 0; i < shown; ++i)
        user += std::to_string(i + 1) + ". " + representatives[i] + "\n";
    user += "\nLabel:";

    nlohmann::json messages = nlohmann::json::array();
    messages.push_back(
        {{"role", "system"},
         {"content",
          "You label topics from clustered text. Respond with only a "
          "noun-phrase label of at most " +
              std::to_string(max_label_words) +
              " words. No quotes, no explanation. (template " +
              std::string(kPromptTemplateVersion) + ")"}});
    messages.push_back({{"role", "user"}, {"content", user}});
    return messages;
}

// Strip wrapping quotes/punctuation, title-case, truncate to max_words.
inline std::string postprocess_label(const std::string& raw, size_t max_words) {
    auto is_trim = [](unsigned char c) {
        return std::isspace(c) || c == '"' || c == '\'' || c == '.' || c == ',' ||
               c == ';' || c == ':' || c == '!' || c == '?' || c == '`';
    };
    size_t b = 0, e = raw.size();
    while (b < e && is_trim(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && is_trim(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string body = raw.substr(b, e - b);

    std::vector<std::string> words;
    std::string cur;
    for (char ch : body) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) words.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) words.push_back(cur);
    if (words.size() > max_words) words.resize(max_words);

    std::string out;
    for (auto& w : words) {
        bool first = true;
        for (char& c : w) {
            unsigned char u = static_cast<unsigned char>(c);
            if (std::isalpha(u)) {
                c = first ? static_cast<char>(std::toupper(u))
                          : static_cast<char>(std::tolower(u));
                first = false;
            }
        }
        if (!out.empty()) out += " ";
        out += w;
    }
    return out;
}

inline std::string fallback_label(const Topic& topic, size_t max_words) {
    std::string joined;
    size_t take = std::min<size_t>(topic.keywords.size(), 3);
    for (size_t i = 0; i < take; ++i) {
        if (i) joined += " ";
        joined += topic.keywords[i].first;
    }
    std::string label = postprocess_label(joined, max_words);
    return label.empty() ? "Topic " + std::to_string(topic.id) : label;
}

// Label one topic via the chat endpoint, falling back to the top keywords
// after `attempts` failures. Never throws: a label always comes back.
inline std::string label_topic(const Topic& topic,
                               const std::vector<std::string>& representative_texts,
                               const LabelerConfig& cfg, const PostJsonFn& post) {
    if (cfg.offline || !post) return fallback_label(topic, cfg.max_label_words);

    std::vector<std::string> kw;
    for (const auto& [term, weight] : topic.keywords) kw.push_back(term);
    nlohmann::json req;
    req["model"] = cfg.model_name;
    req["temperature"] = cfg.temperature;
    req["messages"] =
        build_label_messages(kw, representative_texts, cfg.max_label_words);
    std::string body = req.dump();  // built once; identical bytes per attempt

    for (int attempt = 0; attempt < cfg.attempts; ++attempt) {
        HttpResponse resp = post("/v1/chat/completions", body);
        if (resp.status != 200) continue;
        nlohmann::json parsed = nlohmann::json::parse(resp.body, nullptr, false);
        if (parsed.is_discarded()) continue;
        if (!parsed.contains("choices") || !parsed["choices"].is_array() ||
            parsed["choices"].empty())
            continue;
        const auto& msg = parsed["choices"][0];
        if (!msg.contains("message") || !msg["message"].contains("content") ||
            !msg["message"]["content"].is_string())
            continue;
        std::string label = postprocess_label(
            msg["message"]["content"].get<std::string>(), cfg.max_label_words);
        if (!label.empty()) return label;
    }
    return fallback_label(topic, cfg.max_label_words);
}

// Fill every topic's label, in topic-id order; up to 4 requests in flight.
inline void label_all(TopicModel& model, const std::vector<SentenceUnit>& sentences,
                      const LabelerConfig& cfg, const PostJsonFn& post = {}) {
    auto rep_texts = [&](const Topic& t) {
        std::vector<std::string> texts;
        for (size_t idx : t.representatives)
            if (idx < sentences.size()) texts.push_back(sentences[idx].text);
        return texts;
    };

    if (cfg.offline || !post) {
        for (auto& t : model.topics)
            t.label = label_topic(t, rep_texts(t), cfg, {});
        return;
    }
    constexpr size_t kParallel = 4;
    for (size_t base = 0; base < model.topics.size(); base += kParallel) {
        size_t end = std::min(model.topics.size(), base + kParallel);
        std::vector<std::future<std::string>> inflight;
        for (size_t i = base; i < end; ++i)
            inflight.push_back(std::async(std::launch::async, [&, i] {
                return label_topic(model.topics[i], rep_texts(model.topics[i]), cfg,
                                   post);
            }));
        for (size_t i = base; i < end; ++i)
            model.topics[i].label = inflight[i - base].get();
    }
}

}  // namespace mosaic
