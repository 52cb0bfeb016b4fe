#pragma once

#include <string_view>
#include <unordered_set>

namespace mosaic {

// Fixed English stopword list. Frozen so vocabularies are reproducible
// across builds; do not extend casually, every change shifts keyword
// selection and coherence scores downstream.
inline const std::unordered_set<std::string_view>& stopwords() {
    static const std::unordered_set<std::string_view> kSet = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an",
        "and", "any", "are", "aren", "as", "at", "be", "because", "been",
        "before", "being", "below", "between", "both", "but", "by", "can",
        "cannot", "could", "couldn", "did", "didn", "do", "does", "doesn",
        "doing", "don", "down", "during", "each", "few", "for", "from",
        "further", "had", "hadn", "has", "hasn", "have", "haven", "having",
        "he", "her", "here", "hers", "herself", "him", "himself", "his",
        "how", "i", "if", "in", "into", "is", "isn", "it", "its", "itself",
        "just", "ll", "me", "mightn", "more", "most", "mustn", "my", "myself",
        "needn", "no", "nor", "not", "now", "of", "off", "on", "once", "only",
        "or", "other", "our", "ours", "ourselves", "out", "over", "own", "re",
        "s", "same", "shan", "she", "should", "shouldn", "so", "some", "such",
        "t", "than", "that", "the", "their", "theirs", "them", "themselves",
        "then", "there", "these", "they", "this", "those", "through", "to",
        "too", "under", "until", "up", "ve", "very", "was", "wasn", "we",
        "were", "weren", "what", "when", "where", "which", "while", "who",
        "whom", "why", "will", "with", "won", "would", "wouldn", "you",
        "your", "yours", "yourself", "yourselves",
    };
    return kSet;
}

inline bool is_stopword(std::string_view token) {
    return stopwords().count(token) > 0;
}

}  // namespace mosaic
