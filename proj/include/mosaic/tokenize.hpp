#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mosaic/stopwords.hpp"
#include "mosaic/text.hpp"

namespace mosaic {

// Shared tokenizer for keyword extraction and coherence scoring: lowercase,
// split on anything that is not a word byte, drop tokens shorter than two
// bytes and stopwords. Keeping one implementation here is what makes
// coherence scores comparable with the c-TF-IDF vocabulary.
inline std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 2 && !is_stopword(cur)) out.push_back(cur);
        cur.clear();
    };
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (detail::is_word_byte(c)) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a')
                                               : ch);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

// Unigrams plus adjacent-pair bigrams (space-joined, "red blue"), in
// document order. Bigrams are formed from the already-filtered token
// stream, so the stopword test only ever sees single tokens.
inline std::vector<std::string> tokenize_with_bigrams(std::string_view text) {
    std::vector<std::string> uni = tokenize(text);
    std::vector<std::string> out = uni;
    out.reserve(uni.size() * 2);
    for (size_t i = 0; i + 1 < uni.size(); ++i)
        out.push_back(uni[i] + " " + uni[i + 1]);
    return out;
}

}  // namespace mosaic
