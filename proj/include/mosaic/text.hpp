#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mosaic {

namespace detail {

inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_word_byte(unsigned char c) {
    // Non-ASCII bytes count as word material so UTF-8 text survives intact.
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
           (c >= 'A' && c <= 'Z') || c >= 0x80;
}

// Composes an ASCII base letter with a combining mark codepoint. Returns 0
// when the pair has no precomposed form. Covers the Latin sequences that
// actually show up in English-language reports; everything else passes
// through unchanged (full Unicode NFC is out of scope).
inline uint32_t compose_latin(uint32_t base, uint32_t mark) {
    static constexpr struct { char base; uint16_t mark; uint16_t composed; } kTable[] = {
        {'A', 0x300, 0xC0}, {'A', 0x301, 0xC1}, {'A', 0x302, 0xC2}, {'A', 0x303, 0xC3},
        {'A', 0x308, 0xC4}, {'A', 0x30A, 0xC5}, {'C', 0x327, 0xC7}, {'E', 0x300, 0xC8},
        {'E', 0x301, 0xC9}, {'E', 0x302, 0xCA}, {'E', 0x308, 0xCB}, {'I', 0x300, 0xCC},
        {'I', 0x301, 0xCD}, {'I', 0x302, 0xCE}, {'I', 0x308, 0xCF}, {'N', 0x303, 0xD1},
        {'O', 0x300, 0xD2}, {'O', 0x301, 0xD3}, {'O', 0x302, 0xD4}, {'O', 0x303, 0xD5},
        {'O', 0x308, 0xD6}, {'U', 0x300, 0xD9}, {'U', 0x301, 0xDA}, {'U', 0x302, 0xDB},
        {'U', 0x308, 0xDC}, {'Y', 0x301, 0xDD}, {'a', 0x300, 0xE0}, {'a', 0x301, 0xE1},
        {'a', 0x302, 0xE2}, {'a', 0x303, 0xE3}, {'a', 0x308, 0xE4}, {'a', 0x30A, 0xE5},
        {'c', 0x327, 0xE7}, {'e', 0x300, 0xE8}, {'e', 0x301, 0xE9}, {'e', 0x302, 0xEA},
        {'e', 0x308, 0xEB}, {'i', 0x300, 0xEC}, {'i', 0x301, 0xED}, {'i', 0x302, 0xEE},
        {'i', 0x308, 0xEF}, {'n', 0x303, 0xF1}, {'o', 0x300, 0xF2}, {'o', 0x301, 0xF3},
        {'o', 0x302, 0xF4}, {'o', 0x303, 0xF5}, {'o', 0x308, 0xF6}, {'u', 0x300, 0xF9},
        {'u', 0x301, 0xFA}, {'u', 0x302, 0xFB}, {'u', 0x308, 0xFC}, {'y', 0x301, 0xFD},
        {'y', 0x308, 0xFF},
    };
    for (const auto& e : kTable)
        if (static_cast<uint32_t>(e.base) == base && e.mark == mark) return e.composed;
    return 0;
}

// Decodes one UTF-8 codepoint at `i`; advances `i`. Invalid bytes are
// returned as-is (one byte per call) so malformed input is preserved.
inline uint32_t decode_utf8(std::string_view s, size_t& i) {
    unsigned char c0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](size_t k) {
        return i + k < s.size() &&
               (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    };
    if (c0 < 0x80) { ++i; return c0; }
    if ((c0 & 0xE0) == 0xC0 && cont(1)) {
        uint32_t cp = (c0 & 0x1Fu) << 6 | (static_cast<unsigned char>(s[i + 1]) & 0x3Fu);
        i += 2;
        return cp;
    }
    if ((c0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        uint32_t cp = (c0 & 0x0Fu) << 12 |
                      (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3Fu);
        i += 3;
        return cp;
    }
    if ((c0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        uint32_t cp = (c0 & 0x07u) << 18 |
                      (static_cast<unsigned char>(s[i + 1]) & 0x3Fu) << 12 |
                      (static_cast<unsigned char>(s[i + 2]) & 0x3Fu) << 6 |
                      (static_cast<unsigned char>(s[i + 3]) & 0x3Fu);
        i += 4;
        return cp;
    }
    ++i;
    return c0;
}

inline void encode_utf8(uint32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

}  // namespace detail

// Canonical text cleanup applied to every report before segmentation:
// strips a BOM, composes common Latin combining marks, collapses each
// whitespace run (newlines included) to a single space, and trims the ends.
inline std::string normalize_text(std::string_view raw) {
    if (raw.size() >= 3 && raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);

    // Compose combining marks.
    std::string composed;
    composed.reserve(raw.size());
    size_t i = 0;
    uint32_t pending = 0;
    bool has_pending = false;
    while (i < raw.size()) {
        uint32_t cp = detail::decode_utf8(raw, i);
        if (has_pending) {
            uint32_t merged = detail::compose_latin(pending, cp);
            if (merged) {
                pending = merged;
                continue;
            }
            detail::encode_utf8(pending, composed);
        }
        pending = cp;
        has_pending = true;
    }
    if (has_pending) detail::encode_utf8(pending, composed);

    // Collapse whitespace runs.
    std::string out;
    out.reserve(composed.size());
    size_t j = 0;
    while (j < composed.size()) {
        if (detail::is_ascii_space(composed[j])) {
            while (j < composed.size() && detail::is_ascii_space(composed[j])) ++j;
            if (!out.empty() && j < composed.size()) out.push_back(' ');
        } else {
            out.push_back(composed[j]);
            ++j;
        }
    }
    return out;
}

// Deterministic rule-based sentence segmentation.
//
// Boundaries are '.', '!', '?' and newlines; a terminator only splits when
// followed by whitespace or end of input. A '.' does not split when it
// completes a known abbreviation or a single capital initial. Runs of
// terminator punctuation travel with the sentence they close. Dot-runs and
// the ellipsis character split only before whitespace + an uppercase letter.
// Segments that carry no word characters are merged into a neighbour so no
// text is dropped.
inline std::vector<std::string> split_sentences(std::string_view text) {
    static const std::vector<std::string_view> kAbbreviations = {
        "e.g.", "i.e.", "etc.", "dr.", "mr.", "mrs.", "vs.",
    };

    auto is_terminator = [](char c) { return c == '.' || c == '!' || c == '?'; };
    auto is_ellipsis_char = [&](size_t pos) {
        return pos + 2 < text.size() && text.substr(pos, 3) == "\xE2\x80\xA6";  // U+2026
    };

    // Token ending at `end` (exclusive), lowercased, leading quote/bracket
    // punctuation stripped.
    auto token_before = [&](size_t end) {
        size_t b = end;
        while (b > 0 && !detail::is_ascii_space(text[b - 1])) --b;
        while (b < end - 1 && !detail::is_word_byte(static_cast<unsigned char>(text[b])) &&
               text[b] != '.')
            ++b;
        std::string tok(text.substr(b, end - b));
        for (char& c : tok)
            if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
        return tok;
    };

    std::vector<std::pair<size_t, size_t>> ranges;  // [begin, end) byte ranges
    size_t start = 0;
    size_t i = 0;
    auto close = [&](size_t end, size_t next) {
        ranges.emplace_back(start, end);
        start = next;
    };

    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            close(i, i + 1);
            ++i;
            continue;
        }
        if (!is_terminator(c) && !is_ellipsis_char(i)) {
            ++i;
            continue;
        }

        // Measure the terminator run.
        size_t run_end = i;
        size_t dots = 0;
        bool strong = false;     // contains ! or ?
        bool ellipsis = false;   // contains U+2026 or >=2 dots
        while (run_end < text.size()) {
            if (text[run_end] == '.') {
                ++dots;
                ++run_end;
            } else if (text[run_end] == '!' || text[run_end] == '?') {
                strong = true;
                ++run_end;
            } else if (is_ellipsis_char(run_end)) {
                ellipsis = true;
                run_end += 3;
            } else {
                break;
            }
        }
        if (dots >= 2) ellipsis = true;

        bool followed_by_space = run_end >= text.size() ||
                                 detail::is_ascii_space(text[run_end]);
        bool boundary;
        if (strong) {
            boundary = followed_by_space;
        } else if (ellipsis) {
            // Ellipsis splits only before whitespace + uppercase.
            size_t k = run_end;
            while (k < text.size() && detail::is_ascii_space(text[k])) ++k;
            boundary = k > run_end && k < text.size() && text[k] >= 'A' && text[k] <= 'Z';
        } else {
            // Single period.
            boundary = followed_by_space;
            if (boundary) {
                std::string tok = token_before(i + 1);
                for (std::string_view abbr : kAbbreviations)
                    if (tok == abbr) { boundary = false; break; }
                if (boundary && tok.size() == 2 && tok[1] == '.' &&
                    text[i - 1] >= 'A' && text[i - 1] <= 'Z')
                    boundary = false;  // single capital initial
            }
        }

        if (boundary)
            close(run_end, run_end);
        i = run_end;
    }
    if (start < text.size()) ranges.emplace_back(start, text.size());

    // Trim, drop empty, and merge word-less fragments into a neighbour.
    auto trim = [&](std::pair<size_t, size_t> r) {
        while (r.first < r.second && detail::is_ascii_space(text[r.first])) ++r.first;
        while (r.second > r.first && detail::is_ascii_space(text[r.second - 1])) --r.second;
        return r;
    };
    auto has_word = [&](std::pair<size_t, size_t> r) {
        for (size_t k = r.first; k < r.second; ++k)
            if (detail::is_word_byte(static_cast<unsigned char>(text[k]))) return true;
        return false;
    };

    std::vector<std::pair<size_t, size_t>> kept;
    std::pair<size_t, size_t> carry{0, 0};  // word-less range waiting for a host
    bool has_carry = false;
    for (auto r : ranges) {
        auto t = trim(r);
        if (t.first >= t.second) continue;
        if (!has_word(t)) {
            if (!kept.empty()) {
                kept.back().second = t.second;  // glue onto previous sentence
            } else {
                carry = has_carry ? std::make_pair(carry.first, t.second) : t;
                has_carry = true;
            }
            continue;
        }
        if (has_carry) {
            t.first = carry.first;
            has_carry = false;
        }
        kept.push_back(t);
    }
    if (has_carry) kept.push_back(carry);  // input had no word characters at all

    std::vector<std::string> out;
    out.reserve(kept.size());
    for (auto r : kept) {
        auto t = trim(r);
        out.emplace_back(text.substr(t.first, t.second - t.first));
    }
    return out;
}

}  // namespace mosaic
