#pragma once

#include <array>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mosaic/rng.hpp"

namespace mosaic {

struct SynthSentence {
    std::string id;
    std::string text;
    std::string theme;
};

namespace detail {

struct SynthTheme {
    const char* name;
    const char* anchor;
    std::array<const char*, 15> words;  // three groups of five
};

inline const std::array<SynthTheme, 6>& synth_themes() {
    static const std::array<SynthTheme, 6> kThemes = {{
        {"geometry",
         "geometry",
         {"lattice", "hexagons", "spirals", "tunnels", "fractals", "tessellated",
          "honeycomb", "checkerboard", "mandala", "symmetric", "concentric",
          "rotating", "kaleidoscope", "gridlines", "polygons"}},
        {"colour",
         "colours",
         {"magenta", "turquoise", "crimson", "violet", "emerald", "amber",
          "indigo", "scarlet", "rainbow", "saturated", "luminous", "shimmering",
          "glowing", "vivid", "radiant"}},
        {"body",
         "body",
         {"floating", "weightless", "dissolving", "tingling", "warmth",
          "heartbeat", "breathing", "melting", "boundaries", "sinking",
          "drifting", "numbness", "pulsing", "levitating", "expanding"}},
        {"emotion",
         "emotion",
         {"euphoria", "blissful", "serene", "peaceful", "joyful", "ecstatic",
          "tranquil", "gratitude", "wonder", "tearful", "uplifting",
          "tenderness", "elated", "calmness", "contentment"}},
        {"memory",
         "memory",
         {"childhood", "nostalgia", "daydream", "imagination", "remembering",
          "scenes", "stories", "faces", "landscapes", "journey", "wandering",
          "narrative", "recollection", "episodes", "flashback"}},
        {"sound",
         "music",
         {"rhythm", "melody", "humming", "drumming", "resonance", "harmonics",
          "chanting", "echoes", "acoustic", "percussion", "soundscape",
          "trumpets", "whistling", "tones", "orchestral"}},
    }};
    return kThemes;
}

}  // namespace detail

// Seeded synthetic corpus: six themes with disjoint vocabularies, one hundred
// sentences each. Every sentence carries the theme anchor plus words drawn
// mostly from one of three sub-groups, so themes are separable while
// co-occurrence inside a theme stays heterogeneous. Sentences are unique.
inline std::vector<SynthSentence> generate_synthetic(uint64_t seed = 42) {
    static const std::array<const char*, 5> kPrefixes = {
        "I saw", "I felt", "There were", "It became", "Like"};

    const auto& themes = detail::synth_themes();
    SplitMix64 rng(derive_seed(seed, "synthetic"));
    std::vector<SynthSentence> out;
    std::set<std::string> seen;

    size_t serial = 0;
    for (size_t t = 0; t < themes.size(); ++t) {
        const auto& th = themes[t];
        for (size_t s = 0; s < 100; ++s) {
            std::string text;
            for (int attempt = 0; attempt < 100; ++attempt) {
                size_t g = s % 3;
                std::vector<std::string> words;
                words.emplace_back(th.anchor);

                std::array<size_t, 5> pick = {0, 1, 2, 3, 4};
                for (size_t i = 4; i > 0; --i)
                    std::swap(pick[i], pick[rng.next_below(i + 1)]);
                size_t c = 3 + rng.next_below(3);
                for (size_t i = 0; i < c; ++i)
                    words.emplace_back(th.words[g * 5 + pick[i]]);

                if (rng.next_double() < 0.35) {
                    size_t og = (g + 1 + rng.next_below(2)) % 3;
                    words.emplace_back(th.words[og * 5 + rng.next_below(5)]);
                }

                for (size_t i = words.size() - 1; i > 0; --i)
                    std::swap(words[i], words[rng.next_below(i + 1)]);

                text = kPrefixes[rng.next_below(kPrefixes.size())];
                for (const auto& w : words) {
                    text += ' ';
                    text += w;
                }
                text += '.';
                if (seen.insert(text).second) break;
                text.clear();
            }
            if (text.empty())  // exhausted retries; stamp a serial word
                text = std::string(th.anchor) + " variant " +
                       std::to_string(serial) + ".";

            char idbuf[16];
            std::snprintf(idbuf, sizeof idbuf, "syn-%04zu", serial++);
            out.push_back({idbuf, text, th.name});
        }
    }
    return out;
}

inline std::string synthetic_jsonl(uint64_t seed = 42) {
    std::string out;
    for (const auto& s : generate_synthetic(seed)) {
        nlohmann::json j;
        j["id"] = s.id;
        j["text"] = s.text;
        j["theme"] = s.theme;
        out += j.dump();
        out += '\n';
    }
    return out;
}

}  // namespace mosaic
