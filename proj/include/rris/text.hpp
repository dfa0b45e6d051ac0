#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rris {

/// Lowercase, strip punctuation, collapse whitespace. Apostrophes and hyphens
/// are deleted ("t-shirt" -> "tshirt"); any other punctuation separates words.
inline std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (c == '\'' || c == '-') continue;
        if (std::isalnum(c) || c >= 0x80) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

inline std::vector<std::string> split_words(std::string_view normalized) {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < normalized.size()) {
        while (i < normalized.size() && normalized[i] == ' ') ++i;
        const std::size_t start = i;
        while (i < normalized.size() && normalized[i] != ' ') ++i;
        if (i > start) words.emplace_back(normalized.substr(start, i - start));
    }
    return words;
}

inline std::vector<std::string> tokenize(std::string_view text) { return split_words(normalize_text(text)); }

inline std::string join_words(const std::vector<std::string>& words, std::size_t begin = 0,
                              std::size_t end = std::string::npos) {
    std::string out;
    end = std::min(end, words.size());
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back(' ');
        out += words[i];
    }
    return out;
}

/// Crude English singular forms to try when a plural misses a lookup.
inline std::vector<std::string> singular_candidates(std::string_view word) {
    std::vector<std::string> out;
    if (word.size() > 3 && word.ends_with("ies")) out.push_back(std::string(word.substr(0, word.size() - 3)) + "y");
    if (word.size() > 3 && word.ends_with("es")) out.emplace_back(word.substr(0, word.size() - 2));
    if (word.size() > 2 && word.ends_with('s') && !word.ends_with("ss")) out.emplace_back(word.substr(0, word.size() - 1));
    return out;
}

/// FNV-1a, used to map words onto embedding rows.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace rris
