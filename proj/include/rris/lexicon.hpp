#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rris/detail/default_lexicon_data.hpp"
#include "rris/error.hpp"
#include "rris/text.hpp"

namespace rris {

struct Category {
    int id = 0;
    std::string name;
    std::vector<std::string> synonyms;

    friend bool operator==(const Category&, const Category&) = default;
};

/// Category list with phrase lookup over names and synonyms. Plural forms of
/// a phrase's last word resolve to the singular entry.
class CategoryCatalog {
public:
    CategoryCatalog() = default;

    explicit CategoryCatalog(std::vector<Category> entries) : entries_(std::move(entries)) {
        std::set<int> ids;
        for (const auto& c : entries_) {
            if (!ids.insert(c.id).second)
                throw Error(ErrorCode::invalid_argument, "duplicate category id " + std::to_string(c.id));
            if (normalize_text(c.name).empty())
                throw Error(ErrorCode::invalid_argument, "category " + std::to_string(c.id) + " has an empty name");
            add_phrase(c.name, c.id);
            for (const auto& s : c.synonyms) add_phrase(s, c.id);
        }
    }

    static const CategoryCatalog& coco() {
        static const CategoryCatalog catalog = [] {
            std::vector<Category> entries;
            for (const auto& seed : detail::kCocoCatalog) {
                Category c{seed.id, std::string(seed.name), {}};
                std::string_view rest = seed.synonyms;
                while (!rest.empty()) {
                    const auto bar = rest.find('|');
                    c.synonyms.emplace_back(rest.substr(0, bar));
                    rest = bar == std::string_view::npos ? std::string_view{} : rest.substr(bar + 1);
                }
                entries.push_back(std::move(c));
            }
            return CategoryCatalog(std::move(entries));
        }();
        return catalog;
    }

    const std::vector<Category>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    const Category* find(int id) const {
        for (const auto& c : entries_)
            if (c.id == id) return &c;
        return nullptr;
    }

    bool contains(int id) const { return find(id) != nullptr; }

    std::optional<int> lookup_phrase(const std::string& phrase) const {
        if (auto it = phrases_.find(phrase); it != phrases_.end()) return it->second;
        const auto space = phrase.rfind(' ');
        const std::string prefix = space == std::string::npos ? "" : phrase.substr(0, space + 1);
        const std::string last = space == std::string::npos ? phrase : phrase.substr(space + 1);
        for (const auto& singular : singular_candidates(last))
            if (auto it = phrases_.find(prefix + singular); it != phrases_.end()) return it->second;
        return std::nullopt;
    }

    /// True for single-word names/synonyms and for the head (last) word of a
    /// multi-word name such as "light" in "traffic light".
    bool is_noun_word(const std::string& word) const {
        if (noun_words_.count(word)) return true;
        for (const auto& singular : singular_candidates(word))
            if (noun_words_.count(singular)) return true;
        return false;
    }

    std::size_t max_phrase_words() const noexcept { return max_words_; }

private:
    void add_phrase(const std::string& raw, int id) {
        const auto words = tokenize(raw);
        if (words.empty()) return;
        phrases_.emplace(join_words(words), id);
        noun_words_.insert(words.back());
        max_words_ = std::max(max_words_, words.size());
    }

    std::vector<Category> entries_;
    std::map<std::string, int> phrases_;
    std::set<std::string> noun_words_;
    std::size_t max_words_ = 1;
};

inline nlohmann::json to_json(const CategoryCatalog& catalog) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : catalog.entries())
        out.push_back({{"id", c.id}, {"name", c.name}, {"synonyms", c.synonyms}});
    return out;
}

inline CategoryCatalog catalog_from_json(const nlohmann::json& j) {
    try {
        std::vector<Category> entries;
        for (const auto& e : j) {
            Category c;
            c.id = e.at("id").get<int>();
            c.name = e.at("name").get<std::string>();
            if (e.contains("synonyms")) c.synonyms = e.at("synonyms").get<std::vector<std::string>>();
            entries.push_back(std::move(c));
        }
        return CategoryCatalog(std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("bad category catalog: ") + e.what());
    }
}

/// Word lists driving the tagger and the attribute/relation edits.
struct Lexicons {
    std::set<std::string> vague_words;
    std::vector<std::string> colors;
    std::vector<std::string> positions;
    std::set<std::string> nouns;

    static const Lexicons& defaults() {
        static const Lexicons lex = [] {
            Lexicons l;
            for (auto w : detail::kDefaultVague) l.vague_words.emplace(w);
            for (auto w : detail::kDefaultColors) l.colors.emplace_back(w);
            for (auto w : detail::kDefaultPositions) l.positions.emplace_back(w);
            for (auto w : detail::kDefaultNouns) l.nouns.emplace(w);
            l.validate();
            return l;
        }();
        return lex;
    }

    bool is_color(const std::string& w) const { return std::find(colors.begin(), colors.end(), w) != colors.end(); }
    bool is_position(const std::string& w) const {
        return std::find(positions.begin(), positions.end(), w) != positions.end();
    }
    bool is_vague(const std::string& w) const { return vague_words.count(w) != 0; }

    void validate() const {
        if (vague_words.empty() || colors.empty() || positions.empty())
            throw Error(ErrorCode::invalid_argument, "lexicon sections [vague], [colors], [positions] must be non-empty");
        for (const auto& c : colors)
            if (is_position(c)) throw Error(ErrorCode::invalid_argument, "word '" + c + "' is both a color and a position");
    }

    /// Drops absolute-position words, for corpora whose annotators were told
    /// not to use them (RefCOCO+).
    Lexicons without_absolute_positions() const {
        static const std::set<std::string> absolute = {"left",   "right", "top",      "bottom",    "middle",
                                                       "center", "upper", "lower",    "leftmost",  "rightmost",
                                                       "front",  "back",  "far",      "closest",   "nearest"};
        Lexicons out = *this;
        std::erase_if(out.positions, [&](const std::string& w) { return absolute.count(w) != 0; });
        if (out.positions.empty())
            throw Error(ErrorCode::invalid_argument, "no relative position words left after filtering");
        return out;
    }

    friend bool operator==(const Lexicons&, const Lexicons&) = default;
};

/// Plain-text lexicon: sections [vague], [colors], [positions], [nouns], one
/// word per line; '#' starts a comment. Sections that are absent keep the
/// defaults.
inline Lexicons parse_lexicon(std::istream& in) {
    Lexicons lex = Lexicons::defaults();
    std::set<std::string> seen;
    std::string section;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto words = tokenize(line);
        const auto first = line.find_first_not_of(" \t\r");
        if (first != std::string::npos && line[first] == '[') {
            const auto close = line.find(']', first);
            if (close == std::string::npos)
                throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": unterminated section");
            section = line.substr(first + 1, close - first - 1);
            if (section != "vague" && section != "colors" && section != "positions" && section != "nouns")
                throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": unknown section [" + section + "]");
            if (seen.insert(section).second) {
                if (section == "vague") lex.vague_words.clear();
                if (section == "colors") lex.colors.clear();
                if (section == "positions") lex.positions.clear();
                if (section == "nouns") lex.nouns.clear();
            }
            continue;
        }
        if (words.empty()) continue;
        if (section.empty())
            throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": word outside a section");
        const std::string word = join_words(words);
        if (section == "vague") lex.vague_words.insert(word);
        if (section == "colors" && !lex.is_color(word)) lex.colors.push_back(word);
        if (section == "positions" && !lex.is_position(word)) lex.positions.push_back(word);
        if (section == "nouns") lex.nouns.insert(word);
    }
    lex.validate();
    return lex;
}

inline Lexicons load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_error, "cannot open lexicon file " + path);
    return parse_lexicon(in);
}

inline void write_lexicon(std::ostream& out, const Lexicons& lex) {
    out << "[vague]\n";
    for (const auto& w : lex.vague_words) out << w << '\n';
    out << "\n[colors]\n";
    for (const auto& w : lex.colors) out << w << '\n';
    out << "\n[positions]\n";
    for (const auto& w : lex.positions) out << w << '\n';
    out << "\n[nouns]\n";
    for (const auto& w : lex.nouns) out << w << '\n';
}

}  // namespace rris
