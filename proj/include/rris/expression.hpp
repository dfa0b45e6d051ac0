#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rris/error.hpp"
#include "rris/lexicon.hpp"
#include "rris/random.hpp"
#include "rris/text.hpp"

namespace rris {

enum class Tag { noun, adj_color, adj_position, other };

struct ReferringExpression {
    std::string text;
    std::vector<std::string> tokens;
    std::vector<Tag> tags;

    std::string normalized() const { return join_words(tokens); }
};

struct ImageContext {
    std::int64_t image_id = 0;
    std::set<int> categories_present;

    bool has(int category_id) const { return categories_present.count(category_id) != 0; }
};

enum class GenStrategy { random_sentence, category_name, replace_target, change_attribute, change_relation };

inline constexpr std::array<GenStrategy, 5> kStrategyCycle = {
    GenStrategy::random_sentence, GenStrategy::category_name, GenStrategy::replace_target,
    GenStrategy::change_attribute, GenStrategy::change_relation};

constexpr std::string_view to_string(GenStrategy s) {
    switch (s) {
    case GenStrategy::random_sentence: return "random_sentence";
    case GenStrategy::category_name: return "category_name";
    case GenStrategy::replace_target: return "replace_target";
    case GenStrategy::change_attribute: return "change_attribute";
    case GenStrategy::change_relation: return "change_relation";
    }
    return "unknown";
}

inline GenStrategy strategy_from_string(std::string_view name) {
    for (auto s : kStrategyCycle)
        if (to_string(s) == name) return s;
    throw Error(ErrorCode::parse_error, "unknown generation strategy '" + std::string(name) + "'");
}

/// A generated negative. `source_ref_id` names the reference whose text was
/// the raw material: the donor reference for random_sentence, the owning
/// reference otherwise.
struct NegativeSentence {
    std::string text;
    GenStrategy strategy = GenStrategy::category_name;
    std::int64_t source_ref_id = 0;

    friend bool operator==(const NegativeSentence&, const NegativeSentence&) = default;
};

/// Positive sentence from some reference, available as a strategy-1 donor.
struct PoolEntry {
    std::string sentence;
    std::int64_t ref_id = 0;
    std::int64_t image_id = 0;
};

// Bounded search limits.
inline constexpr std::size_t kRandomSentenceDraws = 64;
inline constexpr std::size_t kSlotAttempts = 8;
inline constexpr std::size_t kFallbackAttempts = 64;

inline bool is_noun_word(const std::string& word, const CategoryCatalog& catalog, const Lexicons& lex) {
    if (catalog.is_noun_word(word) || lex.nouns.count(word)) return true;
    for (const auto& s : singular_candidates(word))
        if (lex.nouns.count(s)) return true;
    return false;
}

/// Lexicon tagger. A word that is both a noun and a color ("orange") counts
/// as a color when the next word is a noun.
inline ReferringExpression tag_tokens(std::string_view text, const CategoryCatalog& catalog, const Lexicons& lex) {
    ReferringExpression expr;
    expr.text = std::string(text);
    expr.tokens = tokenize(text);
    if (expr.tokens.empty()) throw Error(ErrorCode::empty_expression, "expression has no words");
    std::vector<bool> noun_like(expr.tokens.size());
    for (std::size_t i = 0; i < expr.tokens.size(); ++i) noun_like[i] = is_noun_word(expr.tokens[i], catalog, lex);
    for (std::size_t i = 0; i < expr.tokens.size(); ++i) {
        const auto& w = expr.tokens[i];
        const bool next_is_noun = i + 1 < expr.tokens.size() && noun_like[i + 1];
        if (noun_like[i] && !(lex.is_color(w) && next_is_noun))
            expr.tags.push_back(Tag::noun);
        else if (lex.is_color(w))
            expr.tags.push_back(Tag::adj_color);
        else if (lex.is_position(w))
            expr.tags.push_back(Tag::adj_position);
        else
            expr.tags.push_back(Tag::other);
    }
    return expr;
}

inline std::optional<std::size_t> first_noun(const ReferringExpression& expr) {
    for (std::size_t i = 0; i < expr.tags.size(); ++i)
        if (expr.tags[i] == Tag::noun) return i;
    return std::nullopt;
}

struct CategoryMention {
    std::size_t begin = 0;
    std::size_t end = 0;
    int category_id = 0;
};

/// Greedy longest-match scan for catalog names and synonyms.
inline std::vector<CategoryMention> find_categories(const std::vector<std::string>& tokens,
                                                    const CategoryCatalog& catalog) {
    std::vector<CategoryMention> out;
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool matched = false;
        for (std::size_t len = std::min(catalog.max_phrase_words(), tokens.size() - i); len >= 1; --len) {
            if (auto id = catalog.lookup_phrase(join_words(tokens, i, i + len))) {
                out.push_back({i, i + len, *id});
                i += len;
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return out;
}

/// Noun spans: each NOUN token, merged with the catalog mention covering it
/// so that "teddy bear" is one unit.
inline std::vector<std::pair<std::size_t, std::size_t>> noun_units(const ReferringExpression& expr,
                                                                   const CategoryCatalog& catalog) {
    const auto mentions = find_categories(expr.tokens, catalog);
    std::vector<std::pair<std::size_t, std::size_t>> units;
    for (std::size_t i = 0; i < expr.tokens.size(); ++i) {
        if (expr.tags[i] != Tag::noun) continue;
        std::pair<std::size_t, std::size_t> unit{i, i + 1};
        for (const auto& m : mentions)
            if (m.begin <= i && i < m.end) unit = {m.begin, m.end};
        if (units.empty() || units.back() != unit) units.push_back(unit);
    }
    return units;
}

inline std::vector<const Category*> absent_categories(const CategoryCatalog& catalog, const ImageContext& target) {
    std::vector<const Category*> out;
    for (const auto& c : catalog.entries())
        if (!target.has(c.id)) out.push_back(&c);
    return out;
}

/// True iff no category named in `text` is present in the image and the text
/// is not made only of vague or untagged words.
inline bool validate_negative(std::string_view text, const CategoryCatalog& catalog, const ImageContext& target,
                              const Lexicons& lex) {
    if (tokenize(text).empty()) return false;
    const auto expr = tag_tokens(text, catalog, lex);
    for (const auto& m : find_categories(expr.tokens, catalog))
        if (target.has(m.category_id)) return false;
    for (std::size_t i = 0; i < expr.tokens.size(); ++i)
        if (expr.tags[i] != Tag::other && !lex.is_vague(expr.tokens[i])) return true;
    return false;
}

inline std::optional<NegativeSentence> strategy_random_sentence(std::span<const PoolEntry> pool,
                                                                const ImageContext& target,
                                                                const CategoryCatalog& catalog,
                                                                const Lexicons& lex, Rng& rng) {
    if (pool.empty()) return std::nullopt;
    for (std::size_t draw = 0; draw < kRandomSentenceDraws; ++draw) {
        const auto& entry = pool[rng.index(pool.size())];
        if (entry.image_id == target.image_id) continue;
        if (validate_negative(entry.sentence, catalog, target, lex))
            return NegativeSentence{entry.sentence, GenStrategy::random_sentence, entry.ref_id};
    }
    return std::nullopt;
}

inline NegativeSentence strategy_category(const CategoryCatalog& catalog, const ImageContext& target, Rng& rng,
                                          std::int64_t source_ref_id = 0) {
    const auto absent = absent_categories(catalog, target);
    if (absent.empty())
        throw Error(ErrorCode::no_absent_category, "image " + std::to_string(target.image_id) +
                                                       " contains every catalog category");
    const auto* pick = absent[rng.index(absent.size())];
    return {normalize_text(pick->name), GenStrategy::category_name, source_ref_id};
}

inline std::optional<NegativeSentence> strategy_replace_target(const ReferringExpression& expr,
                                                               const CategoryCatalog& catalog,
                                                               const ImageContext& target, Rng& rng,
                                                               std::int64_t source_ref_id = 0) {
    const auto units = noun_units(expr, catalog);
    const auto absent = absent_categories(catalog, target);
    if (units.empty() || absent.empty()) return std::nullopt;
    const auto [begin, end] = units.front();
    std::vector<std::string> words(expr.tokens.begin(), expr.tokens.begin() + static_cast<std::ptrdiff_t>(begin));
    for (auto& w : tokenize(absent[rng.index(absent.size())]->name)) words.push_back(std::move(w));
    words.insert(words.end(), expr.tokens.begin() + static_cast<std::ptrdiff_t>(end), expr.tokens.end());
    return NegativeSentence{join_words(words), GenStrategy::replace_target, source_ref_id};
}

inline std::optional<NegativeSentence> strategy_change_attribute(const ReferringExpression& expr,
                                                                 const Lexicons& lex, Rng& rng,
                                                                 std::int64_t source_ref_id = 0) {
    const auto noun = first_noun(expr);
    if (!noun) return std::nullopt;
    std::vector<std::size_t> slots;
    for (std::size_t i = 0; i < expr.tags.size(); ++i)
        if (expr.tags[i] == Tag::adj_color || expr.tags[i] == Tag::adj_position) slots.push_back(i);

    std::vector<std::string> words = expr.tokens;
    if (!slots.empty()) {
        const std::size_t slot = slots[rng.index(slots.size())];
        const auto& pool = expr.tags[slot] == Tag::adj_color ? lex.colors : lex.positions;
        std::vector<std::string> choices;
        for (const auto& w : pool)
            if (w != words[slot]) choices.push_back(w);
        if (choices.empty()) return std::nullopt;
        words[slot] = choices[rng.index(choices.size())];
    } else {
        const auto& position = lex.positions[rng.index(lex.positions.size())];
        const auto& color = lex.colors[rng.index(lex.colors.size())];
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(*noun), color);
        words.insert(words.begin(), position);
    }
    return NegativeSentence{join_words(words), GenStrategy::change_attribute, source_ref_id};
}

inline std::optional<NegativeSentence> strategy_change_relation(const ReferringExpression& expr,
                                                                const CategoryCatalog& catalog,
                                                                const ImageContext& target, const Lexicons& lex,
                                                                Rng& rng, std::int64_t source_ref_id = 0) {
    const auto units = noun_units(expr, catalog);
    const auto absent = absent_categories(catalog, target);
    if (units.empty() || absent.empty()) return std::nullopt;
    const auto category = tokenize(absent[rng.index(absent.size())]->name);
    std::vector<std::string> words;
    if (units.size() >= 2) {
        const auto [begin, end] = units[1];
        words.assign(expr.tokens.begin(), expr.tokens.begin() + static_cast<std::ptrdiff_t>(begin));
        words.insert(words.end(), category.begin(), category.end());
        words.insert(words.end(), expr.tokens.begin() + static_cast<std::ptrdiff_t>(end), expr.tokens.end());
    } else {
        words = expr.tokens;
        words.push_back(lex.positions[rng.index(lex.positions.size())]);
        words.emplace_back("to");
        words.emplace_back("the");
        words.insert(words.end(), category.begin(), category.end());
    }
    return NegativeSentence{join_words(words), GenStrategy::change_relation, source_ref_id};
}

/// What the generator needs to know about one reference.
struct GenerationTarget {
    std::int64_t ref_id = 0;
    std::vector<std::string> positives;
    ImageContext image;
};

/// Produces exactly `n` distinct validated negatives. Strategies cycle in
/// order 1..5 from a seeded per-reference starting point (train mode asks for
/// only one or two, which would otherwise always be strategies 1 and 2); a
/// strategy that cannot yield a fresh valid sentence within its attempts
/// falls back to a category name.
inline std::vector<NegativeSentence> generate_negatives(const GenerationTarget& ref, std::span<const PoolEntry> pool,
                                                        const CategoryCatalog& catalog, const Lexicons& lex,
                                                        std::size_t n, std::uint64_t seed) {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "number of negatives must be at least 1");
    Rng rng(sub_seed(seed, ref.ref_id));

    std::vector<ReferringExpression> sources;
    std::set<std::string> taken;
    for (const auto& s : ref.positives) {
        taken.insert(normalize_text(s));
        if (!tokenize(s).empty()) sources.push_back(tag_tokens(s, catalog, lex));
    }

    auto attempt = [&](GenStrategy strategy) -> std::optional<NegativeSentence> {
        const ReferringExpression* source = sources.empty() ? nullptr : &sources[rng.index(sources.size())];
        switch (strategy) {
        case GenStrategy::random_sentence:
            return strategy_random_sentence(pool, ref.image, catalog, lex, rng);
        case GenStrategy::category_name:
            if (absent_categories(catalog, ref.image).empty()) return std::nullopt;
            return strategy_category(catalog, ref.image, rng, ref.ref_id);
        case GenStrategy::replace_target:
            if (!source) return std::nullopt;
            return strategy_replace_target(*source, catalog, ref.image, rng, ref.ref_id);
        case GenStrategy::change_attribute:
            if (!source) return std::nullopt;
            return strategy_change_attribute(*source, lex, rng, ref.ref_id);
        case GenStrategy::change_relation:
            if (!source) return std::nullopt;
            return strategy_change_relation(*source, catalog, ref.image, lex, rng, ref.ref_id);
        }
        return std::nullopt;
    };

    auto accept = [&](const std::optional<NegativeSentence>& c) {
        return c && !taken.count(normalize_text(c->text)) && validate_negative(c->text, catalog, ref.image, lex);
    };

    const std::size_t start = rng.index(kStrategyCycle.size());
    std::vector<NegativeSentence> out;
    out.reserve(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
        const GenStrategy strategy = kStrategyCycle[(start + slot) % kStrategyCycle.size()];
        std::optional<NegativeSentence> chosen;
        for (std::size_t k = 0; k < kSlotAttempts && !chosen; ++k)
            if (auto c = attempt(strategy); accept(c)) chosen = std::move(c);
        for (std::size_t k = 0; k < kFallbackAttempts && !chosen; ++k)
            if (auto c = attempt(GenStrategy::category_name); accept(c)) chosen = std::move(c);
        if (!chosen)
            throw Error(ErrorCode::generation_exhausted, "reference " + std::to_string(ref.ref_id) + ": produced only " +
                                                             std::to_string(out.size()) + " of " + std::to_string(n) +
                                                             " distinct valid negatives");
        taken.insert(normalize_text(chosen->text));
        out.push_back(std::move(*chosen));
    }
    return out;
}

}  // namespace rris
