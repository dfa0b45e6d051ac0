#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rris/error.hpp"
#include "rris/expression.hpp"
#include "rris/lexicon.hpp"
#include "rris/mask.hpp"

namespace rris {

enum class Split { train, val };

constexpr std::string_view to_string(Split s) { return s == Split::train ? "train" : "val"; }

inline Split split_from_string(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    throw Error(ErrorCode::parse_error, "unknown split '" + std::string(s) + "'");
}

struct ImageRecord {
    std::int64_t id = 0;
    std::size_t width = 0;
    std::size_t height = 0;
    std::set<int> categories_present;

    ImageContext context() const { return {id, categories_present}; }
    friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct RefRecord {
    std::int64_t ref_id = 0;
    std::int64_t image_id = 0;
    Split split = Split::train;
    std::vector<std::string> sentences;
    RleMask gt_rle;
    std::vector<NegativeSentence> negatives;

    friend bool operator==(const RefRecord&, const RefRecord&) = default;
};

/// Annotations, optionally extended with generated negatives. Images and
/// references are kept sorted by id.
struct RobustDataset {
    std::vector<ImageRecord> images;
    CategoryCatalog categories;
    std::vector<RefRecord> references;

    const ImageRecord* image(std::int64_t id) const {
        auto it = std::lower_bound(images.begin(), images.end(), id,
                                   [](const ImageRecord& im, std::int64_t v) { return im.id < v; });
        return it != images.end() && it->id == id ? &*it : nullptr;
    }

    friend bool operator==(const RobustDataset& a, const RobustDataset& b) {
        return a.images == b.images && a.categories.entries() == b.categories.entries() && a.references == b.references;
    }
};

/// Checks ids, cross references and ground-truth shapes; sorts by id.
inline void verify_dataset(RobustDataset& ds) {
    std::sort(ds.images.begin(), ds.images.end(), [](auto& a, auto& b) { return a.id < b.id; });
    std::sort(ds.references.begin(), ds.references.end(), [](auto& a, auto& b) { return a.ref_id < b.ref_id; });
    for (std::size_t i = 1; i < ds.images.size(); ++i)
        if (ds.images[i].id == ds.images[i - 1].id)
            throw Error(ErrorCode::parse_error, "duplicate image id " + std::to_string(ds.images[i].id));
    for (std::size_t i = 1; i < ds.references.size(); ++i)
        if (ds.references[i].ref_id == ds.references[i - 1].ref_id)
            throw Error(ErrorCode::duplicate_reference, "duplicate ref_id " + std::to_string(ds.references[i].ref_id));
    for (const auto& im : ds.images) {
        if (im.width == 0 || im.height == 0)
            throw Error(ErrorCode::parse_error, "image " + std::to_string(im.id) + " has a zero dimension");
        for (int c : im.categories_present)
            if (!ds.categories.contains(c))
                throw Error(ErrorCode::dangling_reference,
                            "image " + std::to_string(im.id) + " lists unknown category " + std::to_string(c));
    }
    for (const auto& r : ds.references) {
        const auto* im = ds.image(r.image_id);
        if (!im)
            throw Error(ErrorCode::dangling_reference,
                        "reference " + std::to_string(r.ref_id) + " points at missing image " + std::to_string(r.image_id));
        if (r.sentences.empty())
            throw Error(ErrorCode::parse_error, "reference " + std::to_string(r.ref_id) + " has no sentences");
        if (r.gt_rle.width != im->width || r.gt_rle.height != im->height)
            throw Error(ErrorCode::shape_mismatch, "reference " + std::to_string(r.ref_id) + " ground truth is " +
                                                       std::to_string(r.gt_rle.width) + "x" + std::to_string(r.gt_rle.height) +
                                                       ", image is " + std::to_string(im->width) + "x" +
                                                       std::to_string(im->height));
    }
}

inline RobustDataset dataset_from_json(const nlohmann::json& j) {
    RobustDataset ds;
    try {
        ds.categories = catalog_from_json(j.at("categories"));
        for (const auto& im : j.at("images")) {
            ImageRecord rec;
            rec.id = im.at("id").get<std::int64_t>();
            rec.width = im.at("width").get<std::size_t>();
            rec.height = im.at("height").get<std::size_t>();
            for (const auto& c : im.at("categories_present")) rec.categories_present.insert(c.get<int>());
            ds.images.push_back(std::move(rec));
        }
        for (const auto& r : j.at("references")) {
            RefRecord rec;
            rec.ref_id = r.at("ref_id").get<std::int64_t>();
            rec.image_id = r.at("image_id").get<std::int64_t>();
            rec.split = split_from_string(r.at("split").get<std::string>());
            rec.sentences = r.at("sentences").get<std::vector<std::string>>();
            // A ground truth whose runs do not cover the image is a shape error,
            // reported against the image size below.
            const auto& gt = r.at("gt_rle");
            try {
                rec.gt_rle = rle_from_json(gt);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::malformed_rle) throw;
                throw Error(ErrorCode::shape_mismatch,
                            "reference " + std::to_string(rec.ref_id) + " ground truth: " + e.what());
            }
            if (r.contains("negatives"))
                for (const auto& n : r.at("negatives"))
                    rec.negatives.push_back({n.at("text").get<std::string>(),
                                             strategy_from_string(n.at("strategy").get<std::string>()),
                                             n.at("source_ref_id").get<std::int64_t>()});
            ds.references.push_back(std::move(rec));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, e.what());
    }
    verify_dataset(ds);
    return ds;
}

inline nlohmann::json to_json(const RobustDataset& ds, bool with_negatives = true) {
    nlohmann::json images = nlohmann::json::array();
    for (const auto& im : ds.images)
        images.push_back({{"id", im.id},
                          {"width", im.width},
                          {"height", im.height},
                          {"categories_present", std::vector<int>(im.categories_present.begin(), im.categories_present.end())}});
    nlohmann::json refs = nlohmann::json::array();
    for (const auto& r : ds.references) {
        nlohmann::json jr = {{"ref_id", r.ref_id},
                             {"image_id", r.image_id},
                             {"split", std::string(to_string(r.split))},
                             {"sentences", r.sentences},
                             {"gt_rle", to_json(r.gt_rle)}};
        if (with_negatives) {
            nlohmann::json negs = nlohmann::json::array();
            for (const auto& n : r.negatives)
                negs.push_back({{"text", n.text}, {"strategy", std::string(to_string(n.strategy))}, {"source_ref_id", n.source_ref_id}});
            jr["negatives"] = std::move(negs);
        }
        refs.push_back(std::move(jr));
    }
    return {{"images", std::move(images)}, {"categories", to_json(ds.categories)}, {"references", std::move(refs)}};
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
    out << content;
    if (!out) throw Error(ErrorCode::io_error, "write failed for " + path);
}

inline nlohmann::json parse_json(const std::string& text, const std::string& origin) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, origin + ": " + e.what());
    }
}

inline RobustDataset load_annotations(const std::string& path) { return dataset_from_json(parse_json(read_file(path), path)); }

/// Canonical text: sorted keys, two-space indent, UTF-8, trailing LF.
inline std::string serialize(const RobustDataset& ds) { return to_json(ds).dump(2, ' ', false) + "\n"; }

inline void serialize(const RobustDataset& ds, const std::string& path) { write_file(path, serialize(ds)); }

inline RobustDataset deserialize(const std::string& path) { return load_annotations(path); }

enum class BuildMode { train, val };

inline BuildMode build_mode_from_string(std::string_view s) {
    if (s == "train") return BuildMode::train;
    if (s == "val") return BuildMode::val;
    throw Error(ErrorCode::invalid_argument, "mode must be 'train' or 'val'");
}

struct BuildOptions {
    BuildMode mode = BuildMode::val;
    std::uint64_t seed = 0;
    std::size_t negatives_per_ref = 10;  // val mode only
    Lexicons lexicons = Lexicons::defaults();
    bool no_absolute_positions = false;
};

inline std::vector<PoolEntry> sentence_pool(const RobustDataset& ds) {
    std::vector<PoolEntry> pool;
    for (const auto& r : ds.references)
        for (const auto& s : r.sentences) pool.push_back({s, r.ref_id, r.image_id});
    return pool;
}

/// Val mode adds `negatives_per_ref` negatives to every reference; train mode
/// adds one per positive sentence.
inline RobustDataset build_robust_split(const RobustDataset& ds, const BuildOptions& opts) {
    const Lexicons lex = opts.no_absolute_positions ? opts.lexicons.without_absolute_positions() : opts.lexicons;
    const auto pool = sentence_pool(ds);
    RobustDataset out = ds;
    for (auto& r : out.references) {
        const std::size_t n = opts.mode == BuildMode::train ? r.sentences.size() : opts.negatives_per_ref;
        const GenerationTarget target{r.ref_id, r.sentences, out.image(r.image_id)->context()};
        r.negatives = generate_negatives(target, pool, out.categories, lex, n, opts.seed);
    }
    return out;
}

struct SplitStats {
    std::size_t reference_count = 0;
    double positives_per_reference = 0.0;
    double negatives_per_reference = 0.0;
    double sentences_per_reference = 0.0;
};

/// Per split ("train", "val") plus "all".
struct DatasetStats {
    std::map<std::string, SplitStats> splits;
};

inline DatasetStats compute_stats(const RobustDataset& ds) {
    if (ds.references.empty()) throw Error(ErrorCode::empty_input, "dataset has no references");
    std::map<std::string, std::array<std::size_t, 3>> counts;  // refs, positives, negatives
    for (const auto& r : ds.references) {
        for (const auto& key : {std::string(to_string(r.split)), std::string("all")}) {
            auto& c = counts[key];
            c[0] += 1;
            c[1] += r.sentences.size();
            c[2] += r.negatives.size();
        }
    }
    DatasetStats stats;
    for (const auto& [key, c] : counts) {
        const double refs = static_cast<double>(c[0]);
        stats.splits[key] = {c[0], static_cast<double>(c[1]) / refs, static_cast<double>(c[2]) / refs,
                             static_cast<double>(c[1] + c[2]) / refs};
    }
    return stats;
}

struct ValidationFailure {
    std::int64_t ref_id = 0;
    std::size_t negative_index = 0;
    std::string text;
    std::string reason;
};

inline std::vector<ValidationFailure> validate_dataset(const RobustDataset& ds, const Lexicons& lex) {
    std::vector<ValidationFailure> failures;
    for (const auto& r : ds.references) {
        const auto ctx = ds.image(r.image_id)->context();
        std::set<std::string> seen;
        for (const auto& s : r.sentences) seen.insert(normalize_text(s));
        for (std::size_t i = 0; i < r.negatives.size(); ++i) {
            const auto& text = r.negatives[i].text;
            if (!validate_negative(text, ds.categories, ctx, lex))
                failures.push_back({r.ref_id, i, text, "names a present category or is vague-only"});
            else if (!seen.insert(normalize_text(text)).second)
                failures.push_back({r.ref_id, i, text, "duplicate of another sentence of this reference"});
        }
    }
    return failures;
}

}  // namespace rris
