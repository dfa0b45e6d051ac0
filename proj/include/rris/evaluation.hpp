#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "rris/dataset.hpp"
#include "rris/metrics.hpp"

namespace rris {

/// One predicted mask. `sentence_id` indexes the reference's positive
/// sentences or, when `is_negative`, its negatives. No RLE means an
/// explicit 0-pixel mask.
struct Prediction {
    std::int64_t ref_id = 0;
    std::size_t sentence_id = 0;
    bool is_negative = false;
    std::optional<RleMask> rle;
};

inline std::vector<Prediction> predictions_from_json(const nlohmann::json& j) {
    std::vector<Prediction> out;
    try {
        for (const auto& p : j) {
            Prediction pred;
            pred.ref_id = p.at("ref_id").get<std::int64_t>();
            pred.sentence_id = p.at("sentence_id").get<std::size_t>();
            pred.is_negative = p.at("is_negative").get<bool>();
            if (!p.at("rle").is_null()) pred.rle = rle_from_json(p.at("rle"));
            out.push_back(std::move(pred));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::parse_error, std::string("bad predictions file: ") + e.what());
    }
    return out;
}

inline nlohmann::json to_json(const std::vector<Prediction>& preds) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& p : preds)
        out.push_back({{"ref_id", p.ref_id},
                       {"sentence_id", p.sentence_id},
                       {"is_negative", p.is_negative},
                       {"rle", p.rle ? to_json(*p.rle) : nlohmann::json(nullptr)}});
    return out;
}

inline std::vector<Prediction> load_predictions(const std::string& path) {
    return predictions_from_json(parse_json(read_file(path), path));
}

struct EvalJoin {
    std::vector<ReferenceEval> references;
    std::vector<std::string> missing;   // "ref 3 positive 1"
    std::vector<std::string> problems;  // unknown ids, wrong sizes, duplicates

    bool complete() const { return missing.empty() && problems.empty(); }
};

/// Pairs every (reference, sentence) of the dataset with its prediction.
inline EvalJoin join_predictions(const RobustDataset& ds, const std::vector<Prediction>& preds) {
    using Key = std::tuple<std::int64_t, bool, std::size_t>;
    std::map<Key, const Prediction*> index;
    EvalJoin join;
    auto describe = [](std::int64_t ref, bool neg, std::size_t id) {
        return "ref " + std::to_string(ref) + (neg ? " negative " : " positive ") + std::to_string(id);
    };
    for (const auto& p : preds)
        if (!index.emplace(Key{p.ref_id, p.is_negative, p.sentence_id}, &p).second)
            join.problems.push_back("duplicate prediction for " + describe(p.ref_id, p.is_negative, p.sentence_id));

    std::size_t used = 0;
    for (const auto& r : ds.references) {
        const auto* im = ds.image(r.image_id);
        const BinaryMask gt = rle_decode(r.gt_rle);
        ReferenceEval eval{r.ref_id, {}, {}};
        auto fetch = [&](bool neg, std::size_t id) -> std::optional<BinaryMask> {
            auto it = index.find(Key{r.ref_id, neg, id});
            if (it == index.end()) {
                join.missing.push_back(describe(r.ref_id, neg, id));
                return std::nullopt;
            }
            ++used;
            if (!it->second->rle) return BinaryMask(im->width, im->height);
            const auto& rle = *it->second->rle;
            if (rle.width != im->width || rle.height != im->height) {
                join.problems.push_back("prediction for " + describe(r.ref_id, neg, id) + " has the wrong size");
                return std::nullopt;
            }
            return rle_decode(rle);
        };
        for (std::size_t i = 0; i < r.sentences.size(); ++i)
            if (auto m = fetch(false, i)) eval.positives.push_back({std::move(*m), gt});
        for (std::size_t i = 0; i < r.negatives.size(); ++i)
            if (auto m = fetch(true, i)) eval.negatives.push_back(std::move(*m));
        join.references.push_back(std::move(eval));
    }
    if (used < index.size()) {
        for (const auto& entry : index) {
            const auto& [ref, neg, id] = entry.first;
            const auto it = std::find_if(ds.references.begin(), ds.references.end(),
                                         [&](const RefRecord& r) { return r.ref_id == ref; });
            const bool known = it != ds.references.end() && id < (neg ? it->negatives.size() : it->sentences.size());
            if (!known) join.problems.push_back("prediction for unknown " + describe(ref, neg, id));
        }
    }
    return join;
}

}  // namespace rris
