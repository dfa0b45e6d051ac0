#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rris/error.hpp"
#include "rris/mask.hpp"

namespace rris {

struct PositivePair {
    BinaryMask prediction;
    BinaryMask ground_truth;
};

/// Predictions for one reference: its positive sentences paired with the
/// shared ground truth, and the masks predicted for its negative sentences.
struct ReferenceEval {
    std::int64_t ref_id = 0;
    std::vector<PositivePair> positives;
    std::vector<BinaryMask> negatives;
};

inline const std::vector<double> kDefaultThresholds = {0.5, 0.7, 0.9};

struct MetricReport {
    double r_iou = 0.0;
    double m_rr = 0.0;
    double m_iou = 0.0;
    double o_iou = 0.0;
    std::map<double, double> precision_at;
    // Undefined when every positive prediction is empty.
    std::optional<double> r2vos_r;
    std::size_t reference_count = 0;
};

namespace detail {

inline void check_reference(const ReferenceEval& ref) {
    const BinaryMask* shape = nullptr;
    auto check = [&](const BinaryMask& m) {
        if (shape == nullptr)
            shape = &m;
        else if (!shape->same_shape(m))
            throw Error(ErrorCode::shape_mismatch, "masks of reference " + std::to_string(ref.ref_id) +
                                                       " disagree in size");
    };
    for (const auto& p : ref.positives) {
        check(p.prediction);
        check(p.ground_truth);
    }
    for (const auto& n : ref.negatives) check(n);
}

// Fixed reduction order (ascending ref_id) makes every metric independent of
// the input order.
inline std::vector<const ReferenceEval*> ordered(std::span<const ReferenceEval> refs) {
    if (refs.empty()) throw Error(ErrorCode::empty_input, "no references to evaluate");
    std::vector<const ReferenceEval*> out;
    out.reserve(refs.size());
    for (const auto& r : refs) {
        check_reference(r);
        out.push_back(&r);
    }
    std::sort(out.begin(), out.end(), [](auto* a, auto* b) { return a->ref_id < b->ref_id; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i]->ref_id == out[i - 1]->ref_id)
            throw Error(ErrorCode::duplicate_reference, "ref_id " + std::to_string(out[i]->ref_id) + " appears twice");
    return out;
}

template <class Fn>
void for_each_positive(const std::vector<const ReferenceEval*>& refs, Fn&& fn) {
    for (const auto* r : refs)
        for (const auto& p : r->positives) fn(p);
}

}  // namespace detail

/// One reference's robust IoU term; integer sums, one division.
inline double reference_r_iou(const ReferenceEval& ref) {
    std::uint64_t inter = 0;
    std::uint64_t uni = 0;
    for (const auto& p : ref.positives) {
        inter += intersection_area(p.prediction, p.ground_truth);
        uni += union_area(p.prediction, p.ground_truth);
    }
    std::uint64_t negative_pixels = 0;
    for (const auto& n : ref.negatives) negative_pixels += n.area();
    const std::uint64_t denom = uni + negative_pixels;
    if (denom == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(denom);
}

inline double r_iou(std::span<const ReferenceEval> refs) {
    const auto order = detail::ordered(refs);
    double sum = 0.0;
    for (const auto* r : order) sum += reference_r_iou(*r);
    return sum / static_cast<double>(order.size());
}

/// Fraction of negative predictions that are exactly 0-pixel masks.
inline double robust_recall(const ReferenceEval& ref) {
    if (ref.negatives.empty())
        throw Error(ErrorCode::no_negatives, "reference " + std::to_string(ref.ref_id) + " has no negatives");
    std::size_t empty = 0;
    for (const auto& n : ref.negatives)
        if (n.area() == 0) ++empty;
    return static_cast<double>(empty) / static_cast<double>(ref.negatives.size());
}

/// References without negatives are skipped, not counted as perfect.
inline double mean_robust_recall(std::span<const ReferenceEval> refs) {
    const auto order = detail::ordered(refs);
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto* r : order) {
        if (r->negatives.empty()) continue;
        sum += robust_recall(*r);
        ++counted;
    }
    if (counted == 0) throw Error(ErrorCode::empty_input, "no reference has negative sentences");
    return sum / static_cast<double>(counted);
}

inline double mean_iou(std::span<const ReferenceEval> refs) {
    const auto order = detail::ordered(refs);
    double sum = 0.0;
    std::size_t count = 0;
    detail::for_each_positive(order, [&](const PositivePair& p) {
        sum += iou(p.prediction, p.ground_truth);
        ++count;
    });
    if (count == 0) throw Error(ErrorCode::empty_input, "no positive samples");
    return sum / static_cast<double>(count);
}

inline double overall_iou(std::span<const ReferenceEval> refs) {
    const auto order = detail::ordered(refs);
    std::uint64_t inter = 0;
    std::uint64_t uni = 0;
    std::size_t count = 0;
    detail::for_each_positive(order, [&](const PositivePair& p) {
        inter += intersection_area(p.prediction, p.ground_truth);
        uni += union_area(p.prediction, p.ground_truth);
        ++count;
    });
    if (count == 0) throw Error(ErrorCode::empty_input, "no positive samples");
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Share of positive samples whose IoU is strictly above `threshold`.
inline double precision_at(std::span<const ReferenceEval> refs, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw Error(ErrorCode::invalid_argument, "precision threshold must lie in (0, 1)");
    const auto order = detail::ordered(refs);
    std::size_t passed = 0;
    std::size_t count = 0;
    detail::for_each_positive(order, [&](const PositivePair& p) {
        if (iou(p.prediction, p.ground_truth) > threshold) ++passed;
        ++count;
    });
    if (count == 0) throw Error(ErrorCode::empty_input, "no positive samples");
    return static_cast<double>(passed) / static_cast<double>(count);
}

/// 1 - (negative predicted pixels) / (positive predicted pixels).
inline double r2vos_r(std::span<const ReferenceEval> refs) {
    const auto order = detail::ordered(refs);
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    for (const auto* r : order) {
        for (const auto& p : r->positives) pos += p.prediction.area();
        for (const auto& n : r->negatives) neg += n.area();
    }
    if (pos == 0) throw Error(ErrorCode::degenerate_denominator, "all positive predictions are empty");
    return 1.0 - static_cast<double>(neg) / static_cast<double>(pos);
}

inline MetricReport aggregate_report(std::span<const ReferenceEval> refs,
                                     const std::vector<double>& thresholds = kDefaultThresholds) {
    MetricReport report;
    report.reference_count = detail::ordered(refs).size();
    report.r_iou = r_iou(refs);
    report.m_rr = mean_robust_recall(refs);
    report.m_iou = mean_iou(refs);
    report.o_iou = overall_iou(refs);
    for (double t : thresholds) report.precision_at[t] = precision_at(refs, t);
    try {
        report.r2vos_r = r2vos_r(refs);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::degenerate_denominator) throw;
    }
    return report;
}

namespace detail {
inline std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}
inline std::string threshold_key(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}
}  // namespace detail

/// Canonical JSON (sorted keys, 6 decimals).
inline std::string report_json(const MetricReport& r) {
    std::string out = "{\n";
    out += "  \"m_iou\": " + detail::fixed6(r.m_iou) + ",\n";
    out += "  \"m_rr\": " + detail::fixed6(r.m_rr) + ",\n";
    out += "  \"o_iou\": " + detail::fixed6(r.o_iou) + ",\n";
    out += "  \"precision_at\": {";
    bool first = true;
    for (const auto& [t, v] : r.precision_at) {
        out += first ? "\n" : ",\n";
        out += "    \"" + detail::threshold_key(t) + "\": " + detail::fixed6(v);
        first = false;
    }
    out += first ? "},\n" : "\n  },\n";
    out += "  \"r2vos_r\": " + (r.r2vos_r ? detail::fixed6(*r.r2vos_r) : std::string("null")) + ",\n";
    out += "  \"r_iou\": " + detail::fixed6(r.r_iou) + ",\n";
    out += "  \"reference_count\": " + std::to_string(r.reference_count) + "\n";
    out += "}\n";
    return out;
}

inline std::string report_table(const MetricReport& r) {
    std::vector<std::pair<std::string, std::string>> rows = {
        {"references", std::to_string(r.reference_count)},
        {"rIoU", detail::fixed6(r.r_iou)},
        {"mRR", detail::fixed6(r.m_rr)},
        {"mIoU", detail::fixed6(r.m_iou)},
        {"oIoU", detail::fixed6(r.o_iou)},
    };
    for (const auto& [t, v] : r.precision_at) rows.emplace_back("P@" + detail::threshold_key(t), detail::fixed6(v));
    rows.emplace_back("R (R2VOS)", r.r2vos_r ? detail::fixed6(*r.r2vos_r) : std::string("n/a"));
    std::size_t width = 0;
    for (const auto& row : rows) width = std::max(width, row.first.size());
    std::string out;
    for (const auto& [name, value] : rows) out += name + std::string(width - name.size() + 2, ' ') + value + "\n";
    return out;
}

}  // namespace rris
