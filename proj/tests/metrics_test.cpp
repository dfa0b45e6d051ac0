#include <gtest/gtest.h>

#include <random>

#include "oracle.hpp"
#include "rris/metrics.hpp"

using namespace rris;

namespace {

BinaryMask first_n(std::size_t n, std::size_t w = 5, std::size_t h = 4) {
    BinaryMask m(w, h);
    for (std::size_t i = 0; i < n; ++i) m.set_flat(i, true);
    return m;
}

BinaryMask range(std::size_t begin, std::size_t end, std::size_t w = 5, std::size_t h = 4) {
    BinaryMask m(w, h);
    for (std::size_t i = begin; i < end; ++i) m.set_flat(i, true);
    return m;
}

// (|∩|, |∪|) = (6, 10) on a 5x4 grid
PositivePair six_over_ten() { return {range(0, 8), range(2, 10)}; }

}  // namespace

TEST(RIoU, WorkedExample) {
    const std::vector<ReferenceEval> refs = {{1, {six_over_ten()}, {first_n(5)}}};
    EXPECT_EQ(reference_r_iou(refs[0]), 0.4);
    EXPECT_EQ(r_iou(refs), 0.4);
}

TEST(RIoU, PerfectAndAllEmpty) {
    const BinaryMask gt = range(3, 9);
    const std::vector<ReferenceEval> perfect = {{1, {{gt, gt}, {gt, gt}}, {first_n(0), first_n(0)}}};
    EXPECT_EQ(r_iou(perfect), 1.0);
    const std::vector<ReferenceEval> empty = {{1, {{first_n(0), gt}}, {first_n(0)}}};
    EXPECT_EQ(r_iou(empty), 0.0);
}

TEST(RIoU, ZeroDenominatorCountsAsPerfect) {
    const std::vector<ReferenceEval> refs = {{1, {{first_n(0), first_n(0)}}, {first_n(0)}}};
    EXPECT_EQ(r_iou(refs), 1.0);
}

TEST(RobustRecall, Counts) {
    EXPECT_EQ(robust_recall({1, {}, {first_n(0), first_n(0), first_n(0)}}), 1.0);
    EXPECT_EQ(robust_recall({1, {}, {first_n(1), first_n(2), first_n(3)}}), 0.0);
    EXPECT_DOUBLE_EQ(robust_recall({1, {}, {first_n(0), first_n(2), first_n(0)}}), 2.0 / 3.0);
    EXPECT_THROW(robust_recall({1, {}, {}}), Error);
}

TEST(RobustRecall, MeanSkipsReferencesWithoutNegatives) {
    const std::vector<ReferenceEval> refs = {{1, {six_over_ten()}, {first_n(0)}},
                                             {2, {six_over_ten()}, {first_n(4)}},
                                             {3, {six_over_ten()}, {}}};
    EXPECT_EQ(mean_robust_recall(refs), 0.5);
    const std::vector<ReferenceEval> none = {{3, {six_over_ten()}, {}}};
    EXPECT_THROW(mean_robust_recall(none), Error);
}

TEST(MeanAndOverallIoU, HandSums) {
    const std::vector<ReferenceEval> one = {{1, {six_over_ten()}, {}}};
    EXPECT_DOUBLE_EQ(mean_iou(one), 0.6);
    EXPECT_DOUBLE_EQ(overall_iou(one), 0.6);

    // (0, 10): disjoint masks of 5 px each
    const std::vector<ReferenceEval> two = {{1, {six_over_ten(), {range(0, 5), range(5, 10)}}, {}}};
    EXPECT_DOUBLE_EQ(mean_iou(two), 0.3);
    EXPECT_DOUBLE_EQ(overall_iou(two), 0.3);

    // (1, 2)
    const std::vector<ReferenceEval> three = {{1, {six_over_ten()}, {}}, {2, {{range(0, 2), range(1, 2)}}, {}}};
    EXPECT_DOUBLE_EQ(mean_iou(three), 0.55);
    EXPECT_DOUBLE_EQ(overall_iou(three), 7.0 / 12.0);
}

TEST(PrecisionAt, StrictThreshold) {
    const BinaryMask gt = range(0, 10);
    const std::vector<ReferenceEval> perfect = {{1, {{gt, gt}}, {}}};
    EXPECT_EQ(precision_at(perfect, 0.5), 1.0);

    // IoU 0.6 and 0.4
    const std::vector<ReferenceEval> mixed = {{1, {six_over_ten(), {range(0, 4), range(0, 10)}}, {}}};
    EXPECT_EQ(precision_at(mixed, 0.5), 0.5);

    const std::vector<ReferenceEval> boundary = {{1, {{range(0, 5), range(0, 10)}}, {}}};
    EXPECT_EQ(precision_at(boundary, 0.5), 0.0);
    EXPECT_THROW(precision_at(boundary, 1.0), Error);
    EXPECT_THROW(precision_at(boundary, 0.0), Error);
}

TEST(R2vos, Sums) {
    const std::vector<ReferenceEval> clean = {{1, {{range(0, 10), range(0, 10)}}, {first_n(0)}}};
    EXPECT_EQ(r2vos_r(clean), 1.0);
    const std::vector<ReferenceEval> equal = {{1, {{range(0, 10), range(0, 10)}}, {first_n(4), first_n(6)}}};
    EXPECT_EQ(r2vos_r(equal), 0.0);
    const std::vector<ReferenceEval> half = {{1, {{range(0, 10), range(0, 10)}}, {first_n(5)}}};
    EXPECT_EQ(r2vos_r(half), 0.5);
    const std::vector<ReferenceEval> none = {{1, {{first_n(0), range(0, 10)}}, {first_n(5)}}};
    EXPECT_THROW(r2vos_r(none), Error);
}

TEST(Report, PerfectAndAllEmptyExtremes) {
    const BinaryMask gt = range(2, 12);
    const std::vector<ReferenceEval> perfect = {{1, {{gt, gt}}, {first_n(0), first_n(0)}}, {2, {{gt, gt}}, {first_n(0)}}};
    const auto p = aggregate_report(perfect);
    EXPECT_EQ(p.r_iou, 1.0);
    EXPECT_EQ(p.m_rr, 1.0);
    EXPECT_EQ(p.m_iou, 1.0);
    EXPECT_EQ(p.o_iou, 1.0);
    for (const auto& [t, v] : p.precision_at) EXPECT_EQ(v, 1.0) << t;
    ASSERT_TRUE(p.r2vos_r.has_value());
    EXPECT_EQ(*p.r2vos_r, 1.0);

    const std::vector<ReferenceEval> empty = {{1, {{first_n(0), gt}}, {first_n(0)}}};
    const auto e = aggregate_report(empty);
    EXPECT_EQ(e.r_iou, 0.0);
    EXPECT_EQ(e.m_rr, 1.0);
    EXPECT_FALSE(e.r2vos_r.has_value());
}

TEST(Report, OrderIndependentAndRejectsBadInput) {
    std::mt19937_64 gen(5);
    std::vector<ReferenceEval> refs;
    for (long id = 0; id < 12; ++id) {
        ReferenceEval r{id * 7 % 12, {}, {}};
        for (int k = 0; k < 2; ++k)
            r.positives.push_back({oracle::to_mask(oracle::random_pixels(6, 6, 0.5, gen), 6, 6),
                                   oracle::to_mask(oracle::random_pixels(6, 6, 0.5, gen), 6, 6)});
        r.negatives.push_back(oracle::to_mask(oracle::random_pixels(6, 6, 0.1, gen), 6, 6));
        refs.push_back(std::move(r));
    }
    auto shuffled = refs;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_EQ(report_json(aggregate_report(refs)), report_json(aggregate_report(shuffled)));

    auto dup = refs;
    dup[1].ref_id = dup[0].ref_id;
    EXPECT_THROW(aggregate_report(dup), Error);
    EXPECT_THROW(aggregate_report(std::vector<ReferenceEval>{}), Error);
    auto bad = refs;
    bad[0].negatives.push_back(BinaryMask(3, 3));
    EXPECT_THROW(aggregate_report(bad), Error);
}

TEST(Report, JsonHasSortedKeysAndSixDecimals) {
    const std::vector<ReferenceEval> refs = {{1, {six_over_ten()}, {first_n(5)}}};
    const std::string j = report_json(aggregate_report(refs));
    EXPECT_NE(j.find("\"r_iou\": 0.400000"), std::string::npos) << j;
    EXPECT_LT(j.find("\"m_iou\""), j.find("\"r_iou\""));
    const auto parsed = nlohmann::json::parse(j);
    EXPECT_EQ(parsed.at("precision_at").size(), 3u);
    EXPECT_EQ(parsed.at("reference_count"), 1);
}
