#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "rris/gradcheck.hpp"
#include "rris/refseg.hpp"

using namespace rris;
using namespace rris::refseg;

namespace quad {

// f(x) = sum_i c_i x_i^2 + x_0 x_1, gradient known in closed form
struct Params {
    Tensor x;
};

template <class P, class Fn>
void for_each_param(P& p, Fn&& fn)
    requires std::is_same_v<std::remove_const_t<P>, Params>
{
    fn("x", p.x);
}

inline double f(const Params& p) {
    double s = p.x[0] * p.x[1];
    for (std::size_t i = 0; i < p.x.size(); ++i) s += double(i + 1) * p.x[i] * p.x[i];
    return s;
}

inline Params grad(const Params& p) {
    Params g{Tensor(p.x.shape())};
    for (std::size_t i = 0; i < p.x.size(); ++i) g.x[i] = 2.0 * double(i + 1) * p.x[i];
    g.x[0] += p.x[1];
    g.x[1] += p.x[0];
    return g;
}

}  // namespace quad

TEST(GradCheck, RelativeErrorDefinition) {
    EXPECT_NEAR(relative_error(1.0, 1.1, 1e-5), 0.1 / 1.1, 1e-15);
    EXPECT_DOUBLE_EQ(relative_error(-2.0, 2.0, 1e-5), 2.0);
    EXPECT_DOUBLE_EQ(relative_error(1e-9, 0.0, 1e-5), 1e-4);
    EXPECT_EQ(relative_error(0.0, 0.0, 1e-5), 0.0);
}

TEST(GradCheck, QuadraticPassesAtRoundoff) {
    Rng rng(1);
    const quad::Params p{random_normal({2, 5}, rng, 1.0)};
    GradCheckOptions opts;
    opts.sample_size = 100;  // more than there are parameters
    const auto r = grad_check(p, quad::f, quad::grad, opts);
    EXPECT_EQ(r.entries.size(), 10u);
    EXPECT_EQ(r.parameter_count, 10u);
    EXPECT_TRUE(r.passed);
    EXPECT_LT(r.max_relative_error, 1e-8);
}

TEST(GradCheck, CatchesWrongGradient) {
    Rng rng(2);
    const quad::Params p{random_normal({1, 6}, rng, 1.0)};
    const auto r = grad_check(p, quad::f, [](const quad::Params& q) {
        auto g = quad::grad(q);
        g.x[3] *= 1.01;
        return g;
    });
    EXPECT_FALSE(r.passed);
    EXPECT_NEAR(r.max_relative_error, 0.01 / 1.01, 1e-6);
}

TEST(GradCheck, NonFiniteValuesThrow) {
    const quad::Params p{Tensor({1, 2}, std::vector<double>{1.0, 2.0})};
    auto code = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::io_error;
    };
    EXPECT_EQ(code([&] {
                  grad_check(p, quad::f, [](const quad::Params& q) {
                      auto g = quad::grad(q);
                      g.x[0] = std::numeric_limits<double>::quiet_NaN();
                      return g;
                  });
              }),
              ErrorCode::nonfinite_gradient);
    EXPECT_EQ(code([&] {
                  grad_check(p, [](const quad::Params&) { return std::numeric_limits<double>::infinity(); }, quad::grad);
              }),
              ErrorCode::nonfinite_gradient);
}

TEST(GradCheck, SamplesAreDistinctAndSeeded) {
    Rng rng(3);
    const quad::Params p{random_normal({10, 10}, rng, 1.0)};
    GradCheckOptions opts;
    opts.sample_size = 40;
    const auto a = grad_check(p, quad::f, quad::grad, opts);
    const auto b = grad_check(p, quad::f, quad::grad, opts);
    opts.seed = 9;
    const auto c = grad_check(p, quad::f, quad::grad, opts);
    ASSERT_EQ(a.entries.size(), 40u);
    std::vector<std::size_t> ia, ic;
    for (std::size_t i = 0; i < 40; ++i) {
        EXPECT_EQ(a.entries[i].index, b.entries[i].index);
        ia.push_back(a.entries[i].index);
        ic.push_back(c.entries[i].index);
        if (i) {
            EXPECT_LT(a.entries[i - 1].index, a.entries[i].index);
        }
    }
    EXPECT_NE(ia, ic);
}

namespace {

struct ModelCase {
    ModelConfig cfg;
    ToyModelParams<Tensor> params;
    std::vector<Sample> samples;
};

ModelCase model_case(double scale, HeadQuery mode, std::uint64_t seed) {
    ModelCase m;
    m.cfg.init_scale = scale;
    m.cfg.head_query = mode;
    m.cfg.seed = seed;
    m.params = init_params(m.cfg);
    m.samples = synthetic_batch(m.cfg, 1, 32, seed);
    return m;
}

GradCheckReport check_model(const ModelCase& m, std::size_t n, bool corrupt = false) {
    GradCheckOptions opts;
    opts.sample_size = n;
    opts.seed = m.cfg.seed;
    return grad_check(
        m.params, [&](const ToyModelParams<Tensor>& p) { return batch_loss(m.cfg, p, m.samples); },
        [&](const ToyModelParams<Tensor>& p) {
            auto g = loss_and_gradient(m.cfg, p, m.samples).second;
            if (corrupt)
                for_each_param(g, [](const std::string&, Tensor& t) {
                    for (auto& v : t.data()) v = v * 1.01 + 1e-6;
                });
            return g;
        },
        opts);
}

}  // namespace

TEST(GradCheck, FullModelGradientMatches) {
    for (auto mode : {HeadQuery::vision, HeadQuery::tokens})
        for (double scale : {0.02, 0.1}) {
            const auto m = model_case(scale, mode, 4);
            const auto r = check_model(m, 150);
            EXPECT_TRUE(r.passed) << to_string(mode) << " scale " << scale << " max " << r.max_relative_error;
            // probes with real signal must agree without any floor help
            for (const auto& e : r.entries)
                if (std::abs(e.numeric) >= 1e-5) {
                    EXPECT_LT(relative_error(e.analytic, e.numeric, 0.0), 1e-4) << e.name;
                }
        }
}

TEST(GradCheck, FullModelCorruptedGradientFails) {
    const auto m = model_case(0.1, HeadQuery::vision, 5);
    const auto r = check_model(m, 100, true);
    EXPECT_FALSE(r.passed);
    EXPECT_GT(r.max_relative_error, 1e-3);
}
