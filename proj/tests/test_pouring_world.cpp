#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "pac/error.hpp"
#include "pac/pouring_world.hpp"

using namespace pac;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected pac::Error";
    return ErrorCode::Usage;
}

// Closed-form spillage probability with the default coefficients, written out by hand.
double reference_p(double fu, double rd, double rv) {
    const double over = oracle::sigmoid((rv - 1.0) / 0.04);
    const double rim = oracle::sigmoid((fu - (rd - 0.25)) / 0.04);
    return 1.0 - (1.0 - over) * (1.0 - rim);
}

}  // namespace

TEST(PouringWorld, ParameterDrawsMatchTruncatedMeans) {
    const PouringWorld world;
    Rng rng(1);
    const int n = 100000;
    double rc = 0.0, fu = 0.0, rd = 0.0;
    double fu_min = 1.0, fu_max = 0.0;
    for (int i = 0; i < n; ++i) {
        const auto p = world.sample_parameters(rng);
        ASSERT_GE(p.rc, 0.5);
        ASSERT_LE(p.rc, 2.0);
        ASSERT_GE(p.rd, 0.5);
        ASSERT_LE(p.rd, 1.5);
        rc += p.rc;
        fu += p.fu;
        rd += p.rd;
        fu_min = std::min(fu_min, p.fu);
        fu_max = std::max(fu_max, p.fu);
    }
    EXPECT_NEAR(rc / n, oracle::truncated_normal_mean(1.0, 0.25, 0.5, 2.0), 0.01);
    EXPECT_NEAR(fu / n, oracle::truncated_normal_mean(0.7, 0.2, 0.3, 1.0), 0.01);
    EXPECT_NEAR(rd / n, oracle::truncated_normal_mean(1.0, 0.25, 0.5, 1.5), 0.01);
    EXPECT_GE(fu_min, 0.3);
    EXPECT_LE(fu_max, 1.0);
}

TEST(PouringWorld, ParameterDrawsAreSeeded) {
    const PouringWorld world;
    Rng a(5);
    Rng b(5);
    for (int i = 0; i < 100; ++i) {
        const auto x = world.sample_parameters(a);
        const auto y = world.sample_parameters(b);
        EXPECT_EQ(x.rc, y.rc);
        EXPECT_EQ(x.fu, y.fu);
        EXPECT_EQ(x.rd, y.rd);
    }
}

TEST(PouringWorld, RelativeVolumeArithmetic) {
    WorldConfig exact;
    exact.sigma_pack = 0.0;
    Rng rng(2);
    EXPECT_EQ(PouringWorld(exact).derive_rv(1.0, 1.0, rng), 1.0);
    EXPECT_NEAR(PouringWorld(exact).derive_rv(0.70, 0.51, rng), 0.7285714285714286, 1e-15);
    EXPECT_NEAR(PouringWorld(exact).derive_rv(0.69, 0.91, rng), 1.3188405797101449, 1e-15);

    const PouringWorld world;
    const int n = 10000;
    for (const auto& [rc, fu] : std::vector<std::pair<double, double>>{{0.8, 0.8}, {0.70, 0.51}, {0.69, 0.91}}) {
        double sum = 0.0;
        for (int i = 0; i < n; ++i) sum += world.derive_rv(rc, fu, rng);
        const double ratio = fu / rc;
        EXPECT_NEAR(sum / n, ratio, 3.0 * 0.03 * std::max(ratio, 1.0) / std::sqrt(static_cast<double>(n)));
    }
}

TEST(PouringWorld, ClosedFormSpillageProbability) {
    const PouringWorld world;
    for (double fu : {0.3, 0.5, 0.7, 1.0}) {
        for (double rd : {0.5, 0.8, 1.0, 1.5}) {
            for (double rv : {0.2, 0.9, 1.0, 1.3}) {
                EXPECT_NEAR(world.spillage_probability(fu, rd, rv), reference_p(fu, rd, rv), 1e-14);
            }
        }
    }
    EXPECT_GT(world.spillage_probability(0.5, 1.2, 2.0), 0.999);
    EXPECT_LT(world.spillage_probability(0.3, 1.5, 0.3), 0.05);
}

TEST(PouringWorld, RimCrossingInCalibratedBand) {
    const PouringWorld world;
    double crossing = -1.0;
    double prev = world.spillage_probability(0.7, 0.5, 0.7);
    for (double rd = 0.5; rd <= 1.5; rd += 0.001) {
        const double p = world.spillage_probability(0.7, rd, 0.7);
        if (prev >= 0.5 && p < 0.5) crossing = rd;
        prev = p;
    }
    EXPECT_GE(crossing, 0.8);
    EXPECT_LE(crossing, 1.1);
    EXPECT_GT(world.spillage_probability(0.7, 0.7, 0.7), 0.9);
    EXPECT_LT(world.spillage_probability(0.7, 1.2, 0.7), 0.01);
}

TEST(PouringWorld, MonotoneInEachInput) {
    const PouringWorld world;
    const double step = 0.05;
    for (double fu = 0.3; fu <= 1.0; fu += step) {
        for (double rd = 0.5; rd <= 1.5; rd += step) {
            for (double rv = 0.1; rv <= 2.5; rv += step) {
                const double p = world.spillage_probability(fu, rd, rv);
                EXPECT_GE(world.spillage_probability(fu, rd, rv + step), p);
                EXPECT_GE(world.spillage_probability(fu + step, rd, rv), p);
                EXPECT_LE(world.spillage_probability(fu, rd + step, rv), p);
            }
        }
    }
}

TEST(PouringWorld, DatasetShapeAndSpillageRate) {
    const PouringWorld world;
    const auto trials = world.generate_dataset(6000, 1);
    ASSERT_EQ(trials.size(), 6000u);
    std::size_t spills = 0;
    for (const Trial& t : trials) {
        ASSERT_GE(t.rc, 0.5);
        ASSERT_LE(t.rc, 2.0);
        ASSERT_GE(t.fu, 0.3);
        ASSERT_LE(t.fu, 1.0);
        ASSERT_GE(t.rd, 0.5);
        ASSERT_LE(t.rd, 1.5);
        ASSERT_GT(t.rv, 0.0);
        spills += t.spillage ? 1 : 0;
    }
    const double rate = static_cast<double>(spills) / 6000.0;
    EXPECT_GE(rate, 0.3);
    EXPECT_LE(rate, 0.5);
    // Modelled RV support covers every generated trial.
    for (const Trial& t : trials) {
        EXPECT_GE(t.rv, kRelativeVolumeSupport.min);
        EXPECT_LE(t.rv, kRelativeVolumeSupport.max);
    }
}

TEST(PouringWorld, DatasetDeterminism) {
    const PouringWorld world;
    const auto one = world.generate_dataset(1, 3);
    ASSERT_EQ(one.size(), 1u);
    const auto a = world.generate_dataset(200, 3);
    const auto b = world.generate_dataset(200, 3);
    const auto c = world.generate_dataset(200, 4);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].rc, b[i].rc);
        EXPECT_EQ(a[i].rv, b[i].rv);
        EXPECT_EQ(a[i].spillage, b[i].spillage);
        differs = differs || a[i].rc != c[i].rc;
    }
    EXPECT_TRUE(differs);
    // Trial i depends only on its own stream.
    EXPECT_EQ(world.generate_dataset(50, 3)[17].rd, a[17].rd);
}

TEST(PouringWorld, ReplayWithoutOverridesMatchesOwnProbability) {
    const PouringWorld world;
    const Trial t{1.0, 0.7, 0.95, 0.7, true};
    // Expected success integrates the packing noise on rv.
    const double expected = oracle::trapezoid(
        [&](double e) { return oracle::normal_pdf(e, 0.0, 0.03) * (1.0 - reference_p(t.fu, t.rd, 0.7 * (1.0 + e))); },
        -0.3, 0.3, 4001);
    const std::size_t n = 20000;
    const double rate = static_cast<double>(world.replay(t, {}, n, 8)) / static_cast<double>(n);
    EXPECT_NEAR(rate, expected, 4.0 * std::sqrt(expected * (1.0 - expected) / static_cast<double>(n)));
}

TEST(PouringWorld, ReplayWithWiderRimSucceeds) {
    const PouringWorld world;
    const Trial t{0.70, 0.51, 0.70, 0.729, true};
    Overrides o;
    EXPECT_LE(world.replay(t, o, 100, 1), 40u);
    o.rd = 0.89;
    EXPECT_GE(world.replay(t, o, 100, 1), 85u);
    EXPECT_EQ(world.replay(t, o, 0, 1), 0u);
    EXPECT_EQ(world.replay(t, o, 100, 1), world.replay(t, o, 100, 1));
}

TEST(PouringWorld, ReplayOverridesRederiveVolume) {
    const PouringWorld world;
    const Trial overflow{0.55, 1.0, 1.4, 1.82, true};
    EXPECT_LE(world.replay(overflow, {}, 100, 2), 2u);
    Overrides o;
    o.fu = 0.45;  // rv ~ 0.82 and the rim still holds
    EXPECT_GE(world.replay(overflow, o, 100, 2), 90u);
    Overrides c;
    c.rc = 1.5;  // rv ~ 0.67
    EXPECT_GE(world.replay(overflow, c, 100, 2), 90u);
}

TEST(PouringWorld, ConfigValidation) {
    WorldConfig c;
    c.rim_width = 0.0;
    EXPECT_EQ(code_of([&] { c.validate(); }), ErrorCode::InvalidConfig);
    c = WorldConfig{};
    c.overflow_width = -1.0;
    EXPECT_EQ(code_of([&] { PouringWorld w(c); }), ErrorCode::InvalidConfig);
    c = WorldConfig{};
    c.sigma_pack = -0.1;
    EXPECT_THROW(c.validate(), Error);
}

TEST(PouringWorld, DatasetConversion) {
    const auto trials = PouringWorld().generate_dataset(30, 6);
    const Dataset file = to_dataset(trials);
    EXPECT_EQ(file.names(), (std::vector<std::string>{"rc", "fu", "rd", "rv", "spillage"}));
    const auto back = trials_from_dataset(file);
    ASSERT_EQ(back.size(), trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        EXPECT_EQ(back[i].rv, trials[i].rv);
        EXPECT_EQ(back[i].spillage, trials[i].spillage);
    }
    EXPECT_EQ(node_frame(trials).names(), (std::vector<std::string>{"RC", "FU", "RD", "RV", "S"}));

    Dataset missing({"rc", "fu", "rd", "rv"});
    EXPECT_EQ(code_of([&] { trials_from_dataset(missing); }), ErrorCode::Schema);
    Dataset bad({"rc", "fu", "rd", "rv", "spillage"});
    const std::vector<double> out_of_support{3.0, 0.5, 1.0, 0.2, 0.0};
    bad.add_row(out_of_support);
    EXPECT_EQ(code_of([&] { trials_from_dataset(bad); }), ErrorCode::Schema);
    Dataset half({"rc", "fu", "rd", "rv", "spillage"});
    const std::vector<double> non_binary{1.0, 0.5, 1.0, 0.5, 0.5};
    half.add_row(non_binary);
    EXPECT_EQ(code_of([&] { trials_from_dataset(half); }), ErrorCode::Schema);

    const InterventionSet ctx = trial_context(trials[0]);
    EXPECT_EQ(ctx.size(), 5u);
    EXPECT_EQ(ctx.at(kRV), trials[0].rv);
}
