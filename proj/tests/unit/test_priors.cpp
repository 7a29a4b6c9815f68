#include <gtest/gtest.h>

#include <random>

#include "bfdecide/priors.hpp"
#include "oracles.hpp"

using namespace bfd;

namespace {
HypothesisPair unit_pair() { return HypothesisPair::interval_vs_complement(-1.0, 1.0); }

std::vector<double> test_grid(double lo, double hi, int n) {
    std::vector<double> g;
    for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
    return g;
}
} // namespace

TEST(CheckProper, StandardNormalOnRealLine) {
    const auto r = check_proper(Prior::normal(0, 1), ParameterSpace::real_line());
    EXPECT_TRUE(r.proper());
    EXPECT_NEAR(r.mass, 1.0, 1e-12);
    EXPECT_FALSE(r.renormalized);
}

TEST(CheckProper, FlatOnRealLineIsImproper) {
    const auto r = check_proper(Prior::flat(0.2), ParameterSpace::real_line());
    EXPECT_FALSE(r.proper());
    EXPECT_TRUE(std::isinf(r.mass));
}

TEST(CheckProper, FlatOnBoundedSpaceIsRenormalized) {
    const auto r = check_proper(Prior::flat(0.2), ParameterSpace(-1, 1));
    EXPECT_TRUE(r.proper());
    EXPECT_DOUBLE_EQ(r.mass, 0.4);
    EXPECT_TRUE(r.renormalized);
    ASSERT_TRUE(r.normalized);
    EXPECT_DOUBLE_EQ(prior_density(*r.normalized, ParameterSpace(-1, 1), 0.3), 0.5);
}

TEST(CheckProper, DeclaredProperWithWrongMassIsAnError) {
    EXPECT_THROW(check_proper(Prior::normal(0, 1), ParameterSpace::unit_interval()), PriorMassError);
    // Truncation makes it a proper prior on the space.
    const auto t = check_proper(Prior::proper(NormalDensity(0, 1), IntervalUnion{Interval::closed(0, 1)}),
                                ParameterSpace::unit_interval());
    EXPECT_TRUE(t.proper());
    EXPECT_TRUE(t.renormalized);
}

TEST(CheckProper, SmallMassDeviationIsRenormalizedSilently) {
    // Normal with ~1e-4 mass outside [-3.9, 3.9]
    const auto r = check_proper(Prior::normal(0, 1), ParameterSpace(-3.9, 3.9));
    EXPECT_TRUE(r.proper());
    EXPECT_TRUE(r.renormalized);
}

TEST(CheckProper, LogDensityTails) {
    const LogDensityTable heavy({-1, 1}, {0, 0}, 0.5, 0.5);
    EXPECT_FALSE(check_proper(Prior::log_density(heavy), ParameterSpace::real_line()).proper());

    const LogDensityTable light({-1, 1}, {0, 0}, 2.0, 3.0);
    const auto r = check_proper(Prior::log_density(light), ParameterSpace::real_line());
    EXPECT_TRUE(r.proper());
    // 2 (flat part) + 1/(2-1) + 1/(3-1)
    EXPECT_NEAR(r.mass, 3.5, 1e-12);

    const LogDensityTable undeclared({-1, 1}, {0, 0});
    EXPECT_THROW(check_proper(Prior::log_density(undeclared), ParameterSpace::real_line()), IndeterminateProperness);
    EXPECT_TRUE(check_proper(Prior::log_density(undeclared), ParameterSpace(-1, 1)).proper());
}

TEST(CheckProper, NormalAlwaysProperProperty) {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> m(-100, 100), s(0.01, 50);
    for (int i = 0; i < 100; ++i) EXPECT_TRUE(check_proper(Prior::normal(m(rng), s(rng)), {}).proper());
}

TEST(PriorHypothesisProbabilities, NormalPriorScenario) {
    const auto m = prior_hypothesis_probabilities(Prior::normal(0, 1), unit_pair());
    ASSERT_TRUE(m.defined());
    EXPECT_NEAR(*m.p0, oracle::kStdNormalMass1, 1e-12);
    EXPECT_NEAR(*m.p1, oracle::kStdNormalTail1, 1e-12);
    EXPECT_NEAR(*m.p0 + *m.p1, 1.0, 1e-9);
}

TEST(PriorHypothesisProbabilities, DecomposedReturnsStoredValue) {
    const auto w0 = WithinHypothesisPrior::from_density(UniformDensity(-1, 1), IntervalUnion{Interval::closed(-1, 1)});
    const auto w1 = WithinHypothesisPrior::from_density(NormalDensity(0, 4), unit_pair().theta1);
    const auto m = prior_hypothesis_probabilities(recompose(0.5, w0, w1), unit_pair());
    EXPECT_EQ(*m.p0, 0.5);
    EXPECT_EQ(*m.p1, 0.5);
}

TEST(PriorHypothesisProbabilities, ImproperIsNotDefined) {
    const auto m = prior_hypothesis_probabilities(Prior::flat(0.2), unit_pair());
    EXPECT_FALSE(m.p0);
    EXPECT_FALSE(m.p1);
}

TEST(Decompose, NormalPriorWithinHypothesisDensities) {
    const auto d = decompose(Prior::normal(0, 1), unit_pair());
    EXPECT_NEAR(d.p0, oracle::kStdNormalMass1, 1e-12);
    for (double t : {-1.0, -0.3, 0.0, 0.9, 1.0})
        EXPECT_NEAR(d.within0.pdf(t), oracle::normal_pdf(t, 0, 1) / oracle::kStdNormalMass1, 1e-12);
    EXPECT_EQ(d.within0.pdf(1.5), 0.0);
    EXPECT_NEAR(d.within1.pdf(1.5), oracle::normal_pdf(1.5, 0, 1) / oracle::kStdNormalTail1, 1e-12);
    EXPECT_EQ(d.within1.pdf(0.2), 0.0);
}

TEST(Decompose, UniformSplitsProportionally) {
    const auto d = decompose(Prior::uniform(-2, 2), unit_pair());
    EXPECT_DOUBLE_EQ(d.p0, 0.5);
    EXPECT_DOUBLE_EQ(d.within0.pdf(0.3), 0.5);
    EXPECT_DOUBLE_EQ(d.within0.pdf(-1.0), 0.5);
}

TEST(Decompose, ZeroMassHypothesisNamed) {
    try {
        decompose(Prior::uniform(2, 3), unit_pair());
        FAIL() << "expected DegenerateHypothesisMass";
    } catch (const DegenerateHypothesisMass& e) {
        EXPECT_EQ(e.hypothesis(), "H0");
    }
    EXPECT_THROW(decompose(Prior::normal(0, 1), HypothesisPair::point_vs_complement(0.0)), DegenerateHypothesisMass);
    EXPECT_THROW(decompose(Prior::flat(0.2), unit_pair()), ImproperPriorError);
}

TEST(Recompose, NormalPriorRoundTripOnGrid) {
    const auto pair = unit_pair();
    const auto d = decompose(Prior::normal(0, 1), pair);
    const Prior back = recompose(d.p0, d.within0, d.within1);
    const auto k = resolve(back, pair.space);
    for (double t : test_grid(-6, 6, 4096))
        EXPECT_NEAR(std::exp(k.log_density(t)), oracle::normal_pdf(t, 0, 1), 1e-8) << t;
    // decompose again reproduces p0 and both densities
    const auto again = decompose(back, pair);
    EXPECT_NEAR(again.p0, d.p0, 1e-8);
    for (double t : test_grid(-4, 4, 101)) {
        EXPECT_NEAR(again.within0.pdf(t), d.within0.pdf(t), 1e-8);
        EXPECT_NEAR(again.within1.pdf(t), d.within1.pdf(t), 1e-8);
    }
}

TEST(Recompose, DegenerateAndPiecewise) {
    const auto w0 = WithinHypothesisPrior::from_density(UniformDensity(-1, 1), IntervalUnion{Interval::closed(-1, 1)});
    const auto only = recompose(1.0, w0, std::nullopt);
    const auto k = resolve(only, ParameterSpace::real_line());
    EXPECT_DOUBLE_EQ(std::exp(k.log_density(0.2)), 0.5);

    const auto w1 = WithinHypothesisPrior::from_density(UniformDensity(1, 3), IntervalUnion{Interval::make(1, 3, false, true)});
    const auto mix = resolve(recompose(0.5, w0, w1), ParameterSpace::real_line());
    EXPECT_DOUBLE_EQ(std::exp(mix.log_density(0.99)), 0.25);
    EXPECT_DOUBLE_EQ(std::exp(mix.log_density(1.0)), 0.25);
    EXPECT_DOUBLE_EQ(std::exp(mix.log_density(1.01)), 0.25);
    EXPECT_DOUBLE_EQ(std::exp(mix.log_density(2.5)), 0.25);

    const auto w2 = WithinHypothesisPrior::from_density(UniformDensity(3, 4), IntervalUnion{Interval::closed(3, 4)});
    const auto mix2 = resolve(recompose(0.25, w0, w2), ParameterSpace::real_line());
    EXPECT_DOUBLE_EQ(std::exp(mix2.log_density(0.0)), 0.125);
    EXPECT_DOUBLE_EQ(std::exp(mix2.log_density(3.5)), 0.75);
}

TEST(Recompose, OverlappingSupportsRejected) {
    const auto w0 = WithinHypothesisPrior::from_density(UniformDensity(-1, 1), IntervalUnion{Interval::closed(-1, 1)});
    const auto w1 = WithinHypothesisPrior::from_density(UniformDensity(0, 2), IntervalUnion{Interval::closed(0, 2)});
    EXPECT_THROW(recompose(0.5, w0, w1), InvalidDecomposition);
}

// Decomposition identity and p0 + p1 = 1 for random proper priors and pairs.
TEST(DecompositionProperty, IdentityHoldsPointwise) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> mu(-2, 2), var(0.1, 4), cut(-3, 3);
    for (int trial = 0; trial < 50; ++trial) {
        double a = cut(rng), b = cut(rng);
        if (a > b) std::swap(a, b);
        const auto pair = HypothesisPair::interval_vs_complement(a, b);
        const Prior prior = Prior::normal(mu(rng), var(rng));
        HypothesisMasses m = prior_hypothesis_probabilities(prior, pair);
        ASSERT_TRUE(m.defined());
        EXPECT_NEAR(*m.p0 + *m.p1, 1.0, 1e-9);
        if (*m.p0 <= 0.0 || *m.p1 <= 0.0) continue;
        const auto d = decompose(prior, pair);
        const auto k = resolve(prior, pair.space);
        for (double t : test_grid(-8, 8, 257)) {
            const double lhs = std::exp(k.log_density(t));
            const double rhs = d.p0 * d.within0.pdf(t) + d.p1 * d.within1.pdf(t);
            EXPECT_NEAR(lhs, rhs, 1e-8);
        }
    }
}
