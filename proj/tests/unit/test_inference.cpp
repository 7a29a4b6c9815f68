#include <gtest/gtest.h>

#include <random>

#include "bfdecide/inference.hpp"
#include "oracles.hpp"

using namespace bfd;

namespace {
HypothesisPair unit_pair() { return HypothesisPair::interval_vs_complement(-1.0, 1.0); }
const SamplingModel kFlatPriorModel = NormalKnownVariance(1.0, 10, 0.5);
} // namespace

TEST(PosteriorUpdate, FlatPriorGivesNormalMeanVariance) {
    const auto post = posterior_update(kFlatPriorModel, Prior::flat(0.2));
    ASSERT_TRUE(post.closed_form());
    const auto& nd = std::get<NormalDensity>(std::get<ClosedForm>(post.representation()).density);
    EXPECT_DOUBLE_EQ(nd.mu, 0.5);
    EXPECT_DOUBLE_EQ(nd.sigma2, 0.1);
    EXPECT_FALSE(post.evidence_log());
    EXPECT_TRUE(post.improper_prior());
}

TEST(PosteriorUpdate, FlatPriorAgreesWithQuadratureRoute) {
    PosteriorOptions o;
    o.force_grid = true;
    const auto grid = posterior_update(kFlatPriorModel, Prior::flat(0.2), o);
    for (double t : {-0.5, 0.0, 0.5, 1.3})
        EXPECT_NEAR(grid.pdf(t), oracle::normal_pdf(t, 0.5, 0.1), 1e-10);
    EXPECT_NEAR(grid.mean(), 0.5, 1e-10);
    EXPECT_NEAR(grid.sd(), std::sqrt(0.1), 1e-9);
}

TEST(PosteriorUpdate, NormalNormalConjugate) {
    const auto post = posterior_update(kFlatPriorModel, Prior::normal(0, 1));
    const auto& nd = std::get<NormalDensity>(std::get<ClosedForm>(post.representation()).density);
    EXPECT_NEAR(nd.mu, 10.0 * 0.5 / 11.0, 1e-15);
    EXPECT_NEAR(nd.sigma2, 1.0 / 11.0, 1e-15);
    ASSERT_TRUE(post.evidence_log());
    // evidence oracle: Simpson integral of exp(-5 (t-0.5)^2) phi(t)
    const double ev = oracle::simpson([](double t) { return std::exp(-5.0 * (t - 0.5) * (t - 0.5)) * oracle::normal_pdf(t, 0, 1); }, -12, 12, 200000);
    EXPECT_NEAR(*post.evidence_log(), std::log(ev), 1e-10);
}

TEST(PosteriorUpdate, BetaBinomialConjugate) {
    const auto post = posterior_update(Binomial(10, 7), Prior::beta(1, 1));
    const auto& bd = std::get<BetaDensity>(std::get<ClosedForm>(post.representation()).density);
    EXPECT_EQ(bd.alpha, 8.0);
    EXPECT_EQ(bd.beta, 4.0);
    // evidence = B(8,4)/B(1,1) = 7! 3! / 11!
    EXPECT_NEAR(*post.evidence_log(), std::log(5040.0 * 6.0 / 39916800.0), 1e-12);
}

TEST(PosteriorHypothesisProbabilities, FlatPriorScenario) {
    const auto s = analyze(kFlatPriorModel, Prior::flat(0.2), unit_pair());
    EXPECT_NEAR(s.p0_post, oracle::kFlatPriorPosteriorH0, 1e-12);
    EXPECT_NEAR(s.p1_post, oracle::kFlatPriorPosteriorH1, 1e-12);
}

TEST(PosteriorHypothesisProbabilities, FullSupportUniformPosterior) {
    const SamplingModel flat_lik = GenericLogLik({-1.0, 1.0}, {0.0, 0.0});
    HypothesisPair p;
    p.space = ParameterSpace(-1, 1);
    p.theta0 = IntervalUnion{Interval::closed(-1, 1)};
    p.theta1 = IntervalUnion{};
    const auto post = posterior_update(flat_lik, Prior::flat(1.0));
    EXPECT_NEAR(post.mass(p.theta0), 1.0, 1e-12);
}

TEST(PosteriorHypothesisProbabilities, BetaPosteriorIncompleteBeta) {
    HypothesisPair p;
    p.space = ParameterSpace::unit_interval();
    p.theta0 = IntervalUnion{Interval::make(0, 0.5, false, true)};
    p.theta1 = IntervalUnion{Interval::open(0.5, 1)};
    const auto s = analyze(Binomial(10, 7), Prior::beta(1, 1), p);
    EXPECT_NEAR(s.p0_post, oracle::ibeta_integer(8, 4, 0.5), 1e-14);
    EXPECT_NEAR(s.p0_post, 0.11328125, 1e-14);
}

TEST(PosteriorUpdate, GridRepresentationNormalized) {
    PosteriorOptions o;
    o.force_grid = true;
    o.breakpoints = {-1.0, 1.0};
    const auto post = posterior_update(kFlatPriorModel, Prior::normal(0, 1), o);
    const auto& g = std::get<GridRepresentation>(post.representation());
    EXPECT_GE(g.nodes.size(), kDefaultGridNodes);
    for (double v : g.density) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(grid_total_mass(g), 1.0, 1e-6);
}

TEST(PosteriorUpdate, GridWithPriorJump) {
    // Uniform prior on [0, 2] truncates the likelihood; grid must capture the jump.
    const auto post = posterior_update(NormalKnownVariance(1.0, 4, 0.1), Prior::uniform(0, 2));
    const auto& g = std::get<GridRepresentation>(post.representation());
    EXPECT_NEAR(grid_total_mass(g), 1.0, 1e-6);
    EXPECT_EQ(post.pdf(-0.01), 0.0);
    EXPECT_GT(post.pdf(0.01), 0.0);
}

TEST(PosteriorUpdate, DecomposedPriorWithPointNull) {
    const auto pair = HypothesisPair::point_vs_complement(0.0);
    const auto w0 = WithinHypothesisPrior::point_mass(0.0);
    const auto w1 = WithinHypothesisPrior::from_density(NormalDensity(0, 1), pair.theta1);
    const auto s = analyze(kFlatPriorModel, recompose(0.5, w0, w1), pair);
    // p0 f(x|0) / (p0 f(x|0) + p1 m1) with m1 = int exp(-5 (t-.5)^2) phi(t) dt
    const double f0 = std::exp(-1.25);
    const double m1 = oracle::simpson([](double t) { return std::exp(-5.0 * (t - 0.5) * (t - 0.5)) * oracle::normal_pdf(t, 0, 1); }, -12, 12, 200000);
    EXPECT_NEAR(s.p0_post, f0 / (f0 + m1), 1e-9);
    EXPECT_NEAR(s.p0_post + s.p1_post, 1.0, 1e-9);
}

TEST(PosteriorUpdate, ImproperLogDensityPrior) {
    // Heavy-tailed improper prior still gives a proper posterior under the normal model.
    const LogDensityTable t({-1, 1}, {0, 0}, 0.5, 0.5);
    const auto s = analyze(kFlatPriorModel, Prior::log_density(t), unit_pair());
    EXPECT_FALSE(s.posterior.evidence_log());
    EXPECT_NEAR(s.p0_post + s.p1_post, 1.0, 1e-9);
    EXPECT_GT(s.p0_post, 0.9);
}

TEST(PosteriorUpdate, ZeroLikelihoodEverywhereUnderPrior) {
    const SamplingModel m = GenericLogLik({-1.0, 0.0, 1.0, 2.0}, {-kInf, -kInf, 0.0, 0.0}, ParameterSpace(-5, 5));
    EXPECT_THROW(posterior_update(m, Prior::proper(UniformDensity(-1, 0), IntervalUnion{Interval::closed(-1, 0)})),
                 DegenerateEvidence);
}

// Closed-form and quadrature routes agree for every conjugate pairing.
TEST(InferenceProperty, ClosedFormMatchesQuadrature) {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> u(-2, 2), v(0.2, 3);
    std::uniform_int_distribution<long> nn(1, 60);
    PosteriorOptions grid;
    grid.force_grid = true;
    for (int i = 0; i < 30; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        const auto pair = HypothesisPair::interval_vs_complement(a, b);
        const SamplingModel m = NormalKnownVariance(v(rng), nn(rng), u(rng));
        for (const Prior& pr : {Prior::normal(u(rng), v(rng)), Prior::flat(1.0)}) {
            const auto cf = analyze(m, pr, pair);
            const auto gq = analyze(m, pr, pair, grid);
            ASSERT_TRUE(cf.posterior.closed_form());
            ASSERT_FALSE(gq.posterior.closed_form());
            EXPECT_NEAR(cf.p0_post, gq.p0_post, 1e-6);
            EXPECT_NEAR(cf.p0_post + cf.p1_post, 1.0, 1e-9);
            EXPECT_NEAR(gq.p0_post + gq.p1_post, 1.0, 1e-9);
            if (cf.posterior.evidence_log()) EXPECT_NEAR(*cf.posterior.evidence_log(), *gq.posterior.evidence_log(), 1e-8);
        }
    }
}

TEST(InferenceProperty, BetaBinomialClosedFormMatchesQuadrature) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> p(0.05, 0.95), ab(1, 6);
    std::uniform_int_distribution<long> nn(1, 80);
    PosteriorOptions grid;
    grid.force_grid = true;
    for (int i = 0; i < 30; ++i) {
        const long n = nn(rng);
        const long s = std::uniform_int_distribution<long>(0, n)(rng);
        const double c = p(rng);
        HypothesisPair bp;
        bp.space = ParameterSpace::unit_interval();
        bp.theta0 = IntervalUnion{Interval::closed(0, c)};
        bp.theta1 = IntervalUnion{Interval::make(c, 1, false, true)};
        const Prior pr = Prior::beta(ab(rng), ab(rng));
        const auto cf = analyze(Binomial(n, s), pr, bp);
        const auto gq = analyze(Binomial(n, s), pr, bp, grid);
        EXPECT_NEAR(cf.p0_post, gq.p0_post, 1e-6);
        EXPECT_NEAR(*cf.posterior.evidence_log(), *gq.posterior.evidence_log(), 1e-8);
    }
}

TEST(InferenceProperty, MoreDataConcentrates) {
    const auto pair = unit_pair();
    double prev = 0.0;
    for (long n : {10L, 100L, 1000L}) {
        const auto s = analyze(NormalKnownVariance(1.0, n, 0.2), Prior::normal(0, 1), pair);
        EXPECT_GE(s.p0_post, prev);
        prev = s.p0_post;
    }
}
