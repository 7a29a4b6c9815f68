#include <gtest/gtest.h>

#include <cmath>

#include "bfdecide/models.hpp"

using namespace bfd;

TEST(Models, NormalKnownVarianceSufficientStatisticForm) {
    const SamplingModel m = NormalKnownVariance(1.0, 10, 0.5);
    EXPECT_EQ(log_likelihood(m, 0.5), 0.0);
    // -10 * 0.5^2 / 2 worked by hand
    EXPECT_DOUBLE_EQ(log_likelihood(m, 0.0), -1.25);
}

TEST(Models, BinomialMleDominates) {
    const SamplingModel m = Binomial(10, 7);
    EXPECT_GT(log_likelihood(m, 0.7), log_likelihood(m, 0.5));
    EXPECT_THROW(log_likelihood(m, 1.2), DomainError);
    // Boundary values with zero counts on that side stay finite.
    EXPECT_TRUE(std::isfinite(log_likelihood(Binomial(5, 0), 0.0)));
    EXPECT_EQ(log_likelihood(m, 0.0), -kInf);
}

TEST(Models, InvalidDataRejected) {
    EXPECT_THROW(NormalKnownVariance(0.0, 10, 0.0), DomainError);
    EXPECT_THROW(NormalKnownVariance(1.0, 0, 0.0), DomainError);
    EXPECT_THROW(Binomial(10, 11), DomainError);
    EXPECT_THROW(GenericLogLik({0, 0}, {0, 0}), DomainError);
}

TEST(Models, GenericInterpolatesInLogSpace) {
    const SamplingModel m = GenericLogLik({0.0, 1.0, 2.0}, {-2.0, 0.0, -kInf});
    EXPECT_DOUBLE_EQ(log_likelihood(m, 0.5), -1.0);
    EXPECT_DOUBLE_EQ(log_likelihood(m, 1.0), 0.0);
    EXPECT_EQ(log_likelihood(m, 1.5), -kInf);
    EXPECT_THROW(log_likelihood(m, 3.0), DomainError);  // default space is the grid hull
    const SamplingModel wide = GenericLogLik({0.0, 1.0}, {0.0, 0.0}, ParameterSpace(-5, 5));
    EXPECT_EQ(log_likelihood(wide, 3.0), -kInf);
}

TEST(Models, NormalConcaveWithMaximumAtMean) {
    const SamplingModel m = NormalKnownVariance(2.0, 7, -0.3);
    double prev_slope = kInf;
    for (double t = -3.0; t < 3.0; t += 0.1) {
        const double slope = log_likelihood(m, t + 0.1) - log_likelihood(m, t);
        EXPECT_LT(slope, prev_slope);
        prev_slope = slope;
        EXPECT_LE(log_likelihood(m, t), log_likelihood(m, -0.3));
    }
}
