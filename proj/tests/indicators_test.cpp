#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "gerber/indicators.hpp"

#include "testutil.hpp"

using gerber::IndicatorSet;
using gerber::ReturnMatrix;
using gerber::ThresholdVector;
using gerber::ValidationError;

namespace {

TEST(BuildThresholds, ScalesSigmasByFraction) {
    Eigen::VectorXd sigmas(1);
    sigmas << 2.0;
    const ThresholdVector th = gerber::build_thresholds(sigmas, 0.5);
    EXPECT_EQ(th.fraction, 0.5);
    EXPECT_EQ(th.levels(0), 1.0);

    sigmas << 1.8257418583505538;
    EXPECT_DOUBLE_EQ(gerber::build_thresholds(sigmas, 0.5).levels(0), 0.9128709291752769);
}

TEST(BuildThresholds, RejectsBadInputs) {
    Eigen::VectorXd sigmas(1);
    sigmas << 1.0;
    EXPECT_THROW(gerber::build_thresholds(sigmas, 0.0), ValidationError);
    EXPECT_THROW(gerber::build_thresholds(sigmas, -1.0), ValidationError);
    EXPECT_THROW(gerber::build_thresholds(sigmas, std::nan("")), ValidationError);
    sigmas << 0.0;
    EXPECT_THROW(gerber::build_thresholds(sigmas, 0.5), ValidationError);
    sigmas << -2.0;
    EXPECT_THROW(gerber::build_thresholds(sigmas, 0.5), ValidationError);
}

TEST(BuildIndicators, FixtureColumnPattern) {
    ReturnMatrix r = testutil::make_returns(Eigen::MatrixXd(4, 1));
    r.values << 1.5, -1.2, 1.1, 0.5;
    const IndicatorSet ind = gerber::build_indicators(r, testutil::unit_thresholds(1));

    Eigen::VectorXi expected_up(4), expected_down(4), expected_dir(4), expected_neutral(4);
    expected_up << 1, 0, 1, 0;
    expected_down << 0, 1, 0, 0;
    expected_dir << 1, -1, 1, 0;
    expected_neutral << 0, 0, 0, 1;
    EXPECT_EQ(ind.up.col(0), expected_up);
    EXPECT_EQ(ind.down.col(0), expected_down);
    EXPECT_EQ(ind.direction.col(0), expected_dir);
    EXPECT_EQ(ind.neutral.col(0), expected_neutral);
}

TEST(BuildIndicators, BoundaryEqualityCountsAsPiercing) {
    ReturnMatrix r = testutil::make_returns(Eigen::MatrixXd(2, 1));
    r.values << 1.0, -1.0;  // exactly +h and -h
    const IndicatorSet ind = gerber::build_indicators(r, testutil::unit_thresholds(1));
    EXPECT_EQ(ind.up(0, 0), 1);
    EXPECT_EQ(ind.down(1, 0), 1);
    EXPECT_EQ(ind.neutral(0, 0), 0);
    EXPECT_EQ(ind.neutral(1, 0), 0);
}

TEST(BuildIndicators, AllInsideThresholdIsNeutral) {
    ReturnMatrix r = testutil::make_returns(Eigen::MatrixXd(3, 2));
    r.values << 0.5, -0.3, 0.1, 0.9, -0.99, 0.0;
    const IndicatorSet ind = gerber::build_indicators(r, testutil::unit_thresholds(2));
    EXPECT_TRUE(ind.up.isZero());
    EXPECT_TRUE(ind.down.isZero());
    EXPECT_TRUE((ind.neutral.array() == 1).all());
}

TEST(BuildIndicators, CellsPartitionIntoExactlyOneState) {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        const ReturnMatrix r = testutil::make_returns(testutil::random_returns(seed, 40, 6));
        const IndicatorSet ind =
            gerber::build_indicators(r, testutil::natural_thresholds(r, 0.5));
        for (Eigen::Index t = 0; t < ind.periods(); ++t)
            for (Eigen::Index k = 0; k < ind.assets(); ++k) {
                EXPECT_EQ(ind.up(t, k) + ind.down(t, k) + ind.neutral(t, k), 1);
                EXPECT_EQ(ind.up(t, k) * ind.down(t, k), 0);
                EXPECT_EQ(ind.direction(t, k), ind.up(t, k) - ind.down(t, k));
                EXPECT_EQ(ind.neutral(t, k), 1 - std::abs(ind.direction(t, k)));
            }
    }
}

TEST(BuildIndicators, ScaleEquivariantPerColumn) {
    const ReturnMatrix r = testutil::make_returns(testutil::random_returns(21, 30, 4));
    const Eigen::VectorXd sigmas = gerber::column_stddevs(r);
    const IndicatorSet base = gerber::build_indicators(r, gerber::build_thresholds(sigmas, 0.5));

    for (double lambda : {4.0, 3.7}) {  // a power of two and a generic scale
        ReturnMatrix scaled = r;
        scaled.values.col(2) *= lambda;
        Eigen::VectorXd scaled_sigmas = sigmas;
        scaled_sigmas(2) *= lambda;
        const IndicatorSet ind =
            gerber::build_indicators(scaled, gerber::build_thresholds(scaled_sigmas, 0.5));
        EXPECT_EQ(ind.up, base.up) << "lambda=" << lambda;
        EXPECT_EQ(ind.down, base.down) << "lambda=" << lambda;
        EXPECT_EQ(ind.direction, base.direction) << "lambda=" << lambda;
        EXPECT_EQ(ind.neutral, base.neutral) << "lambda=" << lambda;
    }
}

TEST(BuildIndicators, RejectsDimensionMismatchAndBadLevels) {
    const ReturnMatrix r = testutil::make_returns(testutil::random_returns(5, 10, 3));
    EXPECT_THROW(gerber::build_indicators(r, testutil::unit_thresholds(2)), ValidationError);

    ThresholdVector bad = testutil::unit_thresholds(3);
    bad.levels(1) = 0.0;
    EXPECT_THROW(gerber::build_indicators(r, bad), ValidationError);
}

} // namespace
