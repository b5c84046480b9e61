#include <gtest/gtest.h>

#include <hidetify/hidetify.hpp>

#include "oracle.hpp"

#include <random>
#include <set>

using namespace hidetify;

namespace {

/// Gaussian data whose first `bad` rows are pushed far off the regression, each in its own direction.
DataMatrix planted(std::size_t n, std::size_t p, std::size_t bad, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::bernoulli_distribution coin(0.5);
    std::vector<double> x(n * p), y(n);
    for (auto& v : x) v = z(rng);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = x[i] + x[n + i] + z(rng);
        if (i < bad) {
            for (std::size_t j = 0; j < p; ++j) x[j * n + i] += coin(rng) ? 5.0 : -5.0;
            y[i] = (i % 2 ? -1.0 : 1.0) * (30.0 + 5.0 * static_cast<double>(i));
        }
    }
    return DataMatrix(n, p, x, y);
}

RammParams small_params() {
    RammParams p;
    p.seed = 17;
    return p;
}

}  // namespace

TEST(RammParams, Validation) {
    RammParams p;
    EXPECT_NO_THROW(p.validate(40));
    EXPECT_EQ(p.resolved_subset_size(41), 20u);
    p.subset_size = 39;
    EXPECT_THROW(p.validate(40), InvalidArgument);
    p = {};
    p.omega = 1.0;
    EXPECT_THROW(p.validate(40), InvalidArgument);
    p = {};
    p.alpha_max = 0.0;
    EXPECT_THROW(p.validate(40), InvalidArgument);
    p = {};
    p.m = 0;
    EXPECT_THROW(p.validate(40), InvalidArgument);
    p = {};
    p.max_outer_iters = 0;
    EXPECT_THROW(p.validate(40), InvalidArgument);
}

TEST(MinStep, NothingBelowThresholdFlagsNothing) {
    auto d = planted(30, 8, 0, 1);
    auto p = small_params();
    p.alpha_min = 1e-300;
    auto rec = min_step(d, all_rows(30), p, 1);
    EXPECT_TRUE(rec.flagged.empty());
    EXPECT_EQ(rec.scores.size(), 30u);
}

TEST(MinStep, CapKeepsSmallestPValues) {
    auto d = planted(40, 10, 6, 2);
    auto p = small_params();
    p.omega = 0.05;  // floor(0.05 * 40) = 2
    p.alpha_min = 0.5;
    auto rec = min_step(d, all_rows(40), p, 1);
    std::vector<ObservationScore> cand;
    for (const auto& s : rec.scores)
        if (s.p_value < p.alpha_min / 20.0) cand.push_back(s);
    ASSERT_GE(cand.size(), 3u);
    std::sort(cand.begin(), cand.end(), [](auto& a, auto& b) {
        return a.p_value != b.p_value ? a.p_value < b.p_value : a.observation < b.observation;
    });
    std::vector<std::size_t> expect{cand[0].observation, cand[1].observation};
    std::sort(expect.begin(), expect.end());
    EXPECT_EQ(rec.flagged, expect);
}

TEST(MinStep, DenominatorOverride) {
    auto d = planted(40, 10, 4, 3);
    auto p = small_params();
    p.min_denominator = MinStepDenominator::active_count;
    auto rec = min_step(d, all_rows(40), p, 1);
    for (const auto& s : rec.scores) {
        bool flagged = std::find(rec.flagged.begin(), rec.flagged.end(), s.observation) != rec.flagged.end();
        if (s.p_value >= p.alpha_min / 40.0) EXPECT_FALSE(flagged);
    }
}

TEST(MaxStep, TinyLevelFlagsNothingAndGrossOutliersAreFlagged) {
    auto d = planted(40, 10, 3, 4);
    auto p = small_params();
    p.alpha_max = 1e-300;
    EXPECT_TRUE(max_step(d, all_rows(40), p, 1).flagged.empty());
    p.alpha_max = 0.001;
    auto rec = max_step(d, all_rows(40), p, 1);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NE(std::find(rec.flagged.begin(), rec.flagged.end(), i), rec.flagged.end());
    }
    for (std::size_t i = 0; i < rec.scores.size(); ++i) {
        const auto& s = rec.scores[i];
        bool flagged = std::find(rec.flagged.begin(), rec.flagged.end(), s.observation) != rec.flagged.end();
        EXPECT_EQ(flagged, s.p_value < 0.001 / 40.0);
    }
}

TEST(Steps, TooFewActive) {
    auto d = planted(20, 4, 0, 5);
    auto p = small_params();
    std::vector<std::size_t> active{0, 1, 2, 3, 4};
    EXPECT_THROW(min_step(d, active, p, 1), TooFewActive);
    EXPECT_THROW(max_step(d, active, p, 1), TooFewActive);
}

TEST(Validation, EmptyCandidatesAndDuplicateRow) {
    auto d = planted(30, 6, 0, 6);
    auto p = small_params();
    EXPECT_TRUE(validation_step(d, all_rows(30), {}, p).flagged.empty());

    // Row 29 copies row 0; test it against a clean set that includes row 0.
    std::vector<double> x(d.rows() * d.cols());
    std::vector<double> y(d.response().begin(), d.response().end());
    for (std::size_t j = 0; j < d.cols(); ++j)
        for (std::size_t i = 0; i < d.rows(); ++i) x[j * 30 + i] = d.x(i == 29 ? 0 : i, j);
    y[29] = y[0];
    DataMatrix dup(30, 6, x, y);
    std::vector<std::size_t> cand{29};
    auto rec = validation_step(dup, all_rows_except(30, 29), cand, p);
    ASSERT_EQ(rec.scores.size(), 1u);
    EXPECT_LT(rec.scores[0].statistic, chi_square_upper_quantile(0.05, 3.0));
    EXPECT_TRUE(rec.flagged.empty());

    std::vector<std::size_t> overlap{3};
    EXPECT_THROW(validation_step(d, all_rows(30), overlap, p), InvalidArgument);
}

TEST(Detect, PartitionAndTraceConsistency) {
    auto d = planted(40, 10, 4, 7);
    auto p = small_params();
    auto r = detect(d, p);
    std::set<std::size_t> all(r.influential.begin(), r.influential.end());
    for (auto i : r.clean) EXPECT_TRUE(all.insert(i).second);
    EXPECT_EQ(all.size(), 40u);

    std::set<std::size_t> step_flagged;
    std::set<std::size_t> removed;
    for (const auto& step : r.trace) {
        if (step.step == StepKind::validation) continue;
        for (const auto& s : step.scores) EXPECT_EQ(removed.count(s.observation), 0u);
        for (auto i : step.flagged) {
            step_flagged.insert(i);
            removed.insert(i);
        }
    }
    for (auto i : r.influential) EXPECT_EQ(step_flagged.count(i), 1u);
    EXPECT_EQ(r.trace.back().step, StepKind::validation);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(all.count(i), 1u);
    EXPECT_LE(r.iterations_used, p.max_outer_iters);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NE(std::find(r.influential.begin(), r.influential.end(), i), r.influential.end());
}

TEST(Detect, ReproducibleAcrossThreadCounts) {
    auto d = planted(36, 12, 3, 8);
    auto p = small_params();
    auto a = detect(d, p);
    EXPECT_EQ(a, detect(d, p));
    p.threads = 4;
    EXPECT_EQ(a, detect(d, p));
    p.seed = 18;
    p.threads = 1;
    auto c = detect(d, p);
    EXPECT_NE(a.trace.front().scores, c.trace.front().scores);
}

TEST(Detect, SingleOuterIterationTrace) {
    auto d = planted(40, 10, 6, 9);
    auto p = small_params();
    p.max_outer_iters = 1;
    auto r = detect(d, p);
    ASSERT_EQ(r.trace.size(), 3u);
    EXPECT_EQ(r.trace[0].step, StepKind::min);
    EXPECT_EQ(r.trace[1].step, StepKind::max);
    EXPECT_EQ(r.trace[2].step, StepKind::validation);
    EXPECT_EQ(r.iterations_used, 1u);
}

TEST(Detect, MinCapPerIteration) {
    auto d = planted(40, 10, 12, 10);
    auto p = small_params();
    p.omega = 0.1;
    p.alpha_min = 0.5;
    auto r = detect(d, p);
    for (const auto& step : r.trace)
        if (step.step == StepKind::min) EXPECT_LE(step.flagged.size(), 4u);
}

TEST(DetectSingle, FlagsGrossOutlierAndMatchesDefinition) {
    auto d = planted(30, 6, 1, 11);
    ExpectileSequence taus = ExpectileSequence::standard();
    auto r = detect_single(d, taus, 0.05);
    EXPECT_NE(std::find(r.influential.begin(), r.influential.end(), 0u), r.influential.end());
    ASSERT_EQ(r.trace.size(), 1u);
    for (const auto& s : r.trace[0].scores) {
        EXPECT_NEAR(s.statistic, 900.0 * asym_him(d, s.observation, taus), 1e-9 * (1.0 + s.statistic));
    }
}

TEST(Detectors, ReductionsUseMedianOnly) {
    auto d = planted(36, 10, 4, 12);
    auto p = small_params();
    auto mip = run_detector(Detector::MIP, d, p);
    auto q = p;
    q.taus = {0.5};
    EXPECT_EQ(mip, run_detector(Detector::asymMIP, d, q));
    EXPECT_EQ(run_detector(Detector::HIM, d, p), run_detector(Detector::asymHIM, d, q));
    EXPECT_EQ(parse_detector("asymHIM"), Detector::asymHIM);
    EXPECT_FALSE(parse_detector("nope").has_value());
}
