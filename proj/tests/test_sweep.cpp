#include "heom/sweep.hpp"

#include <gtest/gtest.h>

using namespace heom;

namespace {
SweepRecord rec(double l, double tau, double t, double time, double f) { return {BathSpec(l, tau, t), time, f, {}, 8}; }
}  // namespace

TEST(SweepGrid, DefaultSizes) {
    EXPECT_EQ(SweepGrid::dimer_default().size(), 21u * 19u * 21u);
    EXPECT_EQ(SweepGrid::dimer_default().size(), 8379u);
    EXPECT_EQ(SweepGrid::trimer_default().size(), 1210u);
    EXPECT_EQ(SweepGrid::dimer_default().thinned().size(), 11u * 10u * 21u);
    const auto v = SweepGrid::dimer_default().temperature.values();
    EXPECT_DOUBLE_EQ(v.front(), 250.0);
    EXPECT_DOUBLE_EQ(v.back(), 300.0);
    EXPECT_DOUBLE_EQ(v[1], 252.5);
}

TEST(SweepGrid, RangeValidation) {
    EXPECT_THROW((Range{20, 220, 30}.validate()), std::invalid_argument);
    EXPECT_THROW((Range{20, 10, 5}.validate()), std::invalid_argument);
    EXPECT_THROW((Range{20, 30, 0}.validate()), std::invalid_argument);
    EXPECT_EQ((Range{50, 550, 25}.count()), 21u);
}

TEST(Sweep, SinglePointEqualsDirectPropagation) {
    const auto h = build_site_hamiltonian("FMO-2");
    const SweepGrid grid{Range::single(20), Range::single(50), Range::single(250)};
    SweepOptions opts;
    opts.depth = 8;
    const auto result = run_sweep(h, grid, TimeGrid{}, opts);
    ASSERT_TRUE(result.complete());
    ASSERT_EQ(result.records.size(), 1u);
    const auto direct = make_record(heom_propagate(h, BathSpec(20, 50, 250), DensityMatrix::site_projector(2, 1), TimeGrid{}, 8));
    EXPECT_EQ(result.records[0].best_fidelity, direct.best_fidelity);
    EXPECT_EQ(result.records[0].best_time, direct.best_time);
    EXPECT_EQ(result.records[0].fidelity, direct.fidelity);

    const auto opt = extract_optimum(result, OptimumMode::max);
    EXPECT_EQ(opt.fidelity, direct.best_fidelity);
    EXPECT_NEAR(opt.fidelity, 0.83, 0.03);
    EXPECT_NEAR(opt.time, 72.5, 10);
    const auto mn = extract_optimum(result, OptimumMode::min);
    EXPECT_EQ(mn.fidelity, opt.fidelity);
}

TEST(Sweep, RecordInvariantsAndDeterminism) {
    const auto h = build_site_hamiltonian("C-2");
    const SweepGrid grid{{20, 220, 200}, {50, 100, 50}, {250, 300, 50}};
    SweepOptions opts;
    opts.depth = 6;
    opts.workers = 3;
    const auto a = run_sweep(h, grid, TimeGrid{0, 500, 0.5, 5}, opts);
    ASSERT_TRUE(a.complete());
    ASSERT_EQ(a.records.size(), 8u);
    const auto times = TimeGrid{0, 500, 0.5, 5}.output_times();
    for (const auto& r : a.records) {
        const auto it = std::max_element(r.fidelity.begin(), r.fidelity.end());
        EXPECT_EQ(r.best_fidelity, *it);
        EXPECT_EQ(r.best_time, times[static_cast<std::size_t>(it - r.fidelity.begin())]);
    }
    opts.workers = 1;
    const auto b = run_sweep(h, grid, TimeGrid{0, 500, 0.5, 5}, opts);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        EXPECT_EQ(a.records[i].bath, b.records[i].bath);
        EXPECT_EQ(a.records[i].best_fidelity, b.records[i].best_fidelity);
        EXPECT_EQ(a.records[i].fidelity, b.records[i].fidelity);
    }
    const auto surface = fidelity_surface(a.records);
    double top = 0.0;
    for (const auto& [k, f] : surface) top = std::max(top, f);
    EXPECT_EQ(top, extract_optimum(a, OptimumMode::max).fidelity);
    for (const auto& r : a.records) EXPECT_GE(extract_optimum(a, OptimumMode::max).fidelity, r.best_fidelity);
}

TEST(Sweep, FailedPointsMarkSweepIncomplete) {
    const auto h = build_site_hamiltonian("E-2");
    // tau = 25 fs violates the high-temperature condition at 250 K
    const SweepGrid grid{Range::single(20), {25, 50, 25}, Range::single(250)};
    SweepOptions opts;
    opts.depth = 4;
    const auto result = run_sweep(h, grid, TimeGrid{0, 100, 0.5, 5}, opts);
    EXPECT_FALSE(result.complete());
    EXPECT_EQ(result.records.size(), 1u);
    ASSERT_EQ(result.failures.size(), 1u);
    EXPECT_DOUBLE_EQ(result.failures[0].bath.tau, 25.0);
    EXPECT_THROW(extract_optimum(result, OptimumMode::max), std::invalid_argument);
}

TEST(Sweep, ResumeSkipsFinishedPoints) {
    const auto h = build_site_hamiltonian("E-2");
    const SweepGrid grid{{20, 40, 20}, Range::single(50), Range::single(250)};
    SweepOptions opts;
    opts.depth = 4;
    opts.resume = {rec(20, 50, 250, 1.0, 0.123)};
    const auto result = run_sweep(h, grid, TimeGrid{0, 100, 0.5, 5}, opts);
    ASSERT_TRUE(result.complete());
    EXPECT_EQ(result.records[0].best_fidelity, 0.123);
    EXPECT_NE(result.records[1].best_fidelity, 0.123);
}

TEST(ExtractOptimum, MaxMinAndTies) {
    const std::vector<SweepRecord> records = {rec(40, 50, 250, 10, 0.7), rec(20, 75, 250, 12, 0.9), rec(20, 50, 255, 20, 0.9),
                                              rec(30, 50, 250, 5, 0.4), rec(20, 50, 250, 5, 0.4)};
    const auto mx = extract_optimum(records, OptimumMode::max);
    EXPECT_DOUBLE_EQ(mx.fidelity, 0.9);
    EXPECT_DOUBLE_EQ(mx.tau, 50);
    EXPECT_DOUBLE_EQ(mx.temperature, 255);
    const auto mn = extract_optimum(records, OptimumMode::min);
    EXPECT_DOUBLE_EQ(mn.fidelity, 0.4);
    EXPECT_DOUBLE_EQ(mn.lambda, 20);
    EXPECT_THROW(extract_optimum(std::vector<SweepRecord>{}, OptimumMode::max), std::invalid_argument);
    const auto one = extract_optimum(std::vector<SweepRecord>{rec(60, 100, 270, 33, 0.5)}, OptimumMode::max);
    EXPECT_DOUBLE_EQ(one.lambda, 60);
    EXPECT_DOUBLE_EQ(one.time, 33);
}

TEST(References, ZeroHamiltonian) {
    const auto refs = closed_and_equilibrium_refs(make_dimer(0, 0), 250, TimeGrid{});
    EXPECT_DOUBLE_EQ(refs.f_cs_max, 0.0);
    EXPECT_NEAR(refs.f_eq, 0.7071, 1e-4);
}

TEST(References, TabulatedSystems) {
    const auto c2 = closed_and_equilibrium_refs(build_site_hamiltonian("C-2"), 250, TimeGrid{});
    EXPECT_NEAR(c2.f_cs_max, 0.81, 0.01);
    EXPECT_NEAR(c2.f_eq, 0.82, 0.01);
    const auto f3 = closed_and_equilibrium_refs(build_site_hamiltonian("FMO-3"), 250, TimeGrid{});
    EXPECT_NEAR(f3.f_cs_max, 0.29, 0.01);
    EXPECT_NEAR(f3.f_eq, 0.80, 0.01);
}

TEST(CornerDepth, VanishingCouplingCornersSettleQuickly) {
    const auto h = build_site_hamiltonian("E-2");
    const SweepGrid grid{{0.01, 0.02, 0.01}, {50, 100, 50}, Range::single(250)};
    ConvergenceOptions copts;
    copts.start_depth = 1;
    std::vector<CornerConvergence> corners;
    EXPECT_EQ(corner_depth(h, grid, TimeGrid{0, 200, 0.5, 5}, copts, &corners), 1);
    ASSERT_EQ(corners.size(), 4u);
    for (const auto& c : corners) EXPECT_TRUE(c.report.has_value());
}

TEST(CornerDepth, UnconvergedCornerForcesCap) {
    const auto h = build_site_hamiltonian("E-2");
    const SweepGrid grid{{20, 220, 200}, {50, 500, 450}, Range::single(300)};
    ConvergenceOptions copts;
    copts.max_depth = 9;
    std::vector<CornerConvergence> corners;
    EXPECT_EQ(corner_depth(h, grid, TimeGrid{0, 200, 0.5, 5}, copts, &corners), 9);
    const auto failed = std::count_if(corners.begin(), corners.end(), [](const auto& c) { return !c.report; });
    EXPECT_GE(failed, 1);
}
