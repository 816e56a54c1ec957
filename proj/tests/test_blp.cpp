#include "heom/blp.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace heom;

namespace {
int numerical_rank(const DensityMatrix& rho) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix());
    int r = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > 1e-10) ++r;
    return r;
}
}  // namespace

TEST(SigmaIntegral, Examples) {
    const std::vector<double> falling{1.0, 0.8, 0.5, 0.2};
    EXPECT_DOUBLE_EQ(sigma_integral(falling), 0.0);
    const std::vector<double> hand{1.0, 0.4, 0.7, 0.5, 0.6};
    EXPECT_NEAR(sigma_integral(hand), 0.4, 1e-15);
    const std::vector<double> flat(10, 0.3);
    EXPECT_DOUBLE_EQ(sigma_integral(flat), 0.0);
    EXPECT_THROW(sigma_integral(std::vector<double>{}), std::invalid_argument);
}

TEST(OrthogonalPair, DimerPairsArePureAndOrthogonal) {
    for (std::uint64_t i = 0; i < 500; ++i) {
        auto rng = pair_rng(17, i);
        const auto pair = sample_orthogonal_pair(2, rng);
        EXPECT_EQ(pair.split_rank, 1);
        EXPECT_EQ(numerical_rank(pair.rho_a), 1);
        EXPECT_EQ(numerical_rank(pair.rho_b), 1);
        EXPECT_NEAR(trace_distance(pair.rho_a, pair.rho_b), 1.0, 1e-10);
        EXPECT_LT(std::abs((pair.rho_a.matrix() * pair.rho_b.matrix()).trace()), 1e-10);
    }
}

TEST(OrthogonalPair, TrimerRanksAndSupports) {
    int rank_one_splits = 0, rank_two_splits = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        auto rng = pair_rng(99, i);
        const auto pair = sample_orthogonal_pair(3, rng);
        ASSERT_NEAR(trace_distance(pair.rho_a, pair.rho_b), 1.0, 1e-10);
        ASSERT_LT(std::abs((pair.rho_a.matrix() * pair.rho_b.matrix()).trace()), 1e-10);
        ASSERT_EQ(pair.spectrum.size(), 3u);
        ASSERT_EQ(pair.angles.size(), 3u);
        ASSERT_EQ(pair.phases.size(), 5u);
        if (pair.split_rank == 1) {
            ++rank_one_splits;
            EXPECT_EQ(numerical_rank(pair.rho_a), 1);
            EXPECT_LE(numerical_rank(pair.rho_b), 2);
        } else {
            ++rank_two_splits;
            EXPECT_LE(numerical_rank(pair.rho_a), 2);
            EXPECT_EQ(numerical_rank(pair.rho_b), 1);
        }
        // each block's spectrum lies on its simplex
        double sa = 0, sb = 0;
        for (int k = 0; k < 3; ++k) (k < pair.split_rank ? sa : sb) += pair.spectrum[static_cast<std::size_t>(k)];
        EXPECT_NEAR(sa, 1.0, 1e-14);
        EXPECT_NEAR(sb, 1.0, 1e-14);
    }
    EXPECT_GT(rank_one_splits, 400);
    EXPECT_GT(rank_two_splits, 400);
}

TEST(OrthogonalPair, SimplexSamplingIsUniform) {
    // On the 1-simplex uniform spacings give a uniform first coordinate: mean 1/2, variance 1/12
    std::mt19937_64 rng(1);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const double x = detail::simplex_point(2, rng)[0];
        sum += x;
        sq += x * x;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.01);
    EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.003);
}

TEST(OrthogonalPair, DesignatedPairValidation) {
    EXPECT_NO_THROW(designated_pair(DensityMatrix::site_projector(2, 1), DensityMatrix::site_projector(2, 2)));
    EXPECT_THROW(designated_pair(DensityMatrix::site_projector(2, 1), DensityMatrix::maximally_mixed(2)), std::invalid_argument);
}

TEST(Blp, SampledPairsStartPerfectlyDistinguishable) {
    for (auto id : {"E-2", "C-3"}) {
        const auto h = build_site_hamiltonian(id);
        const DynamicalMap map(h, BathSpec(50, 100, 270), TimeGrid{0, 50, 0.5, 5}, 3);
        for (std::uint64_t i = 0; i < 200; ++i) {
            auto rng = pair_rng(3, i);
            const auto d = trace_distance_trajectory(map, sample_orthogonal_pair(h.n_sites(), rng));
            ASSERT_NEAR(d.values.front(), 1.0, 1e-10);
            for (double v : d.values) ASSERT_LE(v, 1.0 + 1e-9);
        }
    }
}

TEST(Blp, MapRouteEqualsDirectPropagation) {
    const auto h = build_site_hamiltonian("E-3");
    const BathSpec bath(40, 150, 260);
    const TimeGrid grid{0, 400, 0.5, 5};
    const DynamicalMap map(h, bath, grid, 5);
    for (std::uint64_t i = 0; i < 3; ++i) {
        auto rng = pair_rng(8, i);
        const auto pair = sample_orthogonal_pair(3, rng);
        const auto via_map = trace_distance_trajectory(map, pair);
        const auto direct = trace_distance_trajectory(h, bath, grid, 5, pair);
        ASSERT_EQ(via_map.values.size(), direct.values.size());
        for (std::size_t k = 0; k < direct.values.size(); ++k) EXPECT_NEAR(via_map.values[k], direct.values[k], 1e-10);
    }
}

TEST(Blp, NestedSamplesAreMonotoneAndWorkerIndependent) {
    const auto h = build_site_hamiltonian("FMO-2");
    const DynamicalMap map(h, BathSpec(20, 50, 250), TimeGrid{}, 8);
    BlpOptions opts;
    opts.keep_integrals = true;
    const auto small = blp_estimate(map, 50, 123, opts);
    const auto large = blp_estimate(map, 200, 123, opts);
    EXPECT_LE(small.value, large.value);
    for (std::size_t i = 0; i < small.integrals.size(); ++i) EXPECT_EQ(small.integrals[i], large.integrals[i]);
    EXPECT_DOUBLE_EQ(large.value, *std::max_element(large.integrals.begin(), large.integrals.end()));
    EXPECT_GE(large.value, 0.0);

    opts.workers = 4;
    const auto threaded = blp_estimate(map, 200, 123, opts);
    EXPECT_EQ(threaded.value, large.value);
    EXPECT_EQ(threaded.best_index, large.best_index);
    EXPECT_EQ(threaded.best_pair.describe(), large.best_pair.describe());

    const auto again = blp_estimate(map, 1, 7);
    EXPECT_EQ(again.value, blp_estimate(map, 1, 7).value);
}

TEST(Blp, BestPairReproducesEstimate) {
    const auto h = build_site_hamiltonian("E-2");
    const DynamicalMap map(h, BathSpec(20, 50, 250), TimeGrid{}, 8);
    const auto est = blp_estimate(map, 100, 5);
    EXPECT_DOUBLE_EQ(sigma_integral(trace_distance_trajectory(map, est.best_pair)), est.value);
}

TEST(Blp, SigmaIntegralStableUnderStepRefinement) {
    const auto h = build_site_hamiltonian("E-2");
    const BathSpec bath(20, 50, 250);
    const TimeGrid coarse;
    const auto pair = blp_estimate(DynamicalMap(h, bath, coarse, 8), 50, 1).best_pair;
    const double s1 = sigma_integral(trace_distance_trajectory(DynamicalMap(h, bath, coarse, 8), pair));
    const double s2 = sigma_integral(trace_distance_trajectory(DynamicalMap(h, bath, coarse.refined(), 8), pair));
    ASSERT_GT(s1, 1e-3);
    EXPECT_NEAR(s2, s1, 0.05 * s1);
}

TEST(Blp, ClosedEvolutionKeepsTraceDistanceConstant) {
    std::mt19937_64 seeder(77);
    for (auto id : kNamedSystems) {
        const auto h = build_site_hamiltonian(id);
        auto rng = pair_rng(seeder(), 0);
        const auto pair = sample_orthogonal_pair(h.n_sites(), rng);
        const auto a = closed_system_propagate(h, pair.rho_a, TimeGrid{});
        const auto b = closed_system_propagate(h, pair.rho_b, TimeGrid{});
        std::vector<double> d;
        for (std::size_t k = 0; k < a.size(); ++k) d.push_back(trace_distance(a.states[k], b.states[k]));
        for (double v : d) EXPECT_NEAR(v, 1.0, 1e-10);
        EXPECT_LT(sigma_integral(d), 1e-9) << id;
    }
}

TEST(Blp, DesignatedSitePairShowsNoBackflowForC2) {
    const auto h = build_site_hamiltonian("C-2");
    const DynamicalMap map(h, BathSpec(220, 50, 250), TimeGrid{}, 12);
    const auto pair = designated_pair(DensityMatrix::site_projector(2, 1), DensityMatrix::site_projector(2, 2));
    EXPECT_LT(sigma_integral(trace_distance_trajectory(map, pair)), 1e-3);
}

TEST(Blp, FmoDimerEstimateAtOptimum) {
    BlpOptions opts;
    opts.depth = 8;
    const auto est = blp_estimate(build_site_hamiltonian("FMO-2"), BathSpec(20, 50, 250), TimeGrid{}, 2000, 1, opts);
    EXPECT_NEAR(est.value, 0.045, 0.5 * 0.045);
    EXPECT_EQ(est.depth, 8);
    EXPECT_EQ(est.sample_size, 2000);
}

TEST(Blp, AutomaticDepthUsesConvergenceHarness) {
    BlpOptions opts;
    const auto est = blp_estimate(build_site_hamiltonian("E-2"), BathSpec(20, 50, 250), TimeGrid{}, 10, 1, opts);
    EXPECT_TRUE(est.depth_converged);
    EXPECT_GE(est.depth, default_depth(2));
    EXPECT_THROW(blp_estimate(build_site_hamiltonian("E-2"), BathSpec(20, 50, 250), TimeGrid{}, 0, 1, opts), std::invalid_argument);
}
