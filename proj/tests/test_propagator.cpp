#include "heom/convergence.hpp"
#include "heom/measures.hpp"
#include "heom/propagator.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace heom;

namespace {

std::pair<double, double> peak(const Trajectory& traj) {
    const auto f = traj.fidelity_series();
    const auto it = std::max_element(f.begin(), f.end());
    return {traj.times[static_cast<std::size_t>(it - f.begin())], *it};
}

const DensityMatrix& site1_dimer() {
    static const DensityMatrix rho = DensityMatrix::site_projector(2, 1);
    return rho;
}

}  // namespace

TEST(TimeGrid, Validation) {
    TimeGrid g;
    EXPECT_NO_THROW(g.validate());
    EXPECT_EQ(g.steps(), 2000);
    EXPECT_EQ(g.output_times().size(), 401u);
    EXPECT_DOUBLE_EQ(g.output_times()[29], 72.5);
    EXPECT_THROW((TimeGrid{0, 1000, 0.3, 1}.validate()), std::invalid_argument);
    EXPECT_THROW((TimeGrid{0, 1000, 0.0, 1}.validate()), std::invalid_argument);
    EXPECT_THROW((TimeGrid{0, -1, 0.5, 1}.validate()), std::invalid_argument);
    EXPECT_EQ(g.refined().output_times(), g.output_times());
}

TEST(BathSpec, HighTemperatureCondition) {
    EXPECT_TRUE(BathSpec(20, 50, 250).high_temperature_valid());
    EXPECT_FALSE(BathSpec(20, 30, 250).high_temperature_valid());
    EXPECT_TRUE(BathSpec(20, 31, 250).high_temperature_valid());
    EXPECT_THROW(BathSpec(0, 50, 250), std::invalid_argument);
    EXPECT_THROW(BathSpec(20, -1, 250), std::invalid_argument);
    EXPECT_THROW(BathSpec(20, 50, 0), std::invalid_argument);
}

TEST(ClosedSystem, DegenerateDimerFollowsRabiOscillation) {
    const auto h = build_site_hamiltonian("E-2");
    const TimeGrid grid{0, 1000, 0.5, 1};
    const auto traj = closed_system_propagate(h, site1_dimer(), grid);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double expected = std::pow(std::sin(100.0 * traj.times[k] / UnitConstants::hbar), 2);
        ASSERT_NEAR(traj.states[k](1, 1).real(), expected, 1e-12);
    }
    const double t_full = std::numbers::pi * UnitConstants::hbar / (2.0 * 100.0);
    EXPECT_NEAR(t_full, 83.4, 0.05);
    const auto at = closed_system_propagate(h, site1_dimer(), TimeGrid{0, t_full, t_full, 1});
    EXPECT_NEAR(fidelity(at.states.back(), 2), 1.0, 1e-12);
}

TEST(ClosedSystem, PeakFidelities) {
    const TimeGrid grid;
    EXPECT_NEAR(peak(closed_system_propagate(build_site_hamiltonian("FMO-2"), site1_dimer(), grid)).second, 0.89, 0.01);
    EXPECT_NEAR(peak(closed_system_propagate(build_site_hamiltonian("FMO-3"), DensityMatrix::site_projector(3, 1), grid)).second, 0.29, 0.01);
}

TEST(ClosedSystem, ExcitonCoherenceIsConstant) {
    for (auto id : kNamedSystems) {
        const auto h = build_site_hamiltonian(id);
        const auto basis = exciton_basis(h);
        const auto traj = closed_system_propagate(h, DensityMatrix::site_projector(h.n_sites(), 1), TimeGrid{});
        const double c0 = l1_coherence(traj.states.front(), basis);
        double worst = 0.0;
        for (const auto& s : traj.states) worst = std::max(worst, std::abs(l1_coherence(s, basis) - c0));
        EXPECT_LT(worst, 1e-8) << id;
    }
}

TEST(Heom, FmoDimerOptimum) {
    const auto traj = heom_propagate(build_site_hamiltonian("FMO-2"), BathSpec(20, 50, 250), site1_dimer(), TimeGrid{}, 8);
    const auto [t, f] = peak(traj);
    EXPECT_NEAR(f, 0.83, 0.03);
    EXPECT_NEAR(t, 72.5, 10.0);
}

TEST(Heom, DegenerateDimerOptimum) {
    const auto traj = heom_propagate(build_site_hamiltonian("E-2"), BathSpec(20, 50, 250), site1_dimer(), TimeGrid{}, 8);
    const auto [t, f] = peak(traj);
    EXPECT_NEAR(f, 0.91, 0.03);
    EXPECT_NEAR(t, 77.5, 10.0);
}

TEST(Heom, VanishingCouplingMatchesClosedSystem) {
    // 0.01 cm^-1 already dephases by a few 1e-3 over 1 ps; the deviation is linear in lambda
    constexpr double kLambda = 1e-3;
    for (auto id : kNamedSystems) {
        const auto h = build_site_hamiltonian(id);
        const auto rho0 = DensityMatrix::site_projector(h.n_sites(), 1);
        const auto open = heom_propagate(h, BathSpec(kLambda, 50, 250), rho0, TimeGrid{}, 2);
        const auto closed = closed_system_propagate(h, rho0, TimeGrid{});
        ASSERT_EQ(open.size(), closed.size());
        double worst = 0.0;
        for (std::size_t k = 0; k < open.size(); ++k)
            worst = std::max(worst, (open.states[k].populations() - closed.states[k].populations()).cwiseAbs().maxCoeff());
        EXPECT_LT(worst, 1e-3) << id;
    }
}

TEST(Heom, TraceAndHermiticityAtAllCorners) {
    for (auto id : kNamedSystems) {
        const auto h = build_site_hamiltonian(id);
        const auto rho0 = DensityMatrix::site_projector(h.n_sites(), 1);
        for (double lambda : {20.0, 220.0})
            for (double tau : {50.0, 500.0})
                for (double temp : {250.0, 300.0}) {
                    const auto traj = heom_propagate(h, BathSpec(lambda, tau, temp), rho0, TimeGrid{}, default_depth(h.n_sites()));
                    for (const auto& s : traj.states) {
                        ASSERT_LT(std::abs(s.trace() - 1.0), 1e-6) << id << " " << lambda << " " << tau << " " << temp;
                        ASSERT_LT(s.hermiticity_error(), 1e-8);
                    }
                }
    }
}

TEST(Heom, LongTimeApproachesBoltzmannInWeakCoupling) {
    const auto h = build_site_hamiltonian("FMO-2");
    const auto traj = heom_propagate(h, BathSpec(20, 50, 250), site1_dimer(), TimeGrid{}, 8);
    const double f_eq = fidelity(boltzmann_equilibrium(h, 250), 2);
    EXPECT_NEAR(fidelity(traj.states.back(), 2), f_eq, 0.05);
}

TEST(Heom, GeneralInitialStateAndProvenance) {
    Eigen::MatrixXcd plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    const auto h = build_site_hamiltonian("C-2");
    const BathSpec bath(100, 100, 270);
    const TimeGrid grid{0, 200, 0.5, 4};
    const auto traj = heom_propagate(h, bath, DensityMatrix(plus), grid, 6);
    EXPECT_EQ(traj.size(), 101u);
    EXPECT_EQ(traj.depth, 6);
    ASSERT_TRUE(traj.bath.has_value());
    EXPECT_EQ(*traj.bath, bath);
    EXPECT_EQ(traj.grid, grid);
    for (std::size_t k = 1; k < traj.size(); ++k) EXPECT_GT(traj.times[k], traj.times[k - 1]);
}

TEST(Heom, Errors) {
    const auto h = build_site_hamiltonian("FMO-2");
    EXPECT_THROW(heom_propagate(h, BathSpec(20, 25, 250), site1_dimer(), TimeGrid{}, 4), std::invalid_argument);
    EXPECT_THROW(heom_propagate(h, BathSpec(20, 50, 250), site1_dimer(), TimeGrid{}, 0), std::invalid_argument);
    EXPECT_THROW(heom_propagate(h, BathSpec(20, 50, 250), DensityMatrix::site_projector(3, 1), TimeGrid{}, 4), std::invalid_argument);
    EXPECT_THROW(HeomSolver(build_site_hamiltonian("E-3"), BathSpec(20, 50, 250), 2000), MemoryBoundError);
    // a step far beyond the RK4 stability limit must trip the divergence detector
    EXPECT_THROW(heom_propagate(h, BathSpec(220, 50, 300), site1_dimer(), TimeGrid{0, 1000, 50, 1}, 10), DivergenceError);
}

TEST(DynamicalMap, ReproducesDirectPropagation) {
    const auto h = build_site_hamiltonian("FMO-3");
    const BathSpec bath(80, 100, 260);
    const TimeGrid grid{0, 300, 0.5, 10};
    const DynamicalMap map(h, bath, grid, 4);
    Eigen::MatrixXcd rho0(3, 3);
    rho0 << 0.5, cplx(0.1, 0.2), 0.0, cplx(0.1, -0.2), 0.3, cplx(0, 0.05), 0.0, cplx(0, -0.05), 0.2;
    const auto direct = heom_propagate(h, bath, DensityMatrix(rho0), grid, 4);
    for (std::size_t t = 0; t < direct.size(); ++t) EXPECT_LT((map.apply(rho0, t) - direct.states[t].matrix()).cwiseAbs().maxCoeff(), 1e-12);
}
