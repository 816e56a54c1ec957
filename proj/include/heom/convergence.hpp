#pragma once

#include "heom/propagator.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace heom {

/// Starting hierarchy depth before any convergence refinement.
inline int default_depth(int n_sites) { return n_sites <= 2 ? 8 : 6; }

struct ConvergenceOptions {
    int start_depth = 0;  // 0 selects default_depth(n_sites)
    int max_depth = 25;
    double min_dt = 0.0625;
    double tolerance = 1e-4;
};

struct ConvergenceReport {
    struct Step {
        double setting;  // depth or dt of the coarser run
        double residual;
    };
    int depth = 0;
    double dt = 0.0;
    std::vector<Step> depth_steps;
    std::vector<Step> dt_steps;
};

struct ConvergenceError : std::runtime_error {
    ConvergenceError(const std::string& what, ConvergenceReport partial)
        : std::runtime_error(what), report(std::move(partial)) {}
    ConvergenceReport report;
};

/// Largest entry-wise deviation between two runs over all output instants.
inline double max_deviation(const std::vector<Eigen::MatrixXcd>& a, const std::vector<Eigen::MatrixXcd>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_deviation: output grids differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
    return worst;
}

/// Raises the depth until consecutive depths agree within tolerance, then
/// halves dt (at the settled depth) until consecutive steps agree.
inline ConvergenceReport convergence_report(const SiteHamiltonian& h, const BathSpec& bath, const DensityMatrix& rho0,
                                            const TimeGrid& grid, const ConvergenceOptions& opts = {}) {
    if (!bath.high_temperature_valid()) throw std::invalid_argument("convergence_report: invalid bath");
    grid.validate();
    rho0.validate();
    ConvergenceReport report;
    int depth = opts.start_depth > 0 ? opts.start_depth : default_depth(h.n_sites());
    auto current = HeomSolver(h, bath, depth).evolve(rho0.matrix(), grid);
    for (;;) {
        if (depth + 1 > opts.max_depth)
            throw ConvergenceError("hierarchy did not converge by depth " + std::to_string(opts.max_depth) +
                                       " (last residual " +
                                       (report.depth_steps.empty() ? std::string("n/a") : std::to_string(report.depth_steps.back().residual)) + ")",
                                   report);
        auto deeper = HeomSolver(h, bath, depth + 1).evolve(rho0.matrix(), grid);
        const double r = max_deviation(current, deeper);
        report.depth_steps.push_back({static_cast<double>(depth), r});
        if (r < opts.tolerance) break;
        ++depth;
        current = std::move(deeper);
    }
    report.depth = depth;

    TimeGrid g = grid;
    const HeomSolver solver(h, bath, depth);
    for (;;) {
        const TimeGrid finer = g.refined();
        if (finer.dt < opts.min_dt * (1.0 - 1e-12))
            throw ConvergenceError("time step did not converge by dt = " + std::to_string(g.dt) + " fs", report);
        auto refined = solver.evolve(rho0.matrix(), finer);
        const double r = max_deviation(current, refined);
        report.dt_steps.push_back({g.dt, r});
        if (r < opts.tolerance) break;
        g = finer;
        current = std::move(refined);
    }
    report.dt = g.dt;
    return report;
}

}  // namespace heom
