#pragma once

#include "heom/convergence.hpp"
#include "heom/measures.hpp"
#include "heom/parallel.hpp"
#include "heom/propagator.hpp"
#include "heom/su.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heom {

/// Two initially perfectly distinguishable states U diag(a) U^dag and
/// U diag(b) U^dag, where a lives on the first split_rank diagonal slots and
/// b on the rest.
struct OrthogonalPair {
    DensityMatrix rho_a;
    DensityMatrix rho_b;
    int split_rank = 0;
    std::vector<double> spectrum;  // lambda_1..lambda_N; first split_rank sum to 1, rest sum to 1
    std::vector<double> angles;
    std::vector<double> phases;

    std::string describe() const {
        std::ostringstream out;
        out.precision(12);
        out << "m=" << split_rank << " spectrum=(";
        for (std::size_t i = 0; i < spectrum.size(); ++i) out << (i ? "," : "") << spectrum[i];
        out << ") theta=(";
        for (std::size_t i = 0; i < angles.size(); ++i) out << (i ? "," : "") << angles[i];
        out << ") phi=(";
        for (std::size_t i = 0; i < phases.size(); ++i) out << (i ? "," : "") << phases[i];
        out << ")";
        return out.str();
    }
};

/// Builds the pair from its generator record.
inline OrthogonalPair make_orthogonal_pair(int split_rank, std::vector<double> spectrum, std::vector<double> angles,
                                           std::vector<double> phases) {
    const int n = static_cast<int>(spectrum.size());
    if (split_rank < 1 || split_rank >= n) throw std::invalid_argument("orthogonal pair: split rank must lie in [1, N-1]");
    Eigen::MatrixXcd u;
    if (n == 2) {
        if (angles.size() != 1 || phases.size() != 2) throw std::invalid_argument("orthogonal pair: SU(2) needs 1 angle, 2 phases");
        u = su2_unitary(angles[0], phases[0], phases[1]);
    } else if (n == 3) {
        if (angles.size() != 3 || phases.size() != 5) throw std::invalid_argument("orthogonal pair: SU(3) needs 3 angles, 5 phases");
        u = su3_unitary({angles[0], angles[1], angles[2]}, {phases[0], phases[1], phases[2], phases[3], phases[4]});
    } else {
        throw std::invalid_argument("orthogonal pair: only N = 2, 3 supported");
    }
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n), b = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) (i < split_rank ? a : b)(i, i) = spectrum[static_cast<std::size_t>(i)];
    Eigen::MatrixXcd ra = u * a * u.adjoint(), rb = u * b * u.adjoint();
    ra = (0.5 * (ra + ra.adjoint())).eval();
    rb = (0.5 * (rb + rb.adjoint())).eval();
    return {DensityMatrix(std::move(ra)), DensityMatrix(std::move(rb)), split_rank, std::move(spectrum), std::move(angles), std::move(phases)};
}

/// Wraps two explicitly given states; their supports must be orthogonal.
inline OrthogonalPair designated_pair(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("designated_pair: dimension mismatch");
    if (std::abs((a.matrix() * b.matrix()).trace()) > 1e-10) throw std::invalid_argument("designated_pair: supports are not orthogonal");
    return {a, b, 0, {}, {}, {}};
}

namespace detail {
/// Uniform point on the (k-1)-simplex via sorted uniform spacings.
template <typename Rng>
std::vector<double> simplex_point(int k, Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> cuts{0.0, 1.0};
    for (int i = 0; i < k - 1; ++i) cuts.push_back(unit(rng));
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> out;
    for (int i = 0; i < k; ++i) out.push_back(cuts[static_cast<std::size_t>(i + 1)] - cuts[static_cast<std::size_t>(i)]);
    return out;
}
}  // namespace detail

template <typename Rng>
OrthogonalPair sample_orthogonal_pair(int n, Rng& rng) {
    if (n != 2 && n != 3) throw std::invalid_argument("sample_orthogonal_pair: N must be 2 or 3");
    std::uniform_int_distribution<int> rank(1, n - 1);
    const int m = rank(rng);
    std::vector<double> spectrum = detail::simplex_point(m, rng);
    for (double v : detail::simplex_point(n - m, rng)) spectrum.push_back(v);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    const int n_angles = n == 2 ? 1 : 3;
    const int n_phases = n == 2 ? 2 : 5;
    std::vector<double> angles, phases;
    for (int i = 0; i < n_angles; ++i) angles.push_back(angle(rng));
    for (int i = 0; i < n_phases; ++i) phases.push_back(phase(rng));
    return make_orthogonal_pair(m, std::move(spectrum), std::move(angles), std::move(phases));
}

/// Generator for pair number `index` of a run seeded with `seed`; independent
/// of evaluation order.
inline std::mt19937_64 pair_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return std::mt19937_64(seq);
}

struct TraceDistanceTrajectory {
    std::vector<double> times;
    std::vector<double> values;
    OrthogonalPair pair;
};

/// Sum of positive increments of D over consecutive output points.
inline double sigma_integral(std::span<const double> d) {
    if (d.empty()) throw std::invalid_argument("sigma_integral: empty trajectory");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < d.size(); ++k) total += std::max(0.0, d[k + 1] - d[k]);
    return total;
}

inline double sigma_integral(const TraceDistanceTrajectory& traj) { return sigma_integral(traj.values); }

inline TraceDistanceTrajectory trace_distance_trajectory(const DynamicalMap& map, const OrthogonalPair& pair) {
    if (pair.rho_a.dim() != map.n_sites()) throw std::invalid_argument("trace_distance_trajectory: dimension mismatch");
    const Eigen::MatrixXcd diff = pair.rho_a.matrix() - pair.rho_b.matrix();
    TraceDistanceTrajectory out{map.times(), {}, pair};
    out.values.reserve(out.times.size());
    for (std::size_t t = 0; t < out.times.size(); ++t) {
        const double d = half_trace_norm(map.apply(diff, t));
        if (!(d <= 1.0 + 1e-9))
            throw DivergenceError("trace distance " + std::to_string(d) + " exceeds 1 at t = " + std::to_string(out.times[t]) +
                                  " fs for pair " + pair.describe());
        out.values.push_back(d);
    }
    return out;
}

/// D(t) by propagating both members separately; independent of DynamicalMap.
inline TraceDistanceTrajectory trace_distance_trajectory(const SiteHamiltonian& h, const BathSpec& bath, const TimeGrid& grid,
                                                         int depth, const OrthogonalPair& pair) {
    const Trajectory a = heom_propagate(h, bath, pair.rho_a, grid, depth);
    const Trajectory b = heom_propagate(h, bath, pair.rho_b, grid, depth);
    TraceDistanceTrajectory out{a.times, {}, pair};
    for (std::size_t t = 0; t < a.size(); ++t) out.values.push_back(trace_distance(a.states[t], b.states[t]));
    return out;
}

struct NonMarkovianityEstimate {
    double value = 0.0;
    long sample_size = 0;
    std::uint64_t seed = 0;
    long best_index = -1;
    OrthogonalPair best_pair;
    std::vector<double> integrals;  // per pair, kept when requested
    int depth = 0;
    bool depth_converged = false;
};

struct BlpOptions {
    int depth = 0;  // 0: convergence harness, falling back to convergence.max_depth
    ConvergenceOptions convergence;
    int workers = 1;
    bool keep_integrals = false;
};

/// Hierarchy depth for a BLP run: the harness's settled depth for |1><1|, or
/// max_depth (flagged unconverged) when the harness gives up.
inline std::pair<int, bool> blp_depth(const SiteHamiltonian& h, const BathSpec& bath, const TimeGrid& grid, const BlpOptions& opts) {
    if (opts.depth > 0) return {opts.depth, false};
    try {
        return {convergence_report(h, bath, DensityMatrix::site_projector(h.n_sites(), 1), grid, opts.convergence).depth, true};
    } catch (const ConvergenceError&) {
        return {opts.convergence.max_depth, false};
    }
}

/// Maximum sigma integral over `sample_size` sampled orthogonal pairs.
inline NonMarkovianityEstimate blp_estimate(const DynamicalMap& map, long sample_size, std::uint64_t seed,
                                            const BlpOptions& opts = {}) {
    if (sample_size < 1) throw std::invalid_argument("blp_estimate: sample size must be at least 1");
    const int n = map.n_sites();
    std::vector<double> integrals(static_cast<std::size_t>(sample_size));
    parallel_for(static_cast<std::size_t>(sample_size), opts.workers, [&](std::size_t i) {
        auto rng = pair_rng(seed, i);
        const OrthogonalPair pair = sample_orthogonal_pair(n, rng);
        integrals[i] = sigma_integral(trace_distance_trajectory(map, pair));
    });
    // first index wins ties so nested samples keep their best pair
    const auto best = std::max_element(integrals.begin(), integrals.end());
    NonMarkovianityEstimate est;
    est.value = *best;
    est.sample_size = sample_size;
    est.seed = seed;
    est.best_index = static_cast<long>(best - integrals.begin());
    auto rng = pair_rng(seed, static_cast<std::uint64_t>(est.best_index));
    est.best_pair = sample_orthogonal_pair(n, rng);
    if (opts.keep_integrals) est.integrals = std::move(integrals);
    return est;
}

inline NonMarkovianityEstimate blp_estimate(const SiteHamiltonian& h, const BathSpec& bath, const TimeGrid& grid,
                                            long sample_size, std::uint64_t seed, const BlpOptions& opts = {}) {
    const auto [depth, converged] = blp_depth(h, bath, grid, opts);
    const DynamicalMap map(h, bath, grid, depth);
    NonMarkovianityEstimate est = blp_estimate(map, sample_size, seed, opts);
    est.depth = depth;
    est.depth_converged = converged;
    return est;
}

}  // namespace heom
