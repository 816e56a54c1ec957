#pragma once

#include "heom/bath.hpp"
#include "heom/density_matrix.hpp"
#include "heom/hamiltonian.hpp"
#include "heom/hierarchy.hpp"
#include "heom/measures.hpp"
#include "heom/time_grid.hpp"
#include "heom/units.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace heom {

struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MemoryBoundError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Reduced density matrices at output instants, plus what produced them.
struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;

    SiteHamiltonian hamiltonian;
    std::optional<BathSpec> bath;  // empty for closed-system evolution
    TimeGrid grid;
    int depth = 0;

    std::size_t size() const { return times.size(); }

    std::vector<double> fidelity_series(int target_site) const {
        std::vector<double> f;
        f.reserve(states.size());
        for (const auto& s : states) f.push_back(fidelity(s, target_site));
        return f;
    }

    std::vector<double> fidelity_series() const { return fidelity_series(hamiltonian.n_sites()); }
};

/// Upper bound on hierarchy storage (all RK4 work buffers included).
inline constexpr std::size_t kMaxHierarchyBytes = std::size_t{2} << 30;

/// High-temperature Drude-Lorentz hierarchy with simple truncation:
///
///   d/dt r_n = -(i/hbar)[H, r_n] - gamma |n| r_n
///              + sum_j i[V_j, r_{n+e_j}]
///              + sum_j n_j ( i (2 lambda k_B T / hbar^2) [V_j, r_{n-e_j}]
///                            + (lambda gamma / hbar) {V_j, r_{n-e_j}} )
///
/// with V_j = |j><j|. Auxiliaries are unscaled; couplings to indices beyond
/// the depth are dropped. Time in fs, energies in cm^-1.
class HeomSolver {
public:
    HeomSolver(const SiteHamiltonian& h, const BathSpec& bath, int depth)
        : n_(h.n_sites()), dim2_(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_)),
          index_(checked_index(h.n_sites(), depth)) {
        const Eigen::MatrixXd hm = h.matrix();
        h_.assign(dim2_, 0.0);
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) h_[static_cast<std::size_t>(a * n_ + b)] = hm(a, b) / UnitConstants::hbar;

        const double kt = UnitConstants::k_boltzmann * bath.temperature;
        const double hb = UnitConstants::hbar;
        gamma_ = bath.gamma();
        c_re_ = 2.0 * bath.lambda * kt / (hb * hb);
        c_im_ = bath.lambda * gamma_ / hb;

        const int k_count = index_.size();
        couplings_.resize(static_cast<std::size_t>(k_count));
        damping_.resize(static_cast<std::size_t>(k_count));
        for (int k = 0; k < k_count; ++k) {
            damping_[static_cast<std::size_t>(k)] = gamma_ * index_.level(k);
            for (int j = 0; j < n_; ++j) {
                const int nj = index_[k][static_cast<std::size_t>(j)];
                if (int p = index_.raise(k, j); p != HierarchyIndexSet::kNone)
                    couplings_[static_cast<std::size_t>(k)].push_back({p, j, true, 1.0});
                if (int m = index_.lower(k, j); m != HierarchyIndexSet::kNone)
                    couplings_[static_cast<std::size_t>(k)].push_back({m, j, false, static_cast<double>(nj)});
            }
        }
    }

    const HierarchyIndexSet& index_set() const { return index_; }
    int n_sites() const { return n_; }
    std::size_t state_size() const { return dim2_ * static_cast<std::size_t>(index_.size()); }

    /// Time derivative of the full hierarchy (flattened row-major ADOs).
    void rhs(std::span<const cplx> in, std::span<cplx> out) const {
        switch (n_) {
            case 2: rhs_impl<2>(in, out); break;
            case 3: rhs_impl<3>(in, out); break;
            default: rhs_impl<0>(in, out); break;
        }
    }

    /// Integrate from a physical initial operator (auxiliaries zero) and
    /// return r_0 at every output step. The initial operator need not be a
    /// state; the map is linear.
    std::vector<Eigen::MatrixXcd> evolve(const Eigen::MatrixXcd& rho0, const TimeGrid& grid) const {
        grid.validate();
        if (rho0.rows() != n_ || rho0.cols() != n_) throw std::invalid_argument("HeomSolver: initial state dimension mismatch");
        std::vector<cplx> y(state_size(), cplx{}), k1(y), k2(y), k3(y), k4(y), tmp(y);
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) y[static_cast<std::size_t>(a * n_ + b)] = rho0(a, b);

        std::vector<Eigen::MatrixXcd> out;
        const long steps = grid.steps();
        const double dt = grid.dt;
        const std::size_t size = y.size();
        auto record = [&](long step) {
            double peak = 0.0;
            for (const auto& v : y) peak = std::max(peak, std::max(std::abs(v.real()), std::abs(v.imag())));
            if (!(peak <= kDivergenceBound))
                throw DivergenceError("HEOM integration diverged at t = " + std::to_string(grid.time_at_step(step)) +
                                      " fs (max auxiliary entry " + std::to_string(peak) + ")");
            Eigen::MatrixXcd m(n_, n_);
            for (int a = 0; a < n_; ++a)
                for (int b = 0; b < n_; ++b) m(a, b) = y[static_cast<std::size_t>(a * n_ + b)];
            out.push_back(std::move(m));
        };
        record(0);
        for (long step = 1; step <= steps; ++step) {
            rhs(y, k1);
            for (std::size_t i = 0; i < size; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
            rhs(tmp, k2);
            for (std::size_t i = 0; i < size; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
            rhs(tmp, k3);
            for (std::size_t i = 0; i < size; ++i) tmp[i] = y[i] + dt * k3[i];
            rhs(tmp, k4);
            for (std::size_t i = 0; i < size; ++i) y[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            if (grid.is_output_step(step)) record(step);
        }
        return out;
    }

    static constexpr double kDivergenceBound = 1e6;

private:
    struct Link {
        int target;
        int site;
        bool raising;
        double factor;
    };

    static HierarchyIndexSet checked_index(int n_sites, int depth) {
        if (depth < 1) throw std::invalid_argument("HEOM depth must be at least 1");
        const std::uint64_t count = HierarchyIndexSet::count(n_sites, depth);
        const std::uint64_t bytes = count * static_cast<std::uint64_t>(n_sites * n_sites) * sizeof(cplx) * 6;
        if (bytes > kMaxHierarchyBytes)
            throw MemoryBoundError("HEOM depth " + std::to_string(depth) + " needs " + std::to_string(count) +
                                   " auxiliary operators, exceeding the memory bound");
        return HierarchyIndexSet(n_sites, depth);
    }

    template <int Fixed>
    void rhs_impl(std::span<const cplx> in, std::span<cplx> out) const {
        const int n = Fixed > 0 ? Fixed : n_;
        const std::size_t d2 = static_cast<std::size_t>(n * n);
        const cplx minus_i{0.0, -1.0};
        const cplx plus_i{0.0, 1.0};
        const int k_count = index_.size();
        for (int k = 0; k < k_count; ++k) {
            const cplx* r = in.data() + static_cast<std::size_t>(k) * d2;
            cplx* o = out.data() + static_cast<std::size_t>(k) * d2;
            const double damp = damping_[static_cast<std::size_t>(k)];
            // -(i/hbar)[H, r] - gamma |n| r
            for (int a = 0; a < n; ++a) {
                for (int b = 0; b < n; ++b) {
                    cplx comm{};
                    for (int c = 0; c < n; ++c)
                        comm += h_[static_cast<std::size_t>(a * n + c)] * r[c * n + b] - r[a * n + c] * h_[static_cast<std::size_t>(c * n + b)];
                    o[a * n + b] = minus_i * comm - damp * r[a * n + b];
                }
            }
            for (const Link& link : couplings_[static_cast<std::size_t>(k)]) {
                const cplx* q = in.data() + static_cast<std::size_t>(link.target) * d2;
                const int j = link.site;
                // [V_j, q]_{ab} = (d_aj - d_bj) q_ab ; {V_j, q}_{ab} = (d_aj + d_bj) q_ab
                if (link.raising) {
                    const cplx f = plus_i * link.factor;
                    for (int b = 0; b < n; ++b)
                        if (b != j) o[j * n + b] += f * q[j * n + b];
                    for (int a = 0; a < n; ++a)
                        if (a != j) o[a * n + j] -= f * q[a * n + j];
                } else {
                    const cplx comm_f = plus_i * (c_re_ * link.factor);
                    const double anti_f = c_im_ * link.factor;
                    for (int b = 0; b < n; ++b)
                        if (b != j) o[j * n + b] += (comm_f + anti_f) * q[j * n + b];
                    for (int a = 0; a < n; ++a)
                        if (a != j) o[a * n + j] += (anti_f - comm_f) * q[a * n + j];
                    o[j * n + j] += 2.0 * anti_f * q[j * n + j];
                }
            }
        }
    }

    int n_;
    std::size_t dim2_;
    HierarchyIndexSet index_;
    std::vector<double> h_;
    double gamma_ = 0.0;
    double c_re_ = 0.0;
    double c_im_ = 0.0;
    std::vector<double> damping_;
    std::vector<std::vector<Link>> couplings_;
};

/// Open-system evolution of the reduced density matrix.
inline Trajectory heom_propagate(const SiteHamiltonian& h, const BathSpec& bath, const DensityMatrix& rho0,
                                 const TimeGrid& grid, int depth) {
    if (!bath.high_temperature_valid())
        throw std::invalid_argument("heom_propagate: bath violates the high-temperature condition tau > hbar/(k_B T)");
    if (rho0.dim() != h.n_sites()) throw std::invalid_argument("heom_propagate: initial state dimension mismatch");
    rho0.validate();
    const HeomSolver solver(h, bath, depth);
    auto raw = solver.evolve(rho0.matrix(), grid);
    Trajectory traj{grid.output_times(), {}, h, bath, grid, depth};
    traj.states.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        try {
            traj.states.emplace_back(std::move(raw[i]));
        } catch (const std::invalid_argument& e) {
            throw DivergenceError("heom_propagate: unphysical state at t = " + std::to_string(traj.times[i]) + " fs: " + e.what());
        }
    }
    return traj;
}

/// rho(t) = exp(-iHt/hbar) rho0 exp(iHt/hbar) by exact diagonalization.
inline Trajectory closed_system_propagate(const SiteHamiltonian& h, const DensityMatrix& rho0, const TimeGrid& grid) {
    grid.validate();
    if (rho0.dim() != h.n_sites()) throw std::invalid_argument("closed_system_propagate: initial state dimension mismatch");
    rho0.validate();
    const ExcitonBasis basis = exciton_basis(h);
    const Eigen::MatrixXcd u = basis.eigenvectors.cast<cplx>();
    const Eigen::MatrixXcd rho_e = u.adjoint() * rho0.matrix() * u;
    Trajectory traj{grid.output_times(), {}, h, std::nullopt, grid, 0};
    traj.states.reserve(traj.times.size());
    const int n = h.n_sites();
    for (double t : traj.times) {
        Eigen::MatrixXcd evolved(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                evolved(a, b) = rho_e(a, b) * std::exp(cplx{0.0, -(basis.eigenvalues(a) - basis.eigenvalues(b)) * t / UnitConstants::hbar});
        Eigen::MatrixXcd site = u * evolved * u.adjoint();
        site = 0.5 * (site + site.adjoint()).eval();
        traj.states.emplace_back(std::move(site));
    }
    return traj;
}

/// Images of the site-basis matrix units |i><j| under the HEOM map at every
/// output instant. Any initial state evolves as the corresponding linear
/// combination, since auxiliaries start at zero.
class DynamicalMap {
public:
    DynamicalMap(const SiteHamiltonian& h, const BathSpec& bath, const TimeGrid& grid, int depth)
        : n_(h.n_sites()), times_(grid.output_times()) {
        if (!bath.high_temperature_valid())
            throw std::invalid_argument("DynamicalMap: bath violates the high-temperature condition");
        const HeomSolver solver(h, bath, depth);
        images_.assign(times_.size(), std::vector<Eigen::MatrixXcd>(static_cast<std::size_t>(n_ * n_)));
        for (int i = 0; i < n_; ++i) {
            for (int j = i; j < n_; ++j) {
                Eigen::MatrixXcd unit = Eigen::MatrixXcd::Zero(n_, n_);
                unit(i, j) = 1.0;
                auto series = solver.evolve(unit, grid);
                for (std::size_t t = 0; t < series.size(); ++t) {
                    images_[t][static_cast<std::size_t>(j * n_ + i)] = series[t].adjoint();
                    images_[t][static_cast<std::size_t>(i * n_ + j)] = std::move(series[t]);
                }
            }
        }
    }

    int n_sites() const { return n_; }
    const std::vector<double>& times() const { return times_; }

    /// Evolved operator at output index t.
    Eigen::MatrixXcd apply(const Eigen::MatrixXcd& x, std::size_t t) const {
        Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (x(i, j) != cplx{}) y += x(i, j) * images_[t][static_cast<std::size_t>(i * n_ + j)];
        return y;
    }

private:
    int n_;
    std::vector<double> times_;
    std::vector<std::vector<Eigen::MatrixXcd>> images_;
};

}  // namespace heom
