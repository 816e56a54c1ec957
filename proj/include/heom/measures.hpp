#pragma once

#include "heom/density_matrix.hpp"
#include "heom/hamiltonian.hpp"
#include "heom/units.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace heom {

/// Eigenbasis of the system Hamiltonian. Columns of eigenvectors are the
/// excitons in ascending energy order; each column is sign-fixed so that its
/// largest-magnitude component (first one on ties) is positive.
struct ExcitonBasis {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    int dim() const { return static_cast<int>(eigenvalues.size()); }
};

inline ExcitonBasis exciton_basis(const SiteHamiltonian& h) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.matrix());
    ExcitonBasis basis{es.eigenvalues(), es.eigenvectors()};
    for (Eigen::Index c = 0; c < basis.eigenvectors.cols(); ++c) {
        auto col = basis.eigenvectors.col(c);
        const double peak = col.cwiseAbs().maxCoeff();
        for (Eigen::Index r = 0; r < col.size(); ++r) {
            if (std::abs(col(r)) >= peak - 1e-12) {
                if (col(r) < 0) col = -col;
                break;
            }
        }
    }
    return basis;
}

/// sqrt(<target|rho|target>) for a pure target site state (1-based index).
inline double fidelity(const DensityMatrix& rho, int target_site) {
    if (target_site < 1 || target_site > rho.dim()) throw std::out_of_range("fidelity: target site out of range");
    if (std::abs(rho.trace() - 1.0) > Tolerances::trace) throw std::invalid_argument("fidelity: state is not trace normalized");
    return std::sqrt(std::max(0.0, rho(target_site - 1, target_site - 1).real()));
}

/// Half the trace norm of a Hermitian operator.
inline double half_trace_norm(const Eigen::MatrixXcd& x) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (x + x.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const Eigen::MatrixXcd& rho1, const Eigen::MatrixXcd& rho2) {
    if (rho1.rows() != rho2.rows() || rho1.cols() != rho2.cols())
        throw std::invalid_argument("trace_distance: dimension mismatch");
    return half_trace_norm(rho1 - rho2);
}

inline double trace_distance(const DensityMatrix& rho1, const DensityMatrix& rho2) {
    return trace_distance(rho1.matrix(), rho2.matrix());
}

namespace detail {
inline double offdiagonal_l1(const Eigen::MatrixXcd& m) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = i + 1; j < m.cols(); ++j) sum += std::abs(m(i, j));
    return 2.0 * sum;
}
}  // namespace detail

/// l1-norm of coherence in the site basis.
inline double l1_coherence(const DensityMatrix& rho) { return detail::offdiagonal_l1(rho.matrix()); }

/// l1-norm of coherence in the exciton basis.
inline double l1_coherence(const DensityMatrix& rho, const ExcitonBasis& basis) {
    if (basis.dim() != rho.dim()) throw std::invalid_argument("l1_coherence: basis dimension mismatch");
    const Eigen::MatrixXcd u = basis.eigenvectors.cast<cplx>();
    return detail::offdiagonal_l1(u.adjoint() * rho.matrix() * u);
}

/// 2|rho_ij| between 1-based sites i != j.
inline double local_coherence(const DensityMatrix& rho, int i, int j) {
    if (i == j) throw std::invalid_argument("local_coherence: sites must differ");
    if (i < 1 || j < 1 || i > rho.dim() || j > rho.dim()) throw std::out_of_range("local_coherence: site index out of range");
    return 2.0 * std::abs(rho(i - 1, j - 1));
}

/// exp(-H / k_B T) / Z of the bare system Hamiltonian.
inline DensityMatrix boltzmann_equilibrium(const SiteHamiltonian& h, double temperature_k) {
    if (!(temperature_k > 0.0)) throw std::invalid_argument("boltzmann_equilibrium: temperature must be positive");
    const ExcitonBasis basis = exciton_basis(h);
    const double beta = inverse_temperature(temperature_k);
    const double e0 = basis.eigenvalues.minCoeff();
    Eigen::VectorXd w = (-(basis.eigenvalues.array() - e0) * beta).exp();
    w /= w.sum();
    const Eigen::MatrixXd rho = basis.eigenvectors * w.asDiagonal() * basis.eigenvectors.transpose();
    return DensityMatrix(rho.cast<cplx>());
}

}  // namespace heom
