#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace heom {

using cplx = std::complex<double>;

struct Tolerances {
    static constexpr double hermiticity = 1e-10;
    static constexpr double trace = 1e-8;
    static constexpr double positivity = -1e-7;
};

/// Complex dim x dim density matrix. Construction checks hermiticity, unit
/// trace and positivity; use unchecked() for intermediate operators.
class DensityMatrix {
public:
    DensityMatrix() = default;

    explicit DensityMatrix(Eigen::MatrixXcd m) : m_(std::move(m)) { validate(); }

    static DensityMatrix unchecked(Eigen::MatrixXcd m) {
        DensityMatrix d;
        d.m_ = std::move(m);
        return d;
    }

    /// |site><site| for a 1-based site index.
    static DensityMatrix site_projector(int dim, int site) {
        if (site < 1 || site > dim) throw std::out_of_range("site_projector: site index out of range");
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
        m(site - 1, site - 1) = 1.0;
        return DensityMatrix(std::move(m));
    }

    static DensityMatrix pure(const Eigen::VectorXcd& psi) {
        const Eigen::VectorXcd v = psi / psi.norm();
        return DensityMatrix(v * v.adjoint());
    }

    static DensityMatrix maximally_mixed(int dim) {
        return DensityMatrix(Eigen::MatrixXcd::Identity(dim, dim) / static_cast<double>(dim));
    }

    int dim() const { return static_cast<int>(m_.rows()); }
    const Eigen::MatrixXcd& matrix() const { return m_; }
    cplx operator()(int i, int j) const { return m_(i, j); }
    cplx trace() const { return m_.trace(); }

    /// Populations in the site basis (real part of the diagonal).
    Eigen::VectorXd populations() const { return m_.diagonal().real(); }

    double hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

    double min_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m_ + m_.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    void validate() const {
        if (m_.rows() != m_.cols() || m_.rows() == 0) throw std::invalid_argument("DensityMatrix: matrix must be square and non-empty");
        if (!m_.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
        if (hermiticity_error() > Tolerances::hermiticity)
            throw std::invalid_argument("DensityMatrix: not Hermitian (error " + std::to_string(hermiticity_error()) + ")");
        if (std::abs(trace() - 1.0) > Tolerances::trace)
            throw std::invalid_argument("DensityMatrix: trace deviates from 1 by " + std::to_string(std::abs(trace() - 1.0)));
        if (const double e = min_eigenvalue(); e < Tolerances::positivity)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue " + std::to_string(e));
    }

private:
    Eigen::MatrixXcd m_;
};

}  // namespace heom
