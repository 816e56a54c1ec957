#pragma once

#include "heom/density_matrix.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace heom {

namespace detail {
inline void check_angle(double a) {
    if (!(a >= 0.0 && a <= std::numbers::pi / 2)) throw std::out_of_range("SU(N) angle outside [0, pi/2]");
}
inline void check_phase(double p) {
    if (!(p >= 0.0 && p <= 2.0 * std::numbers::pi)) throw std::out_of_range("SU(N) phase outside [0, 2 pi]");
}
inline cplx phase(double p) { return std::polar(1.0, p); }
}  // namespace detail

/// [[cos t e^{i p1}, -sin t e^{-i p2}], [sin t e^{i p2}, cos t e^{-i p1}]]
inline Eigen::Matrix2cd su2_unitary(double theta, double phi1, double phi2) {
    detail::check_angle(theta);
    detail::check_phase(phi1);
    detail::check_phase(phi2);
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2cd u;
    u << c * detail::phase(phi1), -s * detail::phase(-phi2),
         s * detail::phase(phi2), c * detail::phase(-phi1);
    return u;
}

/// Bronzan's Euler-angle-like parametrization of SU(3) by three angles in
/// [0, pi/2] and five phases in [0, 2 pi].
inline Eigen::Matrix3cd su3_unitary(const std::array<double, 3>& theta, const std::array<double, 5>& phi) {
    for (double t : theta) detail::check_angle(t);
    for (double p : phi) detail::check_phase(p);
    const double c1 = std::cos(theta[0]), s1 = std::sin(theta[0]);
    const double c2 = std::cos(theta[1]), s2 = std::sin(theta[1]);
    const double c3 = std::cos(theta[2]), s3 = std::sin(theta[2]);
    const auto [p1, p2, p3, p4, p5] = phi;
    using detail::phase;
    Eigen::Matrix3cd u;
    u(0, 0) = c1 * c2 * phase(p1);
    u(0, 1) = s1 * phase(p3);
    u(0, 2) = c1 * s2 * phase(p4);
    u(1, 0) = s2 * s3 * phase(-p4 - p5) - s1 * c2 * c3 * phase(p1 + p2 - p3);
    u(1, 1) = c1 * c3 * phase(p2);
    u(1, 2) = -c2 * s3 * phase(-p1 - p5) - s1 * s2 * c3 * phase(p2 - p3 + p4);
    u(2, 0) = -s1 * c2 * s3 * phase(p1 - p3 + p5) - s2 * c3 * phase(-p2 - p4);
    u(2, 1) = c1 * s3 * phase(p5);
    u(2, 2) = c2 * c3 * phase(-p1 - p2) - s1 * s2 * s3 * phase(-p3 + p4 + p5);
    return u;
}

}  // namespace heom
