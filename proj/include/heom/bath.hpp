#pragma once

#include "heom/units.hpp"

#include <stdexcept>

namespace heom {

/// Drude-Lorentz bath attached identically to every site.
struct BathSpec {
    double lambda;       // reorganization energy, cm^-1
    double tau;          // correlation time 1/gamma, fs
    double temperature;  // K

    BathSpec(double lambda_cm1, double tau_fs, double temperature_k)
        : lambda(lambda_cm1), tau(tau_fs), temperature(temperature_k) {
        if (!(lambda > 0.0)) throw std::invalid_argument("BathSpec: lambda must be positive");
        if (!(tau > 0.0)) throw std::invalid_argument("BathSpec: tau must be positive");
        if (!(temperature > 0.0)) throw std::invalid_argument("BathSpec: temperature must be positive");
    }

    double gamma() const { return 1.0 / tau; }
    double beta() const { return inverse_temperature(temperature); }

    /// The hierarchy closes without Matsubara terms only when tau exceeds
    /// the thermal time hbar / k_B T.
    bool high_temperature_valid() const { return tau > thermal_time(temperature); }

    bool operator==(const BathSpec&) const = default;
};

}  // namespace heom
