#pragma once

namespace heom {

/// Physical constants in the cm^-1 / fs / K unit system used throughout.
struct UnitConstants {
    static constexpr double hbar = 5308.8;           // cm^-1 * fs
    static constexpr double k_boltzmann = 0.695035;  // cm^-1 / K
};

/// Thermal time hbar / (k_B T) in fs.
constexpr double thermal_time(double temperature_k) {
    return UnitConstants::hbar / (UnitConstants::k_boltzmann * temperature_k);
}

/// Inverse temperature beta = 1 / (k_B T) in cm.
constexpr double inverse_temperature(double temperature_k) {
    return 1.0 / (UnitConstants::k_boltzmann * temperature_k);
}

}  // namespace heom
