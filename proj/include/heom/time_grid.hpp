#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace heom {

/// Fixed-step integration grid; states are reported every output_stride steps.
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 1000.0;
    double dt = 0.5;
    int output_stride = 5;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("TimeGrid: dt must be positive");
        if (t_end < t_start) throw std::invalid_argument("TimeGrid: t_end precedes t_start");
        if (output_stride < 1) throw std::invalid_argument("TimeGrid: output_stride must be at least 1");
        const double steps = (t_end - t_start) / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * std::max(1.0, steps))
            throw std::invalid_argument("TimeGrid: (t_end - t_start) is not a multiple of dt");
    }

    long steps() const { return std::lround((t_end - t_start) / dt); }

    double time_at_step(long step) const { return t_start + static_cast<double>(step) * dt; }

    bool is_output_step(long step) const { return step % output_stride == 0 || step == steps(); }

    std::vector<double> output_times() const {
        std::vector<double> t;
        for (long s = 0; s <= steps(); ++s)
            if (is_output_step(s)) t.push_back(time_at_step(s));
        return t;
    }

    /// Same output instants with half the integration step.
    TimeGrid refined() const { return {t_start, t_end, dt / 2.0, output_stride * 2}; }

    bool operator==(const TimeGrid&) const = default;
};

}  // namespace heom
