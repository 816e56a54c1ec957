#pragma once

#include "heom/convergence.hpp"
#include "heom/measures.hpp"
#include "heom/parallel.hpp"
#include "heom/propagator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace heom {

/// Inclusive arithmetic range min, min + step, ..., max.
struct Range {
    double min = 0.0;
    double max = 0.0;
    double step = 1.0;

    std::size_t count() const {
        validate();
        return static_cast<std::size_t>(std::lround((max - min) / step)) + 1;
    }

    std::vector<double> values() const {
        std::vector<double> v;
        const std::size_t n = count();
        for (std::size_t i = 0; i < n; ++i) v.push_back(min + static_cast<double>(i) * step);
        return v;
    }

    void validate() const {
        if (max < min) throw std::invalid_argument("Range: max below min");
        if (!(step > 0.0)) throw std::invalid_argument("Range: step must be positive");
        const double k = (max - min) / step;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) throw std::invalid_argument("Range: step does not divide the range");
    }

    static Range single(double v) { return {v, v, 1.0}; }

    bool operator==(const Range&) const = default;
};

struct SweepGrid {
    Range lambda;       // cm^-1
    Range tau;          // fs
    Range temperature;  // K

    static SweepGrid dimer_default() { return {{20, 220, 10}, {50, 500, 25}, {250, 300, 2.5}}; }
    static SweepGrid trimer_default() { return {{20, 220, 20}, {50, 500, 50}, {250, 300, 5}}; }
    static SweepGrid default_for(int n_sites) { return n_sites <= 2 ? dimer_default() : trimer_default(); }

    /// Every other lambda and tau value, full temperature range.
    SweepGrid thinned() const {
        return {{lambda.min, lambda.max, lambda.step * 2}, {tau.min, tau.max, tau.step * 2}, temperature};
    }

    std::size_t size() const { return lambda.count() * tau.count() * temperature.count(); }

    void validate() const {
        lambda.validate();
        tau.validate();
        temperature.validate();
    }

    /// Grid points ordered lambda-major, then tau, then temperature.
    std::vector<BathSpec> points() const {
        std::vector<BathSpec> out;
        for (double l : lambda.values())
            for (double t : tau.values())
                for (double temp : temperature.values()) out.emplace_back(l, t, temp);
        return out;
    }

    bool operator==(const SweepGrid&) const = default;
};

struct SweepRecord {
    BathSpec bath;
    double best_time = 0.0;
    double best_fidelity = 0.0;
    std::vector<double> fidelity;  // per output time; may be dropped to save memory
    int depth = 0;
};

struct SweepFailure {
    BathSpec bath;
    std::string message;
};

struct SweepResult {
    std::vector<SweepRecord> records;  // grid order, failed points omitted
    std::vector<SweepFailure> failures;
    std::size_t expected = 0;
    int depth = 0;

    bool complete() const { return failures.empty() && records.size() == expected; }
};

enum class OptimumMode { max, min };

struct OptimumRecord {
    OptimumMode mode = OptimumMode::max;
    double fidelity = 0.0;
    double lambda = 0.0;
    double tau = 0.0;
    double temperature = 0.0;
    double time = 0.0;
    std::optional<double> nonmarkovianity;
    double f_cs_max = 0.0;
    double f_eq = 0.0;
};

/// Earliest output time of the maximal fidelity.
inline std::pair<double, double> peak_of(std::span<const double> times, std::span<const double> fidelity) {
    if (times.empty() || times.size() != fidelity.size()) throw std::invalid_argument("peak_of: bad series");
    std::size_t best = 0;
    for (std::size_t i = 1; i < fidelity.size(); ++i)
        if (fidelity[i] > fidelity[best]) best = i;
    return {times[best], fidelity[best]};
}

inline SweepRecord make_record(const Trajectory& traj, bool keep_series = true) {
    auto f = traj.fidelity_series();
    const auto [t, fmax] = peak_of(traj.times, f);
    SweepRecord r{*traj.bath, t, fmax, {}, traj.depth};
    if (keep_series) r.fidelity = std::move(f);
    return r;
}

struct CornerConvergence {
    BathSpec bath;
    std::optional<ConvergenceReport> report;
    std::string error;
};

/// Runs the convergence harness at the four (lambda, tau) corners at the
/// highest grid temperature. The depth is the largest settled depth; an
/// unconverged corner forces max_depth.
inline int corner_depth(const SiteHamiltonian& h, const SweepGrid& grid, const TimeGrid& time, const ConvergenceOptions& copts,
                        std::vector<CornerConvergence>* corners = nullptr, int workers = 1) {
    const std::vector<BathSpec> baths = {{grid.lambda.min, grid.tau.min, grid.temperature.max},
                                         {grid.lambda.min, grid.tau.max, grid.temperature.max},
                                         {grid.lambda.max, grid.tau.min, grid.temperature.max},
                                         {grid.lambda.max, grid.tau.max, grid.temperature.max}};
    std::vector<CornerConvergence> results(baths.size(), CornerConvergence{baths[0], std::nullopt, {}});
    const DensityMatrix rho0 = DensityMatrix::site_projector(h.n_sites(), 1);
    parallel_for(baths.size(), workers, [&](std::size_t i) {
        results[i].bath = baths[i];
        try {
            results[i].report = convergence_report(h, baths[i], rho0, time, copts);
        } catch (const ConvergenceError& e) {
            results[i].error = e.what();
        }
    });
    int depth = 1;
    for (const auto& c : results) depth = std::max(depth, c.report ? c.report->depth : copts.max_depth);
    if (corners) *corners = std::move(results);
    return depth;
}

struct SweepOptions {
    int depth = 0;  // 0: corner convergence policy
    ConvergenceOptions convergence;
    int workers = 1;
    bool keep_series = true;
    /// Points already computed (e.g. resumed runs) are skipped and merged.
    std::vector<SweepRecord> resume;
    std::function<void(std::size_t done, std::size_t total)> progress;
    /// Called with every freshly propagated trajectory, possibly concurrently.
    std::function<void(const Trajectory&)> on_trajectory;
};

/// Propagates |1><1| at every grid point and reduces each run to its peak.
inline SweepResult run_sweep(const SiteHamiltonian& h, const SweepGrid& grid, const TimeGrid& time, const SweepOptions& opts = {}) {
    grid.validate();
    time.validate();
    SweepResult result;
    result.depth = opts.depth > 0 ? opts.depth : corner_depth(h, grid, time, opts.convergence, nullptr, opts.workers);
    const auto points = grid.points();
    result.expected = points.size();

    std::map<std::tuple<double, double, double>, const SweepRecord*> done;
    for (const auto& r : opts.resume) done[{r.bath.lambda, r.bath.tau, r.bath.temperature}] = &r;

    const DensityMatrix rho0 = DensityMatrix::site_projector(h.n_sites(), 1);
    std::vector<std::optional<SweepRecord>> slots(points.size());
    std::vector<std::string> errors(points.size());
    std::atomic<std::size_t> finished{0};
    parallel_for(points.size(), opts.workers, [&](std::size_t i) {
        const BathSpec& b = points[i];
        if (auto it = done.find({b.lambda, b.tau, b.temperature}); it != done.end()) {
            slots[i] = *it->second;
        } else {
            try {
                const Trajectory traj = heom_propagate(h, b, rho0, time, result.depth);
                if (opts.on_trajectory) opts.on_trajectory(traj);
                slots[i] = make_record(traj, opts.keep_series);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
        const std::size_t n = ++finished;
        if (opts.progress) opts.progress(n, points.size());
    });
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (slots[i]) result.records.push_back(std::move(*slots[i]));
        else result.failures.push_back({points[i], errors[i]});
    }
    return result;
}

/// Global maximum (or minimum) of the time-maximized fidelity. Exact ties
/// go to the smallest (lambda, tau, T, t).
inline OptimumRecord extract_optimum(std::span<const SweepRecord> records, OptimumMode mode) {
    if (records.empty()) throw std::invalid_argument("extract_optimum: no records");
    auto key = [](const SweepRecord& r) { return std::make_tuple(r.bath.lambda, r.bath.tau, r.bath.temperature, r.best_time); };
    const SweepRecord* best = &records[0];
    for (const auto& r : records) {
        const bool better = mode == OptimumMode::max ? r.best_fidelity > best->best_fidelity : r.best_fidelity < best->best_fidelity;
        if (better || (r.best_fidelity == best->best_fidelity && key(r) < key(*best))) best = &r;
    }
    OptimumRecord o;
    o.mode = mode;
    o.fidelity = best->best_fidelity;
    o.lambda = best->bath.lambda;
    o.tau = best->bath.tau;
    o.temperature = best->bath.temperature;
    o.time = best->best_time;
    return o;
}

inline OptimumRecord extract_optimum(const SweepResult& result, OptimumMode mode) {
    if (!result.complete()) throw std::invalid_argument("extract_optimum: sweep is incomplete");
    return extract_optimum(result.records, mode);
}

struct ReferenceEfficiencies {
    double f_cs_max = 0.0;
    double f_eq = 0.0;
};

/// Closed-system peak fidelity from |1><1| and the Boltzmann fidelity at T.
inline ReferenceEfficiencies closed_and_equilibrium_refs(const SiteHamiltonian& h, double temperature_k, const TimeGrid& time) {
    const int n = h.n_sites();
    const Trajectory cs = closed_system_propagate(h, DensityMatrix::site_projector(n, 1), time);
    const auto f = cs.fidelity_series();
    return {*std::max_element(f.begin(), f.end()), fidelity(boltzmann_equilibrium(h, temperature_k), n)};
}

/// Attaches the closed-system and equilibrium references at the optimum's temperature.
inline OptimumRecord with_references(OptimumRecord o, const SiteHamiltonian& h, const TimeGrid& time) {
    const auto refs = closed_and_equilibrium_refs(h, o.temperature, time);
    o.f_cs_max = refs.f_cs_max;
    o.f_eq = refs.f_eq;
    return o;
}

/// max over T of best_fidelity for every (lambda, tau).
inline std::map<std::pair<double, double>, double> fidelity_surface(std::span<const SweepRecord> records) {
    std::map<std::pair<double, double>, double> s;
    for (const auto& r : records) {
        auto [it, inserted] = s.try_emplace({r.bath.lambda, r.bath.tau}, r.best_fidelity);
        if (!inserted) it->second = std::max(it->second, r.best_fidelity);
    }
    return s;
}

}  // namespace heom
