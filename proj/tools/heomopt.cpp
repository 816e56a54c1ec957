// heomopt: HEOM excitation-energy-transfer solver, parameter sweeps and
// non-Markovianity estimates for 2- and 3-site aggregates.

#include "heom/blp.hpp"
#include "heom/config.hpp"
#include "heom/convergence.hpp"
#include "heom/csv.hpp"
#include "heom/propagator.hpp"
#include "heom/sweep.hpp"
#include "heom/sweep_io.hpp"
#include "heom/trajectory_io.hpp"
#include "heom/version.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace heom;

namespace {

struct Flags {
    std::string config_path;
    std::optional<std::string> system;
    std::optional<double> lambda, tau, temp, dt, t_end;
    std::optional<int> depth, workers;
    std::optional<long> samples;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> lambda_range, tau_range, temp_range;
    bool auto_converge = false;
    bool closed = false;
    bool reduced = false;
    bool trajectories = false;
    bool resume = false;
    bool dump_d = false;
};

Range parse_range(const std::string& s, const std::string& flag) {
    auto a = s.find(':'), b = s.rfind(':');
    if (a == std::string::npos || a == b) throw ConfigError(flag + ": expected min:max:step");
    try {
        return {csv::parse_number(s.substr(0, a)), csv::parse_number(s.substr(a + 1, b - a - 1)), csv::parse_number(s.substr(b + 1))};
    } catch (const std::invalid_argument&) {
        throw ConfigError(flag + ": expected min:max:step");
    }
}

fs::path output_root() {
    if (const char* env = std::getenv("HEOMOPT_OUTPUT_ROOT")) return env;
    return ".";
}

/// Config file first, then command-line overrides.
RunConfig resolve(const Flags& f, bool sweep) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
    if (f.system) {
        c.system = *f.system;
        c.energies.reset();
        c.couplings.reset();
    }
    if (sweep) {
        if (!c.grid) c.grid = SweepGrid::default_for(c.hamiltonian().n_sites());
        if (f.lambda_range) c.grid->lambda = parse_range(*f.lambda_range, "--lambda-range");
        if (f.tau_range) c.grid->tau = parse_range(*f.tau_range, "--tau-range");
        if (f.temp_range) c.grid->temperature = parse_range(*f.temp_range, "--temp-range");
        if (f.reduced) c.grid = c.grid->thinned();
        c.bath.reset();
    } else {
        if (!c.bath) c.bath = RunConfig::Bath{};
        if (f.lambda) c.bath->lambda = *f.lambda;
        if (f.tau) c.bath->tau = *f.tau;
        if (f.temp) c.bath->temperature = *f.temp;
        c.grid.reset();
    }
    if (f.dt) c.time.dt = *f.dt;
    if (f.t_end) c.time.t_end = *f.t_end;
    if (f.depth) c.depth = *f.depth;
    if (f.auto_converge) c.auto_converge = true;
    if (f.samples) c.samples = *f.samples;
    if (f.seed) c.seed = *f.seed;
    if (f.workers) c.workers = *f.workers;
    if (f.out) c.output_dir = *f.out;
    c.validate(sweep);
    return c;
}

fs::path output_dir(const RunConfig& c, const std::string& command) {
    fs::path dir = c.output_dir.empty() ? output_root() / (command + "-" + c.system) : fs::path(c.output_dir);
    fs::create_directories(dir);
    return dir;
}

int single_point_depth(const RunConfig& c, const SiteHamiltonian& h, const BathSpec& bath) {
    if (c.depth > 0) return c.depth;
    if (!c.auto_converge) return default_depth(h.n_sites());
    const auto report = convergence_report(h, bath, DensityMatrix::site_projector(h.n_sites(), 1), c.time);
    std::cout << "converged depth=" << report.depth << " dt=" << report.dt << "\n";
    return report.depth;
}

std::string fmt(double v) { return csv::number(v); }

int cmd_propagate(const Flags& f) {
    const RunConfig c = resolve(f, false);
    const auto h = c.hamiltonian();
    const auto rho0 = DensityMatrix::site_projector(h.n_sites(), 1);
    Trajectory traj = [&] {
        if (f.closed) return closed_system_propagate(h, rho0, c.time);
        const auto bath = c.bath_spec();
        return heom_propagate(h, bath, rho0, c.time, single_point_depth(c, h, bath));
    }();
    const auto dir = output_dir(c, "propagate");
    {
        std::ofstream out(dir / "trajectory.csv");
        write_trajectory_csv(out, traj);
        if (!out) throw std::runtime_error("failed writing " + (dir / "trajectory.csv").string());
    }
    save_config((dir / "config.json").string(), c);
    const auto f_series = traj.fidelity_series();
    const auto [t, fmax] = peak_of(traj.times, f_series);
    const auto basis = exciton_basis(h);
    std::cout << "system=" << h.name() << (f.closed ? " closed" : " depth=" + std::to_string(traj.depth)) << "\n"
              << "peak_F=" << fmt(fmax) << " peak_t_fs=" << fmt(t) << "\n"
              << "final_F=" << fmt(f_series.back()) << " final_C_e=" << fmt(l1_coherence(traj.states.back(), basis)) << "\n"
              << "wrote " << (dir / "trajectory.csv").string() << "\n";
    return 0;
}

int cmd_sweep(const Flags& f) {
    const RunConfig c = resolve(f, true);
    const auto h = c.hamiltonian();
    const auto grid = c.sweep_grid();
    const auto dir = output_dir(c, "sweep");

    SweepOptions opts;
    opts.workers = c.workers;
    opts.keep_series = false;
    SweepManifestInfo info;
    if (c.depth > 0) {
        opts.depth = c.depth;
        info.depth_policy = "fixed";
    } else {
        info.depth_policy = "corners";
        opts.depth = corner_depth(h, grid, c.time, opts.convergence, &info.corners, c.workers);
        for (const auto& corner : info.corners)
            if (!corner.report)
                std::cerr << "warning: corner (" << corner.bath.lambda << ", " << corner.bath.tau << ", " << corner.bath.temperature
                          << ") did not converge; using depth " << opts.depth << "\n";
    }
    if (f.resume && fs::exists(dir / "records.csv")) opts.resume = read_records_csv(dir / "records.csv");
    std::mutex io_mutex;
    if (f.trajectories) {
        fs::create_directories(dir / "trajectories");
        opts.on_trajectory = [&](const Trajectory& traj) {
            const auto& b = *traj.bath;
            const auto name = "l" + fmt(b.lambda) + "_tau" + fmt(b.tau) + "_T" + fmt(b.temperature) + ".csv";
            std::ofstream out(dir / "trajectories" / name);
            write_trajectory_csv(out, traj);
        };
    }
    opts.progress = [&, last = std::size_t{0}](std::size_t done, std::size_t total) mutable {
        std::lock_guard lock(io_mutex);
        if (done == total || done >= last + total / 20) {
            last = done;
            std::cerr << "\r" << done << "/" << total << std::flush;
        }
    };
    const auto result = run_sweep(h, grid, c.time, opts);
    std::cerr << "\n";
    write_sweep_dir(dir, h, grid, c.time, result, info);
    save_config((dir / "config.json").string(), c);
    std::cout << "system=" << h.name() << " points=" << result.records.size() << "/" << result.expected << " depth=" << result.depth << "\n";
    if (!result.complete()) {
        std::cout << "incomplete sweep: " << result.failures.size() << " failed points; rerun with --resume\n";
        for (const auto& fl : result.failures)
            std::cout << "  failed (" << fl.bath.lambda << ", " << fl.bath.tau << ", " << fl.bath.temperature << "): " << fl.message << "\n";
        return 2;
    }
    for (auto mode : {OptimumMode::max, OptimumMode::min}) {
        const auto o = with_references(extract_optimum(result, mode), h, c.time);
        std::cout << (mode == OptimumMode::max ? "max" : "min") << " F=" << fmt(o.fidelity) << " lambda=" << fmt(o.lambda)
                  << " tau=" << fmt(o.tau) << " T=" << fmt(o.temperature) << " t=" << fmt(o.time) << " N=- F_cs_max=" << fmt(o.f_cs_max)
                  << " F_eq=" << fmt(o.f_eq) << "\n";
    }
    std::cout << "wrote " << dir.string() << "\n";
    return 0;
}

int cmd_blp(const Flags& f) {
    const RunConfig c = resolve(f, false);
    const auto h = c.hamiltonian();
    const auto bath = c.bath_spec();
    BlpOptions opts;
    opts.depth = c.depth;
    opts.workers = c.workers;
    const auto est = blp_estimate(h, bath, c.time, c.samples, c.seed, opts);
    std::cout << "system=" << h.name() << " lambda=" << fmt(bath.lambda) << " tau=" << fmt(bath.tau) << " T=" << fmt(bath.temperature)
              << " depth=" << est.depth << (c.depth > 0 ? " (fixed)" : est.depth_converged ? " (converged)" : " (unconverged cap)") << "\n"
              << "N=" << fmt(est.value) << " samples=" << est.sample_size << " seed=" << est.seed << "\n"
              << "best_pair index=" << est.best_index << " " << est.best_pair.describe() << "\n";
    if (f.dump_d) {
        const auto dir = output_dir(c, "blp");
        const DynamicalMap map(h, bath, c.time, est.depth);
        std::ofstream out(dir / "trace_distance.csv");
        write_trace_distance_csv(out, trace_distance_trajectory(map, est.best_pair));
        std::cout << "wrote " << (dir / "trace_distance.csv").string() << "\n";
    }
    return 0;
}

int cmd_blp_map(const Flags& f) {
    const RunConfig c = resolve(f, true);
    const auto h = c.hamiltonian();
    const auto dir = output_dir(c, "blp-map");
    std::ofstream out(dir / "nonmarkovianity.csv");
    out << "lambda_cm1,tau_fs,T_K,N,depth\n";
    BlpOptions opts;
    opts.depth = c.depth;
    opts.workers = c.workers;
    for (const auto& bath : c.sweep_grid().points()) {
        const auto est = blp_estimate(h, bath, c.time, c.samples, c.seed, opts);
        out << csv::join({fmt(bath.lambda), fmt(bath.tau), fmt(bath.temperature), fmt(est.value), std::to_string(est.depth)}) << '\n';
    }
    std::cout << "wrote " << (dir / "nonmarkovianity.csv").string() << "\n";
    return 0;
}

int cmd_equilibrium(const Flags& f) {
    const RunConfig c = resolve(f, false);
    const auto h = c.hamiltonian();
    const double temp = c.bath->temperature;
    const auto rho = boltzmann_equilibrium(h, temp);
    const auto refs = closed_and_equilibrium_refs(h, temp, c.time);
    std::cout << "system=" << h.name() << " T=" << fmt(temp) << "\n";
    for (int i = 1; i <= h.n_sites(); ++i) std::cout << "pop_" << i << "=" << fmt(rho(i - 1, i - 1).real()) << "\n";
    std::cout << "F_eq=" << fmt(refs.f_eq) << " F_cs_max=" << fmt(refs.f_cs_max) << "\n";
    return 0;
}

int cmd_convergence(const Flags& f) {
    const RunConfig c = resolve(f, false);
    const auto h = c.hamiltonian();
    const auto bath = c.bath_spec();
    ConvergenceOptions opts;
    if (c.depth > 0) opts.start_depth = c.depth;
    auto print = [](const ConvergenceReport& r) {
        for (const auto& s : r.depth_steps) std::cout << "depth " << s.setting << " vs " << s.setting + 1 << ": residual=" << fmt(s.residual) << "\n";
        for (const auto& s : r.dt_steps) std::cout << "dt " << fmt(s.setting) << " vs " << fmt(s.setting / 2) << ": residual=" << fmt(s.residual) << "\n";
    };
    try {
        const auto r = convergence_report(h, bath, DensityMatrix::site_projector(h.n_sites(), 1), c.time, opts);
        print(r);
        std::cout << "converged depth=" << r.depth << " dt=" << fmt(r.dt) << "\n";
        return 0;
    } catch (const ConvergenceError& e) {
        print(e.report);
        std::cout << "not converged: " << e.what() << "\n";
        return 3;
    }
}

void add_common(CLI::App* cmd, Flags& f, bool bath, bool grid) {
    cmd->add_option("--system", f.system, "Named system (FMO-2, E-2, C-2, FMO-3, E-3, C-3)");
    cmd->add_option("--config", f.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    if (bath) {
        cmd->add_option("--lambda", f.lambda, "Reorganization energy [cm^-1]");
        cmd->add_option("--tau", f.tau, "Bath correlation time [fs]");
        cmd->add_option("--temp", f.temp, "Temperature [K]");
    }
    if (grid) {
        cmd->add_option("--lambda-range", f.lambda_range, "min:max:step [cm^-1]");
        cmd->add_option("--tau-range", f.tau_range, "min:max:step [fs]");
        cmd->add_option("--temp-range", f.temp_range, "min:max:step [K]");
        cmd->add_flag("--reduced", f.reduced, "Every other lambda and tau value");
    }
    cmd->add_option("--depth", f.depth, "Hierarchy depth (0 = automatic)");
    cmd->add_option("--dt", f.dt, "Integrator step [fs]");
    cmd->add_option("--t-end", f.t_end, "End time [fs]");
    cmd->add_option("--workers", f.workers, "Worker threads");
    cmd->add_option("--out", f.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"HEOM excitation energy transfer optimizer"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Flags f;

    auto* propagate = app.add_subcommand("propagate", "Propagate |1><1| at one bath point and write the trajectory CSV");
    add_common(propagate, f, true, false);
    propagate->add_flag("--auto-converge", f.auto_converge, "Select depth with the convergence harness");
    propagate->add_flag("--closed", f.closed, "Closed-system (unitary) evolution");

    auto* sweep = app.add_subcommand("sweep", "Sweep (lambda, tau, T) and report the efficiency optima");
    add_common(sweep, f, false, true);
    sweep->add_flag("--trajectories", f.trajectories, "Write one trajectory CSV per grid point");
    sweep->add_flag("--resume", f.resume, "Reuse records.csv from the output directory");

    auto* blp = app.add_subcommand("blp", "Estimate the BLP non-Markovianity at one bath point");
    add_common(blp, f, true, false);
    blp->add_option("--samples", f.samples, "Number of orthogonal state pairs");
    blp->add_option("--seed", f.seed, "RNG seed");
    blp->add_flag("--dump-d", f.dump_d, "Write D(t) of the best pair");

    auto* blp_map = app.add_subcommand("blp-map", "BLP estimate at every point of a grid");
    add_common(blp_map, f, false, true);
    blp_map->add_option("--samples", f.samples, "Number of orthogonal state pairs");
    blp_map->add_option("--seed", f.seed, "RNG seed");

    auto* equilibrium = app.add_subcommand("equilibrium", "Boltzmann populations and reference efficiencies");
    add_common(equilibrium, f, true, false);

    auto* convergence = app.add_subcommand("convergence", "Hierarchy depth and time step convergence at one bath point");
    add_common(convergence, f, true, false);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*propagate) return cmd_propagate(f);
        if (*sweep) return cmd_sweep(f);
        if (*blp) return cmd_blp(f);
        if (*blp_map) return cmd_blp_map(f);
        if (*equilibrium) return cmd_equilibrium(f);
        if (*convergence) return cmd_convergence(f);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
