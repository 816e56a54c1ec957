#pragma once

#include "heom/bath.hpp"
#include "heom/blp.hpp"
#include "heom/hamiltonian.hpp"
#include "heom/sweep.hpp"
#include "heom/time_grid.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace heom {

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Everything one CLI command needs. Energies in cm^-1, times in fs,
/// temperatures in K.
struct RunConfig {
    std::string system = "FMO-2";
    // explicit Hamiltonian; when set, `system` is only a label
    std::optional<std::vector<double>> energies;
    std::optional<std::vector<std::vector<double>>> couplings;

    struct Bath {
        double lambda = 20.0;
        double tau = 50.0;
        double temperature = 250.0;
        bool operator==(const Bath&) const = default;
    };
    std::optional<Bath> bath;
    std::optional<SweepGrid> grid;

    TimeGrid time;
    int depth = 0;  // 0: default / harness-selected
    bool auto_converge = false;
    long samples = 1000;
    std::uint64_t seed = 1;
    std::string output_dir;
    int workers = 1;

    bool operator==(const RunConfig&) const = default;

    SiteHamiltonian hamiltonian() const {
        if (energies.has_value() != couplings.has_value())
            throw ConfigError("config.hamiltonian: energies and couplings must be given together");
        if (!energies) {
            try {
                return build_site_hamiltonian(system);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(std::string("config.system: ") + e.what());
            }
        }
        const auto n = static_cast<Eigen::Index>(energies->size());
        if (static_cast<Eigen::Index>(couplings->size()) != n) throw ConfigError("config.hamiltonian.couplings: row count does not match energies");
        Eigen::MatrixXd j(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            const auto& row = (*couplings)[static_cast<std::size_t>(r)];
            if (static_cast<Eigen::Index>(row.size()) != n) throw ConfigError("config.hamiltonian.couplings: row " + std::to_string(r) + " has wrong length");
            for (Eigen::Index c = 0; c < n; ++c) j(r, c) = row[static_cast<std::size_t>(c)];
        }
        try {
            return SiteHamiltonian(*energies, j, system);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config.hamiltonian: ") + e.what());
        }
    }

    BathSpec bath_spec() const {
        if (!bath) throw ConfigError("config.bath: required for this command");
        try {
            BathSpec b(bath->lambda, bath->tau, bath->temperature);
            if (!b.high_temperature_valid()) throw ConfigError("config.bath.tau: violates tau > hbar/(k_B T)");
            return b;
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config.bath: ") + e.what());
        }
    }

    SweepGrid sweep_grid() const {
        if (!grid) throw ConfigError("config.grid: required for this command");
        try {
            grid->validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config.grid: ") + e.what());
        }
        if (grid->lambda.min <= 0 || grid->tau.min <= 0 || grid->temperature.min <= 0)
            throw ConfigError("config.grid: ranges must be positive");
        return *grid;
    }

    /// Single-point commands need exactly a bath, sweeps exactly a grid.
    void validate(bool needs_grid) const {
        if (needs_grid && bath) throw ConfigError("config: a sweep takes a grid, not a bath");
        if (!needs_grid && grid) throw ConfigError("config: this command takes a bath, not a grid");
        (void)hamiltonian();
        if (needs_grid) (void)sweep_grid();
        else (void)bath_spec();
        try {
            time.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("config.time: ") + e.what());
        }
        if (depth < 0) throw ConfigError("config.hierarchy.depth: must be non-negative");
        if (samples < 1) throw ConfigError("config.blp.samples: must be at least 1");
        if (workers < 1) throw ConfigError("config.workers: must be at least 1");
    }
};

namespace detail {
inline nlohmann::json range_json(const Range& r) { return nlohmann::json::array({r.min, r.max, r.step}); }
inline Range range_from(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw ConfigError("config.grid." + field + ": expected [min, max, step]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}
}  // namespace detail

inline nlohmann::json to_json(const RunConfig& c) {
    nlohmann::json j;
    j["system"] = c.system;
    if (c.energies) j["hamiltonian"] = {{"energies", *c.energies}, {"couplings", *c.couplings}};
    if (c.bath) j["bath"] = {{"lambda", c.bath->lambda}, {"tau", c.bath->tau}, {"temperature", c.bath->temperature}};
    if (c.grid)
        j["grid"] = {{"lambda", detail::range_json(c.grid->lambda)},
                     {"tau", detail::range_json(c.grid->tau)},
                     {"temperature", detail::range_json(c.grid->temperature)}};
    j["time"] = {{"t_start", c.time.t_start}, {"t_end", c.time.t_end}, {"dt", c.time.dt}, {"output_stride", c.time.output_stride}};
    j["hierarchy"] = {{"depth", c.depth}, {"auto_converge", c.auto_converge}};
    j["blp"] = {{"samples", c.samples}, {"seed", c.seed}};
    j["output_dir"] = c.output_dir;
    j["workers"] = c.workers;
    return j;
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    auto field = [](const nlohmann::json& obj, const char* key, auto& dst, const std::string& path) {
        if (!obj.contains(key)) return;
        try {
            obj.at(key).get_to(dst);
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(path + "." + key + ": wrong type");
        }
    };
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    for (const auto& [key, _] : j.items())
        if (key != "system" && key != "hamiltonian" && key != "bath" && key != "grid" && key != "time" && key != "hierarchy" &&
            key != "blp" && key != "output_dir" && key != "workers")
            throw ConfigError("config." + key + ": unknown field");
    field(j, "system", c.system, "config");
    if (j.contains("hamiltonian")) {
        std::vector<double> e;
        std::vector<std::vector<double>> jc;
        field(j["hamiltonian"], "energies", e, "config.hamiltonian");
        field(j["hamiltonian"], "couplings", jc, "config.hamiltonian");
        c.energies = e;
        c.couplings = jc;
    }
    if (j.contains("bath")) {
        RunConfig::Bath b;
        field(j["bath"], "lambda", b.lambda, "config.bath");
        field(j["bath"], "tau", b.tau, "config.bath");
        field(j["bath"], "temperature", b.temperature, "config.bath");
        c.bath = b;
    }
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        SweepGrid grid = SweepGrid::default_for(c.energies ? static_cast<int>(c.energies->size()) : c.hamiltonian().n_sites());
        if (g.contains("lambda")) grid.lambda = detail::range_from(g["lambda"], "lambda");
        if (g.contains("tau")) grid.tau = detail::range_from(g["tau"], "tau");
        if (g.contains("temperature")) grid.temperature = detail::range_from(g["temperature"], "temperature");
        c.grid = grid;
    }
    if (j.contains("time")) {
        field(j["time"], "t_start", c.time.t_start, "config.time");
        field(j["time"], "t_end", c.time.t_end, "config.time");
        field(j["time"], "dt", c.time.dt, "config.time");
        field(j["time"], "output_stride", c.time.output_stride, "config.time");
    }
    if (j.contains("hierarchy")) {
        field(j["hierarchy"], "depth", c.depth, "config.hierarchy");
        field(j["hierarchy"], "auto_converge", c.auto_converge, "config.hierarchy");
    }
    if (j.contains("blp")) {
        field(j["blp"], "samples", c.samples, "config.blp");
        field(j["blp"], "seed", c.seed, "config.blp");
    }
    field(j, "output_dir", c.output_dir, "config");
    field(j, "workers", c.workers, "config");
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    try {
        return config_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
}

inline void save_config(const std::string& path, const RunConfig& c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << to_json(c).dump(2) << '\n';
}

}  // namespace heom
