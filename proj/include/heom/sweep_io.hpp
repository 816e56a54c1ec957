#pragma once

#include "heom/csv.hpp"
#include "heom/hamiltonian.hpp"
#include "heom/sweep.hpp"
#include "heom/version.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace heom {

inline const std::vector<std::string> kRecordColumns = {"lambda_cm1", "tau_fs", "T_K", "best_t_fs", "best_F", "depth"};

inline void write_records_csv(std::ostream& out, std::span<const SweepRecord> records) {
    out << csv::join(kRecordColumns) << '\n';
    for (const auto& r : records)
        out << csv::join({csv::number(r.bath.lambda), csv::number(r.bath.tau), csv::number(r.bath.temperature), csv::number(r.best_time),
                          csv::number(r.best_fidelity), std::to_string(r.depth)})
            << '\n';
}

inline std::vector<SweepRecord> parse_records_csv(std::string_view text) {
    const csv::Table t = csv::parse(text, kRecordColumns);
    std::vector<SweepRecord> out;
    for (const auto& row : t.rows) out.push_back({BathSpec(row[0], row[1], row[2]), row[3], row[4], {}, static_cast<int>(row[5])});
    return out;
}

namespace detail {
inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}
inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + p.string() + "'");
}
}  // namespace detail

inline std::vector<SweepRecord> read_records_csv(const std::filesystem::path& path) { return parse_records_csv(detail::slurp(path)); }

struct SweepManifestInfo {
    std::string depth_policy;  // "fixed" or "corners"
    std::vector<CornerConvergence> corners;
};

inline nlohmann::json optimum_json(const OptimumRecord& o) {
    nlohmann::json j = {{"mode", o.mode == OptimumMode::max ? "max" : "min"},
                        {"F", o.fidelity},
                        {"lambda_cm1", o.lambda},
                        {"tau_fs", o.tau},
                        {"T_K", o.temperature},
                        {"t_fs", o.time},
                        {"F_cs_max", o.f_cs_max},
                        {"F_eq", o.f_eq}};
    j["nonmarkovianity"] = o.nonmarkovianity ? nlohmann::json(*o.nonmarkovianity) : nlohmann::json(nullptr);
    return j;
}

/// Writes manifest.json, records.csv and surface.csv into `dir`.
inline void write_sweep_dir(const std::filesystem::path& dir, const SiteHamiltonian& h, const SweepGrid& grid, const TimeGrid& time,
                            const SweepResult& result, const SweepManifestInfo& info = {}) {
    std::filesystem::create_directories(dir);
    std::ostringstream records;
    write_records_csv(records, result.records);
    detail::write_file(dir / "records.csv", records.str());

    std::ostringstream surface;
    surface << "lambda_cm1,tau_fs,best_F\n";
    for (const auto& [key, f] : fidelity_surface(result.records))
        surface << csv::number(key.first) << ',' << csv::number(key.second) << ',' << csv::number(f) << '\n';
    detail::write_file(dir / "surface.csv", surface.str());

    nlohmann::json m;
    m["format"] = "heom-sweep/1";
    m["code_version"] = kVersion;
    m["system"] = {{"name", h.name()}, {"hamiltonian_csv", to_csv(h)}};
    m["grid"] = {{"lambda", {grid.lambda.min, grid.lambda.max, grid.lambda.step}},
                 {"tau", {grid.tau.min, grid.tau.max, grid.tau.step}},
                 {"temperature", {grid.temperature.min, grid.temperature.max, grid.temperature.step}}};
    m["time"] = {{"t_start", time.t_start}, {"t_end", time.t_end}, {"dt", time.dt}, {"output_stride", time.output_stride}};
    m["depth"] = result.depth;
    m["depth_policy"] = info.depth_policy;
    for (const auto& c : info.corners) {
        nlohmann::json cj = {{"lambda_cm1", c.bath.lambda}, {"tau_fs", c.bath.tau}, {"T_K", c.bath.temperature}};
        if (c.report) cj["settled_depth"] = c.report->depth;
        else cj["error"] = c.error;
        m["corners"].push_back(cj);
    }
    m["expected_points"] = result.expected;
    m["completed_points"] = result.records.size();
    m["complete"] = result.complete();
    m["failures"] = nlohmann::json::array();
    for (const auto& f : result.failures)
        m["failures"].push_back({{"lambda_cm1", f.bath.lambda}, {"tau_fs", f.bath.tau}, {"T_K", f.bath.temperature}, {"message", f.message}});
    if (result.complete() && !result.records.empty()) {
        m["optimum_max"] = optimum_json(with_references(extract_optimum(result, OptimumMode::max), h, time));
        m["optimum_min"] = optimum_json(with_references(extract_optimum(result, OptimumMode::min), h, time));
    }
    detail::write_file(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace heom
