#pragma once

#include "heom/blp.hpp"
#include "heom/csv.hpp"
#include "heom/measures.hpp"
#include "heom/propagator.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace heom {

/// t_fs, re/im of rho_ij for i <= j (row-major), pop_i, F, C_s_ij for i < j, C_e.
inline std::vector<std::string> trajectory_columns(int n) {
    std::vector<std::string> cols{"t_fs"};
    for (int i = 1; i <= n; ++i)
        for (int j = i; j <= n; ++j) {
            const std::string ij = std::to_string(i) + std::to_string(j);
            cols.push_back("re_rho_" + ij);
            cols.push_back("im_rho_" + ij);
        }
    for (int i = 1; i <= n; ++i) cols.push_back("pop_" + std::to_string(i));
    cols.push_back("F");
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) cols.push_back("C_s_" + std::to_string(i) + std::to_string(j));
    cols.push_back("C_e");
    return cols;
}

inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    const int n = traj.hamiltonian.n_sites();
    const ExcitonBasis basis = exciton_basis(traj.hamiltonian);
    out << csv::join(trajectory_columns(n)) << '\n';
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const DensityMatrix& rho = traj.states[k];
        std::vector<std::string> row{csv::number(traj.times[k])};
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                row.push_back(csv::number(rho(i, j).real()));
                row.push_back(csv::number(rho(i, j).imag()));
            }
        for (int i = 0; i < n; ++i) row.push_back(csv::number(rho(i, i).real()));
        row.push_back(csv::number(fidelity(rho, n)));
        for (int i = 1; i <= n; ++i)
            for (int j = i + 1; j <= n; ++j) row.push_back(csv::number(local_coherence(rho, i, j)));
        row.push_back(csv::number(l1_coherence(rho, basis)));
        out << csv::join(row) << '\n';
    }
}

inline void write_trace_distance_csv(std::ostream& out, const TraceDistanceTrajectory& traj) {
    out << "t_fs,D\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) out << csv::number(traj.times[k]) << ',' << csv::number(traj.values[k]) << '\n';
}

}  // namespace heom
