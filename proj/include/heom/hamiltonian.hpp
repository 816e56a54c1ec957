#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace heom {

/// Single-excitation Hamiltonian of an N-site pigment aggregate in cm^-1.
///
/// Site energies are stored relative to the last site, so energies().back()
/// is always zero. Only energy differences enter the dynamics.
class SiteHamiltonian {
public:
    SiteHamiltonian(std::vector<double> energies, Eigen::MatrixXd couplings, std::string name = "explicit")
        : energies_(std::move(energies)), couplings_(std::move(couplings)), name_(std::move(name)) {
        const auto n = static_cast<Eigen::Index>(energies_.size());
        if (n < 2) throw std::invalid_argument("SiteHamiltonian: at least two sites required");
        if (couplings_.rows() != n || couplings_.cols() != n)
            throw std::invalid_argument("SiteHamiltonian: coupling matrix dimension does not match site count");
        for (Eigen::Index i = 0; i < n; ++i) {
            if (couplings_(i, i) != 0.0) throw std::invalid_argument("SiteHamiltonian: coupling diagonal must be zero");
            for (Eigen::Index j = i + 1; j < n; ++j)
                if (couplings_(i, j) != couplings_(j, i))
                    throw std::invalid_argument("SiteHamiltonian: coupling matrix is not symmetric");
        }
        const double ref = energies_.back();
        for (auto& e : energies_) e -= ref;
        if (!couplings_.allFinite() || !std::all_of(energies_.begin(), energies_.end(), [](double e) { return std::isfinite(e); }))
            throw std::invalid_argument("SiteHamiltonian: non-finite parameter");
    }

    int n_sites() const { return static_cast<int>(energies_.size()); }
    const std::vector<double>& energies() const { return energies_; }
    const Eigen::MatrixXd& couplings() const { return couplings_; }
    const std::string& name() const { return name_; }

    /// Coupling between 1-based sites i and j.
    double coupling(int i, int j) const { return couplings_(i - 1, j - 1); }

    Eigen::MatrixXd matrix() const {
        Eigen::MatrixXd h = couplings_;
        for (int i = 0; i < n_sites(); ++i) h(i, i) = energies_[static_cast<std::size_t>(i)];
        return h;
    }

    bool operator==(const SiteHamiltonian& o) const {
        return energies_ == o.energies_ && couplings_ == o.couplings_;
    }

private:
    std::vector<double> energies_;
    Eigen::MatrixXd couplings_;
    std::string name_;
};

/// Dimer from E1 - E2 and J12.
inline SiteHamiltonian make_dimer(double e1_minus_e2, double j12, std::string name = "explicit") {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2, 2);
    j(0, 1) = j(1, 0) = j12;
    return SiteHamiltonian({e1_minus_e2, 0.0}, j, std::move(name));
}

/// Trimer from E1 - E3, E2 - E3 and the three couplings.
inline SiteHamiltonian make_trimer(double e13, double e23, double j12, double j23, double j13,
                                   std::string name = "explicit") {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 3);
    j(0, 1) = j(1, 0) = j12;
    j(1, 2) = j(2, 1) = j23;
    j(0, 2) = j(2, 0) = j13;
    return SiteHamiltonian({e13, e23, 0.0}, j, std::move(name));
}

inline constexpr std::array<std::string_view, 6> kNamedSystems = {"FMO-2", "E-2", "C-2", "FMO-3", "E-3", "C-3"};

/// One of the six model aggregates: FMO-2, E-2, C-2, FMO-3, E-3, C-3.
inline SiteHamiltonian build_site_hamiltonian(std::string_view id) {
    const std::string name(id);
    if (id == "FMO-2") return make_dimer(-100, -100, name);
    if (id == "E-2") return make_dimer(0, 100, name);
    if (id == "C-2") return make_dimer(144, 100, name);
    if (id == "FMO-3") return make_trimer(200, 300, -100, 50, 0, name);
    if (id == "E-3") return make_trimer(0, 0, 100, 100, 0, name);
    if (id == "C-3") return make_trimer(40, -160, -100, -20, -100, name);
    throw std::invalid_argument("unknown system identifier '" + name + "'");
}

namespace detail {

inline std::string shortest(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument("malformed number '" + std::string(s) + "'");
    return v;
}

}  // namespace detail

/// CSV with header `kind,i,j,value_cm1`; one `energy` row per site and one
/// `coupling` row per pair i<j. Values use shortest round-trip formatting.
inline std::string to_csv(const SiteHamiltonian& h) {
    std::ostringstream out;
    out << "kind,i,j,value_cm1\n";
    for (int i = 1; i <= h.n_sites(); ++i)
        out << "energy," << i << ',' << i << ',' << detail::shortest(h.energies()[i - 1]) << '\n';
    for (int i = 1; i <= h.n_sites(); ++i)
        for (int j = i + 1; j <= h.n_sites(); ++j)
            out << "coupling," << i << ',' << j << ',' << detail::shortest(h.coupling(i, j)) << '\n';
    return out.str();
}

inline SiteHamiltonian hamiltonian_from_csv(const std::string& text, std::string name = "explicit") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "kind,i,j,value_cm1")
        throw std::invalid_argument("hamiltonian csv: bad header");
    struct Row { std::string kind; int i; int j; double v; };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 4> f;
        std::size_t start = 0;
        for (int k = 0; k < 4; ++k) {
            auto pos = line.find(',', start);
            if ((k < 3) == (pos == std::string::npos)) throw std::invalid_argument("hamiltonian csv: bad row '" + line + "'");
            f[static_cast<std::size_t>(k)] = line.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
            start = pos + 1;
        }
        rows.push_back({f[0], std::stoi(f[1]), std::stoi(f[2]), detail::parse_double(f[3])});
    }
    int n = 0;
    for (const auto& r : rows)
        if (r.kind == "energy") ++n;
    if (n < 2) throw std::invalid_argument("hamiltonian csv: fewer than two energies");
    std::vector<double> e(static_cast<std::size_t>(n), 0.0);
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (const auto& r : rows) {
        if (r.i < 1 || r.i > n || r.j < 1 || r.j > n) throw std::invalid_argument("hamiltonian csv: index out of range");
        if (r.kind == "energy") {
            e[static_cast<std::size_t>(r.i - 1)] = r.v;
        } else if (r.kind == "coupling") {
            if (r.i == r.j) throw std::invalid_argument("hamiltonian csv: self coupling");
            j(r.i - 1, r.j - 1) = j(r.j - 1, r.i - 1) = r.v;
        } else {
            throw std::invalid_argument("hamiltonian csv: unknown row kind '" + r.kind + "'");
        }
    }
    return SiteHamiltonian(std::move(e), std::move(j), std::move(name));
}

}  // namespace heom
