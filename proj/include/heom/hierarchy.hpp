#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace heom {

using MultiIndex = std::vector<int>;

/// All multi-indices n = (n_1..n_N) with |n| <= depth, ordered by level and
/// then lexicographically descending, so index 0 is the zero multi-index.
class HierarchyIndexSet {
public:
    static constexpr int kNone = -1;

    HierarchyIndexSet(int n_sites, int depth) : n_sites_(n_sites), depth_(depth) {
        if (n_sites < 1) throw std::invalid_argument("HierarchyIndexSet: need at least one site");
        if (depth < 0) throw std::invalid_argument("HierarchyIndexSet: depth must be non-negative");
        for (int level = 0; level <= depth; ++level) {
            MultiIndex n(static_cast<std::size_t>(n_sites), 0);
            append_level(n, 0, level);
        }
        std::map<MultiIndex, int> position;
        for (int k = 0; k < size(); ++k) position.emplace(indices_[static_cast<std::size_t>(k)], k);
        plus_.assign(indices_.size(), std::vector<int>(static_cast<std::size_t>(n_sites), kNone));
        minus_ = plus_;
        for (int k = 0; k < size(); ++k) {
            for (int j = 0; j < n_sites; ++j) {
                MultiIndex m = indices_[static_cast<std::size_t>(k)];
                ++m[static_cast<std::size_t>(j)];
                if (auto it = position.find(m); it != position.end()) plus_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = it->second;
                m[static_cast<std::size_t>(j)] -= 2;
                if (m[static_cast<std::size_t>(j)] >= 0)
                    minus_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = position.at(m);
            }
        }
    }

    /// binomial(depth + n_sites, n_sites) without building the set.
    static std::uint64_t count(int n_sites, int depth) {
        std::uint64_t c = 1;
        for (int k = 1; k <= n_sites; ++k) c = c * static_cast<std::uint64_t>(depth + k) / static_cast<std::uint64_t>(k);
        return c;
    }

    int n_sites() const { return n_sites_; }
    int depth() const { return depth_; }
    int size() const { return static_cast<int>(indices_.size()); }
    const MultiIndex& operator[](int k) const { return indices_[static_cast<std::size_t>(k)]; }

    int level(int k) const {
        int s = 0;
        for (int v : indices_[static_cast<std::size_t>(k)]) s += v;
        return s;
    }

    /// Position of n + e_j, or kNone beyond the truncation depth.
    int raise(int k, int j) const { return plus_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]; }
    /// Position of n - e_j, or kNone when n_j == 0.
    int lower(int k, int j) const { return minus_[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)]; }

private:
    void append_level(MultiIndex& n, int site, int remaining) {
        if (site == n_sites_ - 1) {
            n[static_cast<std::size_t>(site)] = remaining;
            indices_.push_back(n);
            return;
        }
        for (int v = remaining; v >= 0; --v) {
            n[static_cast<std::size_t>(site)] = v;
            append_level(n, site + 1, remaining - v);
        }
    }

    int n_sites_;
    int depth_;
    std::vector<MultiIndex> indices_;
    std::vector<std::vector<int>> plus_;
    std::vector<std::vector<int>> minus_;
};

}  // namespace heom
