#include "vcgmm/types.hpp"

#include <algorithm>
#include <limits>

namespace vcgmm {

namespace {

// Fills out with `count` distinct indices from [0, n_clusters), `forced`
// first when given. Partial Fisher-Yates over a scratch index array.
void sample_distinct(std::span<std::uint32_t> out, std::size_t n_clusters,
                     std::vector<std::uint32_t>& scratch, Rng& rng,
                     std::int64_t forced = -1) {
    scratch.resize(n_clusters);
    for (std::size_t c = 0; c < n_clusters; ++c) scratch[c] = static_cast<std::uint32_t>(c);
    std::size_t taken = 0;
    if (forced >= 0) {
        std::swap(scratch[static_cast<std::size_t>(forced)], scratch[0]);
        out[taken++] = static_cast<std::uint32_t>(forced);
    }
    while (taken < out.size()) {
        const std::size_t j = taken + rng.below(n_clusters - taken);
        std::swap(scratch[taken], scratch[j]);
        out[taken] = scratch[taken];
        ++taken;
    }
}

}  // namespace

TruncatedState TruncatedState::random_init(std::size_t n_points, std::size_t n_clusters,
                                           std::size_t c_prime, std::size_t g_size, Rng& rng) {
    TruncatedState state(n_points, n_clusters, c_prime, g_size);
    std::vector<std::uint32_t> scratch;
    for (std::size_t n = 0; n < n_points; ++n)
        sample_distinct(state.mutable_k_set(n), n_clusters, scratch, rng);
    for (std::size_t c = 0; c < n_clusters; ++c)
        sample_distinct(state.mutable_g_set(c), n_clusters, scratch, rng,
                        static_cast<std::int64_t>(c));
    for (std::size_t n = 0; n < n_points; ++n) state.winners_[n] = state.k_set(n)[0];
    return state;
}

double TruncatedState::cluster_dist(std::size_t c, std::size_t c2) const {
    const auto& row = cluster_dists_[c];
    const auto it = std::lower_bound(row.begin(), row.end(), c2,
                                     [](const auto& e, std::size_t key) { return e.first < key; });
    if (it != row.end() && it->first == c2) return it->second;
    return std::numeric_limits<double>::infinity();
}

std::vector<std::vector<std::uint32_t>> TruncatedState::partition_sets() const {
    std::vector<std::vector<std::uint32_t>> sets(n_clusters_);
    for (std::size_t n = 0; n < n_points_; ++n)
        sets[winners_[n]].push_back(static_cast<std::uint32_t>(n));
    return sets;
}

std::size_t TruncatedState::element_count() const {
    std::size_t count = k_sets_.size() + g_sets_.size() + winners_.size();
    for (const auto& row : cluster_dists_) count += 2 * row.size();
    return count;
}

void TruncatedState::check_invariants() const {
    for (std::size_t n = 0; n < n_points_; ++n) {
        const auto k = k_set(n);
        for (std::size_t i = 0; i < k.size(); ++i) {
            if (k[i] >= n_clusters_)
                throw ContractViolation("TruncatedState: K^(n) index out of range");
            for (std::size_t j = i + 1; j < k.size(); ++j)
                if (k[i] == k[j])
                    throw ContractViolation("TruncatedState: K^(n) entries not distinct");
        }
        if (winners_[n] >= n_clusters_)
            throw ContractViolation("TruncatedState: winner index out of range");
    }
    for (std::size_t c = 0; c < n_clusters_; ++c) {
        const auto g = g_set(c);
        bool self = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (g[i] >= n_clusters_)
                throw ContractViolation("TruncatedState: G_c index out of range");
            if (g[i] == c) self = true;
            for (std::size_t j = i + 1; j < g.size(); ++j)
                if (g[i] == g[j])
                    throw ContractViolation("TruncatedState: G_c entries not distinct");
        }
        if (!self) throw ContractViolation("TruncatedState: c not in G_c");
    }
    for (std::size_t c = 0; c < n_clusters_; ++c) {
        bool nonempty = false;
        for (std::size_t n = 0; n < n_points_ && !nonempty; ++n) nonempty = winners_[n] == c;
        if (nonempty && cluster_dist(c, c) != 0.0)
            throw ContractViolation("TruncatedState: d_cc != 0 for nonempty I_c");
    }
}

}  // namespace vcgmm
