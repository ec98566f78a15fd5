#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "vcgmm/errors.hpp"
#include "vcgmm/rng.hpp"

namespace vcgmm {

// Dense row-major matrix of data points (N x D). Also used to hold sets of
// cluster means (C x D). Values must be finite; loaders enforce this at the
// input boundary.
class DataMatrix {
public:
    DataMatrix() = default;

    DataMatrix(std::size_t n_points, std::size_t dim)
        : n_points_(n_points), dim_(dim), values_(n_points * dim, 0.0) {
        check_shape();
    }

    DataMatrix(std::size_t n_points, std::size_t dim, std::vector<double> values)
        : n_points_(n_points), dim_(dim), values_(std::move(values)) {
        check_shape();
        if (values_.size() != n_points_ * dim_)
            throw ContractViolation("DataMatrix: value buffer size does not match shape");
    }

    std::size_t n_points() const { return n_points_; }
    std::size_t dim() const { return dim_; }

    std::span<const double> row(std::size_t n) const {
        return {values_.data() + n * dim_, dim_};
    }
    std::span<double> mutable_row(std::size_t n) {
        return {values_.data() + n * dim_, dim_};
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    void check_shape() const {
        if (n_points_ < 1 || dim_ < 1)
            throw ContractViolation("DataMatrix: n_points and dim must be >= 1");
    }

    std::size_t n_points_ = 0;
    std::size_t dim_ = 0;
    std::vector<double> values_;
};

// Weighted subset of a data set: copied rows plus one positive weight per row.
// Duplicated rows are allowed (sampling with replacement), each carrying its
// own weight.
struct WeightedCoreset {
    DataMatrix points;
    std::vector<double> weights;

    std::size_t size() const { return points.n_points(); }
    std::size_t dim() const { return points.dim(); }

    double weight_sum() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    void validate() const {
        if (weights.size() != points.n_points())
            throw ContractViolation("WeightedCoreset: weight count does not match point count");
        for (double w : weights)
            if (!(w > 0.0))
                throw ContractViolation("WeightedCoreset: all weights must be positive");
    }
};

// Mixture parameters: C mean vectors plus one shared isotropic per-dimension
// variance. Mixing weights are fixed at 1/C by the model.
struct GmmParams {
    DataMatrix means;  // C x D
    double variance = 1.0;

    std::size_t n_clusters() const { return means.n_points(); }
    std::size_t dim() const { return means.dim(); }
    std::span<const double> mean(std::size_t c) const { return means.row(c); }
};

// Variational state of the truncated E-step:
//   k_sets    per point, the C' estimated-closest cluster indices, ordered by
//             increasing squared distance (ties to the lower index)
//   g_sets    per cluster c, the G estimated-closest clusters incl. c itself
//   winners   per point, the nearest found cluster (defines the partition I_c)
//   cluster_dists  sparse averaged squared cluster-to-cluster distances d_cc',
//             rebuilt every E-step; missing entries mean +infinity
class TruncatedState {
public:
    TruncatedState() = default;

    TruncatedState(std::size_t n_points, std::size_t n_clusters, std::size_t c_prime,
                   std::size_t g_size)
        : n_points_(n_points),
          n_clusters_(n_clusters),
          c_prime_(c_prime),
          g_size_(g_size),
          k_sets_(n_points * c_prime, 0),
          g_sets_(n_clusters * g_size, 0),
          winners_(n_points, 0),
          cluster_dists_(n_clusters) {
        if (c_prime < 1 || c_prime > n_clusters)
            throw ContractViolation("TruncatedState: require 1 <= C' <= C");
        if (g_size < 1 || g_size > n_clusters)
            throw ContractViolation("TruncatedState: require 1 <= G <= C");
    }

    // Uniform-random initialization: per point C' distinct clusters; per
    // cluster c, c itself plus G-1 distinct others.
    static TruncatedState random_init(std::size_t n_points, std::size_t n_clusters,
                                      std::size_t c_prime, std::size_t g_size, Rng& rng);

    std::size_t n_points() const { return n_points_; }
    std::size_t n_clusters() const { return n_clusters_; }
    std::size_t c_prime() const { return c_prime_; }
    std::size_t g_size() const { return g_size_; }

    std::span<const std::uint32_t> k_set(std::size_t n) const {
        return {k_sets_.data() + n * c_prime_, c_prime_};
    }
    std::span<std::uint32_t> mutable_k_set(std::size_t n) {
        return {k_sets_.data() + n * c_prime_, c_prime_};
    }

    std::span<const std::uint32_t> g_set(std::size_t c) const {
        return {g_sets_.data() + c * g_size_, g_size_};
    }
    std::span<std::uint32_t> mutable_g_set(std::size_t c) {
        return {g_sets_.data() + c * g_size_, g_size_};
    }

    std::uint32_t winner(std::size_t n) const { return winners_[n]; }
    std::vector<std::uint32_t>& winners() { return winners_; }
    const std::vector<std::uint32_t>& winners() const { return winners_; }

    // Sparse row of averaged squared distances from cluster c, sorted by
    // target index. Empty row: no point had c as its winner this iteration.
    using DistRow = std::vector<std::pair<std::uint32_t, double>>;
    const DistRow& cluster_dist_row(std::size_t c) const { return cluster_dists_[c]; }
    std::vector<DistRow>& cluster_dists() { return cluster_dists_; }

    double cluster_dist(std::size_t c, std::size_t c2) const;

    // Partition sets I_c materialized from the winner array.
    std::vector<std::vector<std::uint32_t>> partition_sets() const;

    // Element-count footprint of the variational state (index sets, winners,
    // sparse distance rows); used by the memory-accounting tests.
    std::size_t element_count() const;

    void check_invariants() const;

private:
    std::size_t n_points_ = 0;
    std::size_t n_clusters_ = 0;
    std::size_t c_prime_ = 0;
    std::size_t g_size_ = 0;
    std::vector<std::uint32_t> k_sets_;
    std::vector<std::uint32_t> g_sets_;
    std::vector<std::uint32_t> winners_;
    std::vector<DistRow> cluster_dists_;
};

// Truncated posteriors s_c^(n), stored aligned with the k_sets of the state
// they were computed from: values[n * c_prime + j] pairs with k_set(n)[j].
struct Responsibilities {
    std::size_t c_prime = 0;
    std::vector<double> values;

    std::span<const double> row(std::size_t n) const {
        return {values.data() + n * c_prime, c_prime};
    }
};

// Squared distances cached by the E-step, aligned with k_sets the same way.
// Entry 0 of each row is the winner distance (rows are sorted ascending).
struct EStepCache {
    std::size_t c_prime = 0;
    std::vector<double> k_dists;

    std::span<const double> row(std::size_t n) const {
        return {k_dists.data() + n * c_prime, c_prime};
    }
};

}  // namespace vcgmm
