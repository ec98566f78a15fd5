#include "vcgmm/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vcgmm/model.hpp"
#include "vcgmm/rng.hpp"

namespace vcgmm {

namespace {

void copy_row(std::span<const double> src, DataMatrix& dst, std::size_t row) {
    std::copy(src.begin(), src.end(), dst.mutable_row(row).begin());
}

// CDF inversion over unnormalized masses; ties resolve to the lower index.
// Zero total mass falls back to a uniform draw.
std::size_t sample_index(std::span<const double> mass, Rng& rng) {
    double total = 0.0;
    for (double v : mass) total += v;
    if (!(total > 0.0)) return static_cast<std::size_t>(rng.below(mass.size()));
    const double target = rng.unit() * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        if (mass[i] <= 0.0) continue;
        last_positive = i;
        acc += mass[i];
        if (acc >= target) return i;
    }
    return last_positive;  // rounding shortfall in acc: take the top of the CDF
}

}  // namespace

DataMatrix afkmc2_seed(const WeightedCoreset& coreset, const SeedingConfig& cfg,
                       DistanceCounter& counter) {
    if (cfg.n_clusters < 1 || cfg.chain_length < 1)
        throw ContractViolation("afkmc2_seed: require C >= 1 and m >= 1");
    coreset.validate();
    const std::size_t n = coreset.size();
    const std::size_t n_clusters = cfg.n_clusters;
    Rng rng(cfg.rng_seed);

    DataMatrix centers(n_clusters, coreset.dim());
    const std::size_t first = sample_index(coreset.weights, rng);
    copy_row(coreset.points.row(first), centers, 0);
    if (n_clusters == 1) return centers;

    // Proposal pass: distances of every coreset point to the first center.
    const double weight_sum = coreset.weight_sum();
    std::vector<double> q(n);
    double dist_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = coreset.weights[i] * squared_distance(coreset.points.row(i), centers.row(0), counter);
        dist_norm += q[i];
    }
    if (dist_norm > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            q[i] = 0.5 * q[i] / dist_norm + 0.5 * coreset.weights[i] / weight_sum;
    } else {
        // All points coincide with the first center; only the weight term survives.
        for (std::size_t i = 0; i < n; ++i) q[i] = coreset.weights[i] / weight_sum;
    }
    std::vector<double> q_cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += q[i];
        q_cdf[i] = acc;
    }
    q_cdf[n - 1] = 1.0;

    const auto draw_proposal = [&]() {
        const double u = rng.unit();
        return static_cast<std::size_t>(std::lower_bound(q_cdf.begin(), q_cdf.end(), u) -
                                        q_cdf.begin());
    };
    const auto min_sq_dist = [&](std::size_t point, std::size_t n_centers) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n_centers; ++c)
            best = std::min(best,
                            squared_distance(coreset.points.row(point), centers.row(c), counter));
        return best;
    };

    for (std::size_t k = 1; k < n_clusters; ++k) {
        std::size_t cur = draw_proposal();
        double cur_d2 = min_sq_dist(cur, k);
        for (std::size_t step = 1; step < cfg.chain_length; ++step) {
            const std::size_t cand = draw_proposal();
            const double cand_d2 = min_sq_dist(cand, k);
            bool accept;
            if (cur_d2 == 0.0) {
                // Degenerate current state: any strictly-improving proposal
                // wins; two coincident states keep the current one.
                accept = cand_d2 > 0.0;
            } else {
                const double ratio = (cand_d2 * q[cur]) / (cur_d2 * q[cand]);
                accept = ratio >= 1.0 || rng.unit() < ratio;
            }
            if (accept) {
                cur = cand;
                cur_d2 = cand_d2;
            }
        }
        copy_row(coreset.points.row(cur), centers, k);
    }
    return centers;
}

DataMatrix dsquared_seed(const DataMatrix& data, const SeedingConfig& cfg,
                         DistanceCounter& counter) {
    if (cfg.n_clusters < 1)
        throw ContractViolation("dsquared_seed: require C >= 1");
    const std::size_t n = data.n_points();
    Rng rng(cfg.rng_seed);

    DataMatrix centers(cfg.n_clusters, data.dim());
    const std::size_t first = rng.below(n);
    copy_row(data.row(first), centers, 0);

    std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
    for (std::size_t k = 1; k < cfg.n_clusters; ++k) {
        const auto prev = centers.row(k - 1);
        for (std::size_t i = 0; i < n; ++i)
            min_d2[i] = std::min(min_d2[i], squared_distance(data.row(i), prev, counter));
        copy_row(data.row(sample_index(min_d2, rng)), centers, k);
    }
    return centers;
}

DataMatrix uniform_seed(const DataMatrix& data, const SeedingConfig& cfg) {
    if (cfg.n_clusters < 1)
        throw ContractViolation("uniform_seed: require C >= 1");
    const std::size_t n = data.n_points();
    const std::size_t n_clusters = cfg.n_clusters;
    Rng rng(cfg.rng_seed);

    DataMatrix centers(n_clusters, data.dim());
    if (n_clusters > n) {
        for (std::size_t k = 0; k < n_clusters; ++k)
            copy_row(data.row(rng.below(n)), centers, k);
        return centers;
    }
    std::vector<std::uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    for (std::size_t k = 0; k < n_clusters; ++k) {
        const std::size_t j = k + rng.below(n - k);
        std::swap(idx[k], idx[j]);
        copy_row(data.row(idx[k]), centers, k);
    }
    return centers;
}

}  // namespace vcgmm
