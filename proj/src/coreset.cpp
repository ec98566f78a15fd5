#include "vcgmm/coreset.hpp"

#include <algorithm>

#include "vcgmm/model.hpp"
#include "vcgmm/rng.hpp"

namespace vcgmm {

std::vector<double> data_mean(const DataMatrix& data) {
    const std::size_t dim = data.dim();
    std::vector<double> mean(dim, 0.0);
    for (std::size_t n = 0; n < data.n_points(); ++n) {
        const auto row = data.row(n);
        for (std::size_t d = 0; d < dim; ++d) mean[d] += row[d];
    }
    const double inv_n = 1.0 / static_cast<double>(data.n_points());
    for (double& v : mean) v *= inv_n;
    return mean;
}

WeightedCoreset build_lightweight_coreset(const DataMatrix& data, const LwcsConfig& cfg,
                                          DistanceCounter& counter) {
    const std::size_t n = data.n_points();
    const std::size_t n_core = cfg.target_size;
    if (n_core < 1 || n_core > n)
        throw ContractViolation("build_lightweight_coreset: require 1 <= N' <= N");

    const std::vector<double> mean = data_mean(data);
    const std::span<const double> mean_span(mean);

    // Streaming-style construction: one distance pass for the normalizer,
    // one for the proposal values.
    double dist_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        dist_sum += squared_distance(data.row(i), mean_span, counter);

    const double uniform = 0.5 / static_cast<double>(n);
    std::vector<double> q(n);
    if (dist_sum > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            q[i] = uniform + 0.5 * squared_distance(data.row(i), mean_span, counter) / dist_sum;
    } else {
        // Zero spread: the distance term degenerates, fall back to uniform.
        std::fill(q.begin(), q.end(), 2.0 * uniform);
    }

    std::vector<double> cdf(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += q[i];
        cdf[i] = acc;
    }
    cdf[n - 1] = 1.0;  // guard against accumulated rounding

    Rng rng(cfg.rng_seed);
    WeightedCoreset coreset{DataMatrix(n_core, data.dim()), std::vector<double>(n_core)};
    for (std::size_t m = 0; m < n_core; ++m) {
        const double u = rng.unit();
        // Cumulative-probability inversion; ties resolve to the lower index.
        const std::size_t i = static_cast<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const auto src = data.row(i);
        std::copy(src.begin(), src.end(), coreset.points.mutable_row(m).begin());
        coreset.weights[m] = 1.0 / (static_cast<double>(n_core) * q[i]);
    }
    return coreset;
}

WeightedCoreset identity_coreset(const DataMatrix& data) {
    return {data, std::vector<double>(data.n_points(), 1.0)};
}

}  // namespace vcgmm
