#include "vcgmm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "vcgmm/model.hpp"

namespace vcgmm {

double relative_error(double q_algo, double q_baseline) {
    if (!(q_baseline > 0.0))
        throw ContractViolation("relative_error: baseline must be positive");
    return (q_algo - q_baseline) / q_baseline;
}

double nmi(const std::vector<std::uint32_t>& partition_a,
           const std::vector<std::uint32_t>& partition_b) {
    if (partition_a.size() != partition_b.size() || partition_a.empty())
        throw ContractViolation("nmi: partitions must have equal nonzero length");
    const std::size_t n = partition_a.size();

    std::unordered_map<std::uint32_t, double> count_a, count_b;
    std::unordered_map<std::uint64_t, double> joint;
    for (std::size_t i = 0; i < n; ++i) {
        count_a[partition_a[i]] += 1.0;
        count_b[partition_b[i]] += 1.0;
        joint[(static_cast<std::uint64_t>(partition_a[i]) << 32) | partition_b[i]] += 1.0;
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    double h_a = 0.0, h_b = 0.0, mi = 0.0;
    for (const auto& [label, c] : count_a) {
        const double p = c * inv_n;
        h_a -= p * std::log(p);
    }
    for (const auto& [label, c] : count_b) {
        const double p = c * inv_n;
        h_b -= p * std::log(p);
    }
    for (const auto& [key, c] : joint) {
        const double p = c * inv_n;
        const double pa = count_a[static_cast<std::uint32_t>(key >> 32)] * inv_n;
        const double pb = count_b[static_cast<std::uint32_t>(key & 0xFFFFFFFFu)] * inv_n;
        mi += p * std::log(p / (pa * pb));
    }

    if (h_a <= 0.0 || h_b <= 0.0) {
        // Constant partition(s): defined as 1 iff the partitions agree.
        return joint.size() == 1 ? 1.0 : 0.0;
    }
    return mi / std::sqrt(h_a * h_b);
}

namespace {

std::vector<std::uint32_t> map_partition_impl(const DataMatrix& data, const GmmParams& params,
                                              DistanceCounter* counter) {
    if (data.dim() != params.dim())
        throw ContractViolation("map_partition: dimension mismatch");
    const std::size_t n = data.n_points();
    const std::size_t n_clusters = params.n_clusters();
    const std::size_t dim = data.dim();

    std::vector<std::uint32_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* y = data.row(i).data();
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_c = 0;
        for (std::size_t c = 0; c < n_clusters; ++c) {
            const double d = detail::sq_dist(y, params.mean(c).data(), dim);
            if (d < best) {
                best = d;
                best_c = static_cast<std::uint32_t>(c);
            }
        }
        labels[i] = best_c;
    }
    if (counter) counter->charge(n * n_clusters);
    return labels;
}

}  // namespace

std::vector<std::uint32_t> map_partition(const DataMatrix& data, const GmmParams& params) {
    return map_partition_impl(data, params, nullptr);
}

std::vector<std::uint32_t> map_partition(const DataMatrix& data, const GmmParams& params,
                                         DistanceCounter& counter) {
    return map_partition_impl(data, params, &counter);
}

}  // namespace vcgmm
