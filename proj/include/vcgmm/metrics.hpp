#pragma once

#include <cstdint>
#include <vector>

#include "vcgmm/counters.hpp"
#include "vcgmm/types.hpp"

namespace vcgmm {

// Relative quantization error against a baseline value.
double relative_error(double q_algo, double q_baseline);

// Normalized mutual information of two hard partitions, I(A;B)/sqrt(H(A)H(B))
// with natural-log entropies. When either entropy is zero: 1 for identical
// partitions, 0 otherwise.
double nmi(const std::vector<std::uint32_t>& partition_a,
           const std::vector<std::uint32_t>& partition_b);

// Hard MAP partition: nearest mean per point over all clusters, ties to the
// lower index. The counted overload charges the evaluation channel.
std::vector<std::uint32_t> map_partition(const DataMatrix& data, const GmmParams& params);
std::vector<std::uint32_t> map_partition(const DataMatrix& data, const GmmParams& params,
                                         DistanceCounter& counter);

}  // namespace vcgmm
