#pragma once

#include <cstdint>
#include <vector>

#include "vcgmm/counters.hpp"
#include "vcgmm/types.hpp"

namespace vcgmm {

struct LwcsConfig {
    std::size_t target_size = 0;  // N'
    std::uint64_t rng_seed = 0;
};

// Arithmetic mean over rows, single pass.
std::vector<double> data_mean(const DataMatrix& data);

// Lightweight coreset: sample N' indices i.i.d. (with replacement) from
//   q(n) = 1/2 * 1/N + 1/2 * d(y^(n), mean)^2 / sum_m d(y^(m), mean)^2,
// weight gamma^(n) = 1 / (N' q(n)). One pass for the normalizer and one for
// the q values, charging exactly 2N distance evaluations. When the data has
// zero spread around its mean, q falls back to uniform 1/N.
WeightedCoreset build_lightweight_coreset(const DataMatrix& data, const LwcsConfig& cfg,
                                          DistanceCounter& counter);

// All N points with unit weights; running the merged pipeline on this
// reproduces clustering without data reduction.
WeightedCoreset identity_coreset(const DataMatrix& data);

}  // namespace vcgmm
