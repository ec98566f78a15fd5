#pragma once

#include <cstdint>

#include "vcgmm/counters.hpp"
#include "vcgmm/types.hpp"

namespace vcgmm {

struct SeedingConfig {
    std::size_t n_clusters = 1;   // C
    std::size_t chain_length = 2; // m, Markov chain length (afkmc2 only)
    std::uint64_t rng_seed = 0;
};

// AFK-MC^2 seeding on a weighted coreset. The first center is sampled with
// probability proportional to gamma^(n); one pass over the coreset then
// builds the proposal
//   q(n) = 1/2 * gamma^(n) d(y^(n), c1)^2 / sum_m gamma^(m) d(y^(m), c1)^2
//        + 1/2 * gamma^(n) / sum_m gamma^(m),
// and each further center is the end state of a length-m Metropolis chain
// with acceptance min(1, d_min(y)^2 q(x) / (d_min(x)^2 q(y))), where d_min
// is the squared distance to the nearest already-chosen center. With unit
// weights this reduces to the unweighted algorithm.
DataMatrix afkmc2_seed(const WeightedCoreset& coreset, const SeedingConfig& cfg,
                       DistanceCounter& counter);

// Exact D^2 (k-means++) seeding on unweighted data; charges N(C-1)
// distance evaluations.
DataMatrix dsquared_seed(const DataMatrix& data, const SeedingConfig& cfg,
                         DistanceCounter& counter);

// C indices uniformly without replacement (with replacement once C > N).
DataMatrix uniform_seed(const DataMatrix& data, const SeedingConfig& cfg);

}  // namespace vcgmm
