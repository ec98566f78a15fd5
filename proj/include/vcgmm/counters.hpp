#pragma once

#include <cstdint>

namespace vcgmm {

// Instrumentation context for distance-evaluation accounting. Operations that
// evaluate squared distances take one of these by reference and charge one
// count per evaluation. Aggregation is a plain sum, so worker-local counters
// can be merged in any order.
struct DistanceCounter {
    std::uint64_t value = 0;

    void charge(std::uint64_t n = 1) { value += n; }
    void merge(const DistanceCounter& other) { value += other.value; }
};

// Per-phase channels. Evaluation-phase counts (quantization error, MAP
// partitions) are kept out of the algorithm channels so that reported
// algorithm costs stay comparable across methods.
struct PhaseCounters {
    DistanceCounter coreset;
    DistanceCounter seeding;
    DistanceCounter estep;
    DistanceCounter evaluation;

    std::uint64_t algorithm_total() const {
        return coreset.value + seeding.value + estep.value;
    }
};

}  // namespace vcgmm
