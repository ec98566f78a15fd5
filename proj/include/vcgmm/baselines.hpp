#pragma once

#include <cstdint>
#include <vector>

#include "vcgmm/coreset.hpp"
#include "vcgmm/counters.hpp"
#include "vcgmm/report.hpp"
#include "vcgmm/seeding.hpp"
#include "vcgmm/types.hpp"
#include "vcgmm/var_em.hpp"

namespace vcgmm {

struct KMeansConfig {
    std::size_t n_clusters = 1;
    double convergence_epsilon = 1e-4;
    std::size_t max_iterations = 1000;
    std::uint64_t rng_seed = 0;
    std::size_t workers = 1;

    void validate() const;
};

// One Lloyd iteration on weighted data: hard nearest-center assignment
// (ties to the lower index), weighted centroid update, objective = weighted
// quantization error of the input means (reused from the assignment
// distances, no extra evaluations). Empty clusters retain their old mean.
struct LloydStep {
    DataMatrix means;
    std::vector<std::uint32_t> assignments;
    double objective = 0.0;
};
LloydStep lloyd_iterate(const WeightedCoreset& data, const DataMatrix& means,
                        DistanceCounter& counter, std::size_t workers = 1);

struct BaselineResult {
    DataMatrix means;
    RunReport report;
};

// D^2 seeding followed by Lloyd on the full data until the relative change
// of the quantization error falls below the threshold. The trace starts with
// the post-seeding objective. eval_data (defaulting to the training data)
// receives the final exact quantization error.
BaselineResult kmeanspp_fit(const DataMatrix& data, const KMeansConfig& cfg,
                            const DataMatrix* eval_data = nullptr);

// Lightweight coreset + AFK-MC^2 seeding + weighted Lloyd on the coreset;
// quality is evaluated on the full data (or eval_data when given).
BaselineResult lwcs_kmeans_fit(const DataMatrix& data, const LwcsConfig& lwcs_cfg,
                               const SeedingConfig& seed_cfg, const KMeansConfig& km_cfg,
                               const DataMatrix* eval_data = nullptr);

// vc-GMM with the identity coreset (all points, unit weights) and AFK-MC^2
// seeding; identical run-for-run to composing those pieces by hand.
FitResult var_gmm_s_fit(const DataMatrix& data, const SeedingConfig& seed_cfg,
                        const VcGmmConfig& em_cfg, const DataMatrix* eval_data = nullptr);

}  // namespace vcgmm
