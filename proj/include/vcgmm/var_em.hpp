#pragma once

#include <cstdint>

#include "vcgmm/counters.hpp"
#include "vcgmm/report.hpp"
#include "vcgmm/rng.hpp"
#include "vcgmm/types.hpp"

namespace vcgmm {

struct VcGmmConfig {
    std::size_t c_prime = 5;          // |K^(n)|
    std::size_t g_size = 5;           // |G_c|
    bool plus_one_random = false;     // one extra random cluster per search space
    std::size_t n_initial_esteps = 0; // E-steps before the first M-step (beyond the mandatory one)
    double convergence_epsilon = 1e-4;
    std::size_t max_iterations = 1000;
    std::uint64_t rng_seed = 0;
    std::size_t workers = 1;          // E-step parallelism; 1 is bit-deterministic

    void validate(std::size_t n_clusters) const;
};

// Initial variance estimate from the current cluster assignments:
//   sigma^2 = sum_n gamma^(n) min_{c in K^(n)} ||mu_c - y^(n)||^2 / (D sum_n gamma^(n)),
// floored at sigma_floor(coreset.points). Requires at least one E-step's
// K^(n) to be populated.
double init_sigma(const WeightedCoreset& coreset, const DataMatrix& means,
                  const TruncatedState& state);

// One pass of the variational loop. For each point the search space
// G^(n) = union of G_c over c in K^(n) (plus one random cluster when
// configured) is scanned, K^(n) is replaced by the C' closest clusters, the
// partition and the averaged cluster-to-cluster distances d_cc' are rebuilt,
// and every neighborhood G_c with a nonempty partition cell is refreshed
// from its d_cc' row. Charges exactly sum_n |G^(n)| distance evaluations.
// Returns the squared distances of each point to its new K^(n), which
// responsibilities and the objective reuse without further evaluations.
//
// cfg.workers > 1 splits the point loop; results may then differ from the
// single-worker run only through the reduction order of the d_cc' averages.
EStepCache variational_estep(const WeightedCoreset& coreset, const GmmParams& params,
                             TruncatedState& state, const VcGmmConfig& cfg, Rng& rng,
                             DistanceCounter& counter);

// Truncated posteriors from E-step-cached distances.
Responsibilities compute_responsibilities(const TruncatedState& state, const EStepCache& cache,
                                          double variance);

// Weighted M-step: responsibility-weighted means, then the shared isotropic
// variance from residuals against the updated means. Clusters with zero
// responsibility mass keep their previous mean; the variance is floored.
GmmParams mstep(const WeightedCoreset& coreset, const TruncatedState& state,
                const Responsibilities& resp, const GmmParams& old_params);

struct FitResult {
    GmmParams params;
    TruncatedState state;
    RunReport report;
};

// Full fit driver: random K/G initialization, one E-step, variance
// estimation, optional initial E-steps, then EM iterations until the
// relative objective change drops below cfg.convergence_epsilon or
// max_iterations is reached. The objective trace has one entry before the
// loop plus one per iteration; eval_data is only used for the final exact
// quantization error (charged to the evaluation channel).
FitResult fit(const DataMatrix& eval_data, const WeightedCoreset& coreset,
              const DataMatrix& seed_means, const VcGmmConfig& cfg);

}  // namespace vcgmm
