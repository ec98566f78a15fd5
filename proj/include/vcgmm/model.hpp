#pragma once

#include <span>
#include <vector>

#include "vcgmm/counters.hpp"
#include "vcgmm/types.hpp"

namespace vcgmm {

namespace detail {

// Unchecked kernel. All distance work in the library funnels through here.
inline double sq_dist(const double* x, const double* y, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t d = 0; d < dim; ++d) {
        const double diff = x[d] - y[d];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace detail

// Squared Euclidean distance. The counted overload charges one evaluation to
// the given counter.
double squared_distance(std::span<const double> x, std::span<const double> y);
double squared_distance(std::span<const double> x, std::span<const double> y,
                        DistanceCounter& counter);

// Truncated posterior weights over k_set, normalized in the log domain
// (minimum distance subtracted before exponentiating). `dists` may supply
// precomputed squared distances aligned with k_set; when empty they are
// computed from point and params.
std::vector<double> truncated_responsibilities(std::span<const double> point,
                                               const GmmParams& params,
                                               std::span<const std::uint32_t> k_set,
                                               std::span<const double> dists = {});

// Softmax of -d/(2 sigma^2) over one cached-distance row.
void responsibilities_from_distances(std::span<const double> dists, double variance,
                                     std::span<double> out);

// Merged objective F(K, Theta) = sum_n gamma^(n) log sum_{c in K^(n)} p(c, y^(n) | Theta),
// including the weight-scaled constant B(sigma) so values compare directly to
// log-likelihoods. Recomputes the required squared distances; uncounted
// (tests and diagnostics use this form).
double merged_objective(const WeightedCoreset& coreset, const GmmParams& params,
                        const TruncatedState& state);

// Same objective evaluated from E-step-cached distances: zero fresh
// distance evaluations. Cache rows must correspond to state.k_sets and to
// params' means.
double merged_objective_cached(const WeightedCoreset& coreset, const GmmParams& params,
                               const TruncatedState& state, const EStepCache& cache);

// The variational bound at fixed responsibilities,
//   sum_n gamma^(n) sum_{c in K^(n)} s_c^(n) [log p(c, y^(n)|Theta) - log s_c^(n)].
// Equal to merged_objective when s matches params; used for M-step
// stationarity checks and as a KL-gap diagnostic against the coreset
// likelihood.
double objective_given_responsibilities(const WeightedCoreset& coreset,
                                        const GmmParams& params,
                                        const TruncatedState& state,
                                        const Responsibilities& resp);

// Exact coreset log-likelihood L^core(Theta) over all C clusters, O(N'CD).
// Test/diagnostic path only.
double coreset_log_likelihood(const WeightedCoreset& coreset, const GmmParams& params);

// Exact quantization error sum_n min_c ||y^(n) - mu_c||^2 over all clusters,
// never truncated. The counted overload charges the evaluation channel.
double quantization_error(const DataMatrix& data, const DataMatrix& means);
double quantization_error(const DataMatrix& data, const DataMatrix& means,
                          DistanceCounter& counter);

// Lower floor for variance estimates, scaled to the data:
// 1e-12 * (mean squared row norm + 1).
double sigma_floor(const DataMatrix& points);

}  // namespace vcgmm
