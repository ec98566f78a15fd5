#include "vcgmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace vcgmm {

namespace {

// Per-unit-weight constant of the log joint: log(1/C) - (D/2) log(2 pi sigma^2).
double log_joint_constant(std::size_t n_clusters, std::size_t dim, double variance) {
    return -std::log(static_cast<double>(n_clusters)) -
           0.5 * static_cast<double>(dim) * std::log(2.0 * std::numbers::pi * variance);
}

// log sum_j exp(-d_j / (2 sigma^2)), stabilized by the minimum distance.
double log_sum_exp_neg(std::span<const double> dists, double variance) {
    double dmin = std::numeric_limits<double>::infinity();
    for (double d : dists) dmin = std::min(dmin, d);
    const double inv = 1.0 / (2.0 * variance);
    double acc = 0.0;
    for (double d : dists) acc += std::exp(-(d - dmin) * inv);
    return -dmin * inv + std::log(acc);
}

}  // namespace

double squared_distance(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ContractViolation("squared_distance: dimension mismatch");
    return detail::sq_dist(x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> x, std::span<const double> y,
                        DistanceCounter& counter) {
    counter.charge();
    return squared_distance(x, y);
}

void responsibilities_from_distances(std::span<const double> dists, double variance,
                                     std::span<double> out) {
    double dmin = std::numeric_limits<double>::infinity();
    for (double d : dists) dmin = std::min(dmin, d);
    const double inv = 1.0 / (2.0 * variance);
    double norm = 0.0;
    for (std::size_t j = 0; j < dists.size(); ++j) {
        out[j] = std::exp(-(dists[j] - dmin) * inv);
        norm += out[j];
    }
    for (std::size_t j = 0; j < dists.size(); ++j) out[j] /= norm;
}

std::vector<double> truncated_responsibilities(std::span<const double> point,
                                               const GmmParams& params,
                                               std::span<const std::uint32_t> k_set,
                                               std::span<const double> dists) {
    if (k_set.empty())
        throw ContractViolation("truncated_responsibilities: empty k_set");
    if (!(params.variance > 0.0))
        throw ContractViolation("truncated_responsibilities: variance must be positive");

    std::vector<double> d(k_set.size());
    if (!dists.empty()) {
        if (dists.size() != k_set.size())
            throw ContractViolation("truncated_responsibilities: cached distance size mismatch");
        std::copy(dists.begin(), dists.end(), d.begin());
    } else {
        for (std::size_t j = 0; j < k_set.size(); ++j)
            d[j] = squared_distance(point, params.mean(k_set[j]));
    }
    std::vector<double> s(k_set.size());
    responsibilities_from_distances(d, params.variance, s);
    return s;
}

double merged_objective(const WeightedCoreset& coreset, const GmmParams& params,
                        const TruncatedState& state) {
    const std::size_t n_core = coreset.size();
    const std::size_t c_prime = state.c_prime();
    const double constant = log_joint_constant(params.n_clusters(), params.dim(), params.variance);

    double f = 0.0;
    std::vector<double> d(c_prime);
    for (std::size_t n = 0; n < n_core; ++n) {
        const auto k = state.k_set(n);
        const auto y = coreset.points.row(n);
        for (std::size_t j = 0; j < c_prime; ++j) {
            if (k[j] >= params.n_clusters())
                throw ContractViolation("merged_objective: K^(n) references out-of-range cluster");
            d[j] = squared_distance(y, params.mean(k[j]));
        }
        f += coreset.weights[n] * log_sum_exp_neg(d, params.variance);
    }
    return f + coreset.weight_sum() * constant;
}

double merged_objective_cached(const WeightedCoreset& coreset, const GmmParams& params,
                               const TruncatedState& state, const EStepCache& cache) {
    const std::size_t n_core = coreset.size();
    if (cache.c_prime != state.c_prime())
        throw ContractViolation("merged_objective_cached: cache/state C' mismatch");
    const double constant = log_joint_constant(params.n_clusters(), params.dim(), params.variance);

    double f = 0.0;
    for (std::size_t n = 0; n < n_core; ++n)
        f += coreset.weights[n] * log_sum_exp_neg(cache.row(n), params.variance);
    return f + coreset.weight_sum() * constant;
}

double objective_given_responsibilities(const WeightedCoreset& coreset,
                                        const GmmParams& params,
                                        const TruncatedState& state,
                                        const Responsibilities& resp) {
    const std::size_t n_core = coreset.size();
    const std::size_t c_prime = state.c_prime();
    const double constant = log_joint_constant(params.n_clusters(), params.dim(), params.variance);
    const double inv = 1.0 / (2.0 * params.variance);

    double f = 0.0;
    for (std::size_t n = 0; n < n_core; ++n) {
        const auto k = state.k_set(n);
        const auto s = resp.row(n);
        const auto y = coreset.points.row(n);
        double term = 0.0;
        for (std::size_t j = 0; j < c_prime; ++j) {
            if (s[j] <= 0.0) continue;  // lim s log s = 0
            const double d = squared_distance(y, params.mean(k[j]));
            term += s[j] * (constant - d * inv - std::log(s[j]));
        }
        f += coreset.weights[n] * term;
    }
    return f;
}

double coreset_log_likelihood(const WeightedCoreset& coreset, const GmmParams& params) {
    if (!(params.variance > 0.0))
        throw ContractViolation("coreset_log_likelihood: variance must be positive");
    const std::size_t n_core = coreset.size();
    const std::size_t n_clusters = params.n_clusters();
    const double constant = log_joint_constant(n_clusters, params.dim(), params.variance);

    double l = 0.0;
    std::vector<double> d(n_clusters);
    for (std::size_t n = 0; n < n_core; ++n) {
        const auto y = coreset.points.row(n);
        for (std::size_t c = 0; c < n_clusters; ++c)
            d[c] = squared_distance(y, params.mean(c));
        l += coreset.weights[n] * log_sum_exp_neg(d, params.variance);
    }
    return l + coreset.weight_sum() * constant;
}

namespace {

double quantization_error_impl(const DataMatrix& data, const DataMatrix& means,
                               DistanceCounter* counter) {
    if (data.dim() != means.dim())
        throw ContractViolation("quantization_error: dimension mismatch");
    const std::size_t n = data.n_points();
    const std::size_t n_clusters = means.n_points();
    const std::size_t dim = data.dim();

    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* y = data.row(i).data();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n_clusters; ++c)
            best = std::min(best, detail::sq_dist(y, means.row(c).data(), dim));
        q += best;
    }
    if (counter) counter->charge(n * n_clusters);
    return q;
}

}  // namespace

double quantization_error(const DataMatrix& data, const DataMatrix& means) {
    return quantization_error_impl(data, means, nullptr);
}

double quantization_error(const DataMatrix& data, const DataMatrix& means,
                          DistanceCounter& counter) {
    return quantization_error_impl(data, means, &counter);
}

double sigma_floor(const DataMatrix& points) {
    double acc = 0.0;
    for (std::size_t n = 0; n < points.n_points(); ++n) {
        for (double v : points.row(n)) acc += v * v;
    }
    return 1e-12 * (acc / static_cast<double>(points.n_points()) + 1.0);
}

}  // namespace vcgmm
