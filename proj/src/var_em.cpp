#include "vcgmm/var_em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "vcgmm/model.hpp"
#include "vcgmm/parallel.hpp"
#include "vcgmm/stopwatch.hpp"

namespace vcgmm {

void VcGmmConfig::validate(std::size_t n_clusters) const {
    if (c_prime < 1 || c_prime > n_clusters)
        throw ContractViolation("VcGmmConfig: require 1 <= C' <= C");
    if (g_size < 1 || g_size > n_clusters)
        throw ContractViolation("VcGmmConfig: require 1 <= G <= C");
    if (!(convergence_epsilon > 0.0))
        throw ContractViolation("VcGmmConfig: convergence_epsilon must be positive");
    if (max_iterations < 1)
        throw ContractViolation("VcGmmConfig: max_iterations must be >= 1");
    if (workers < 1)
        throw ContractViolation("VcGmmConfig: workers must be >= 1");
}

double init_sigma(const WeightedCoreset& coreset, const DataMatrix& means,
                  const TruncatedState& state) {
    const std::size_t n_core = coreset.size();
    double num = 0.0;
    double weight_sum = 0.0;
    for (std::size_t n = 0; n < n_core; ++n) {
        const auto y = coreset.points.row(n);
        double best = std::numeric_limits<double>::infinity();
        for (std::uint32_t c : state.k_set(n))
            best = std::min(best, squared_distance(y, means.row(c)));
        num += coreset.weights[n] * best;
        weight_sum += coreset.weights[n];
    }
    const double raw = num / (static_cast<double>(coreset.dim()) * weight_sum);
    return std::max(raw, sigma_floor(coreset.points));
}

namespace {

// Variance estimate reusing the E-step winner distances (cache rows are
// sorted, entry 0 is min over K^(n)); identical to init_sigma values.
double sigma_from_cache(const WeightedCoreset& coreset, const EStepCache& cache) {
    double num = 0.0;
    double weight_sum = 0.0;
    for (std::size_t n = 0; n < coreset.size(); ++n) {
        num += coreset.weights[n] * cache.row(n)[0];
        weight_sum += coreset.weights[n];
    }
    const double raw = num / (static_cast<double>(coreset.dim()) * weight_sum);
    return std::max(raw, sigma_floor(coreset.points));
}

using DccAccum = std::unordered_map<std::uint64_t, std::pair<double, std::uint32_t>>;

std::uint64_t dcc_key(std::uint32_t c, std::uint32_t c2) {
    return (static_cast<std::uint64_t>(c) << 32) | c2;
}

}  // namespace

EStepCache variational_estep(const WeightedCoreset& coreset, const GmmParams& params,
                             TruncatedState& state, const VcGmmConfig& cfg, Rng& rng,
                             DistanceCounter& counter) {
    const std::size_t n_core = coreset.size();
    const std::size_t n_clusters = state.n_clusters();
    const std::size_t c_prime = state.c_prime();
    const std::size_t g_size = state.g_size();
    if (params.n_clusters() != n_clusters)
        throw ContractViolation("variational_estep: params/state cluster count mismatch");
    if (params.dim() != coreset.dim())
        throw ContractViolation("variational_estep: dimension mismatch");

    // One master draw per E-step; the per-point +1 draws derive from it so
    // they are independent of the worker layout.
    const std::uint64_t step_seed = cfg.plus_one_random ? rng.next() : 0;

    EStepCache cache{c_prime, std::vector<double>(n_core * c_prime)};

    struct WorkerLocal {
        DistanceCounter counter;
        DccAccum dcc;
    };
    const std::size_t workers = std::max<std::size_t>(cfg.workers, 1);
    std::vector<WorkerLocal> locals(workers);

    parallel_ranges(n_core, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
        WorkerLocal& local = locals[w];
        std::vector<std::uint32_t> search;           // G^(n), kept sorted
        std::vector<std::pair<double, std::uint32_t>> cand;
        search.reserve(c_prime * g_size + 1);
        cand.reserve(c_prime * g_size + 1);

        for (std::size_t n = begin; n < end; ++n) {
            search.clear();
            for (std::uint32_t c : state.k_set(n)) {
                const auto g = state.g_set(c);
                search.insert(search.end(), g.begin(), g.end());
            }
            std::sort(search.begin(), search.end());
            search.erase(std::unique(search.begin(), search.end()), search.end());

            if (cfg.plus_one_random && search.size() < n_clusters) {
                PointStream stream(step_seed, n);
                for (;;) {
                    const auto extra = static_cast<std::uint32_t>(stream.below(n_clusters));
                    const auto it = std::lower_bound(search.begin(), search.end(), extra);
                    if (it == search.end() || *it != extra) {
                        search.insert(it, extra);
                        break;
                    }
                }
            }

            const auto y = coreset.points.row(n);
            cand.clear();
            for (std::uint32_t c : search)
                cand.emplace_back(squared_distance(y, params.mean(c), local.counter), c);
            std::sort(cand.begin(), cand.end());  // by (distance, index)

            const auto k_out = state.mutable_k_set(n);
            for (std::size_t j = 0; j < c_prime; ++j) {
                k_out[j] = cand[j].second;
                cache.k_dists[n * c_prime + j] = cand[j].first;
            }
            const std::uint32_t winner = cand[0].second;
            state.winners()[n] = winner;

            for (const auto& [d, c2] : cand) {
                auto& entry = local.dcc[dcc_key(winner, c2)];
                entry.first += d;
                entry.second += 1;
            }
        }
    });

    // Merge in worker order: per-key sums are accumulated worker 0 first, so
    // the single-worker path is bit-deterministic and multi-worker runs can
    // differ only in this reduction order.
    DccAccum total;
    total.reserve(locals[0].dcc.size() * workers);
    for (const auto& local : locals) {
        counter.merge(local.counter);
        for (const auto& [key, entry] : local.dcc) {
            auto& t = total[key];
            t.first += entry.first;
            t.second += entry.second;
        }
    }

    auto& rows = state.cluster_dists();
    for (auto& row : rows) row.clear();
    {
        std::vector<std::uint64_t> keys;
        keys.reserve(total.size());
        for (const auto& [key, entry] : total) keys.push_back(key);
        std::sort(keys.begin(), keys.end());
        for (std::uint64_t key : keys) {
            const auto c = static_cast<std::uint32_t>(key >> 32);
            const auto c2 = static_cast<std::uint32_t>(key & 0xFFFFFFFFu);
            const auto& [sum, cnt] = total[key];
            const double avg = (c == c2) ? 0.0 : sum / static_cast<double>(cnt);
            rows[c].emplace_back(c2, avg);
        }
    }

    // Refresh neighborhoods: c itself first, then the G-1 nearest estimated
    // clusters; short rows are padded with the previous members.
    std::vector<std::pair<double, std::uint32_t>> near;
    std::vector<std::uint32_t> new_g;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        const auto& row = rows[c];
        if (row.empty()) continue;  // empty I_c: previous G_c is retained
        near.clear();
        for (const auto& [c2, avg] : row)
            if (c2 != c) near.emplace_back(avg, c2);
        std::sort(near.begin(), near.end());

        new_g.clear();
        new_g.push_back(static_cast<std::uint32_t>(c));
        for (const auto& [avg, c2] : near) {
            if (new_g.size() == g_size) break;
            new_g.push_back(c2);
        }
        if (new_g.size() < g_size) {
            for (std::uint32_t prev : state.g_set(c)) {
                if (new_g.size() == g_size) break;
                if (std::find(new_g.begin(), new_g.end(), prev) == new_g.end())
                    new_g.push_back(prev);
            }
        }
        std::copy(new_g.begin(), new_g.end(), state.mutable_g_set(c).begin());
    }

    return cache;
}

Responsibilities compute_responsibilities(const TruncatedState& state, const EStepCache& cache,
                                          double variance) {
    if (!(variance > 0.0))
        throw ContractViolation("compute_responsibilities: variance must be positive");
    const std::size_t n_core = state.n_points();
    const std::size_t c_prime = state.c_prime();
    Responsibilities resp{c_prime, std::vector<double>(n_core * c_prime)};
    for (std::size_t n = 0; n < n_core; ++n) {
        responsibilities_from_distances(cache.row(n), variance,
                                        {resp.values.data() + n * c_prime, c_prime});
    }
    return resp;
}

GmmParams mstep(const WeightedCoreset& coreset, const TruncatedState& state,
                const Responsibilities& resp, const GmmParams& old_params) {
    const std::size_t n_core = coreset.size();
    const std::size_t n_clusters = old_params.n_clusters();
    const std::size_t dim = old_params.dim();
    const std::size_t c_prime = state.c_prime();

    std::vector<double> mass(n_clusters, 0.0);
    std::vector<double> weighted_sum(n_clusters * dim, 0.0);
    double weight_sum = 0.0;
    for (std::size_t n = 0; n < n_core; ++n) {
        const auto y = coreset.points.row(n);
        const auto k = state.k_set(n);
        const auto s = resp.row(n);
        const double gamma = coreset.weights[n];
        weight_sum += gamma;
        for (std::size_t j = 0; j < c_prime; ++j) {
            const double w = gamma * s[j];
            mass[k[j]] += w;
            double* acc = weighted_sum.data() + k[j] * dim;
            for (std::size_t d = 0; d < dim; ++d) acc[d] += w * y[d];
        }
    }

    GmmParams out{DataMatrix(n_clusters, dim), old_params.variance};
    for (std::size_t c = 0; c < n_clusters; ++c) {
        const auto dst = out.means.mutable_row(c);
        if (mass[c] > 0.0) {
            const double* acc = weighted_sum.data() + c * dim;
            for (std::size_t d = 0; d < dim; ++d) dst[d] = acc[d] / mass[c];
        } else {
            const auto old = old_params.mean(c);
            std::copy(old.begin(), old.end(), dst.begin());
        }
    }

    double residual = 0.0;
    for (std::size_t n = 0; n < n_core; ++n) {
        const auto y = coreset.points.row(n);
        const auto k = state.k_set(n);
        const auto s = resp.row(n);
        const double gamma = coreset.weights[n];
        for (std::size_t j = 0; j < c_prime; ++j)
            residual += gamma * s[j] * detail::sq_dist(y.data(), out.mean(k[j]).data(), dim);
    }
    out.variance = std::max(residual / (static_cast<double>(dim) * weight_sum),
                            sigma_floor(coreset.points));
    return out;
}

FitResult fit(const DataMatrix& eval_data, const WeightedCoreset& coreset,
              const DataMatrix& seed_means, const VcGmmConfig& cfg) {
    coreset.validate();
    const std::size_t n_clusters = seed_means.n_points();
    cfg.validate(n_clusters);
    if (seed_means.dim() != coreset.dim() || eval_data.dim() != coreset.dim())
        throw ContractViolation("fit: dimension mismatch between data, coreset and seeds");

    FitResult result{GmmParams{seed_means, 1.0},
                     TruncatedState{},
                     RunReport{}};
    RunReport& report = result.report;
    report.algorithm = "vc-gmm";
    report.seed = cfg.rng_seed;

    Rng rng(cfg.rng_seed);
    result.state = TruncatedState::random_init(coreset.size(), n_clusters, cfg.c_prime,
                                               cfg.g_size, rng);

    const auto run_estep = [&](EStepCache& cache) {
        const std::uint64_t before = report.distance_counts.estep.value;
        cache = variational_estep(coreset, result.params, result.state, cfg, rng,
                                  report.distance_counts.estep);
        report.estep_evals_per_iter.push_back(report.distance_counts.estep.value - before);
    };

    // First E-step (independent of the variance), variance estimate, then
    // any configured extra E-steps before parameters move.
    Stopwatch sigma_clock;
    EStepCache cache;
    run_estep(cache);
    result.params.variance = sigma_from_cache(coreset, cache);
    for (std::size_t k = 0; k < cfg.n_initial_esteps; ++k) run_estep(cache);
    report.objective_trace.push_back(
        merged_objective_cached(coreset, result.params, result.state, cache));
    report.wall_times.sigma_init = sigma_clock.seconds();

    Stopwatch em_clock;
    for (std::size_t iter = 1; iter <= cfg.max_iterations; ++iter) {
        const Responsibilities resp =
            compute_responsibilities(result.state, cache, result.params.variance);
        result.params = mstep(coreset, result.state, resp, result.params);
        run_estep(cache);

        const double objective =
            merged_objective_cached(coreset, result.params, result.state, cache);
        if (!std::isfinite(objective))
            throw NumericalError("fit: merged objective became non-finite (check input scale)");
        const double previous = report.objective_trace.back();
        report.objective_trace.push_back(objective);
        report.n_iterations = iter;

        const double change = std::abs(objective - previous);
        const double denom = std::abs(objective);
        if (denom > 0.0 ? change / denom < cfg.convergence_epsilon
                        : change < cfg.convergence_epsilon) {
            report.converged = true;
            break;
        }
    }
    report.wall_times.em_loop = em_clock.seconds();
    report.final_objective = report.objective_trace.back();

    Stopwatch eval_clock;
    report.final_quantization_error =
        quantization_error(eval_data, result.params.means, report.distance_counts.evaluation);
    report.wall_times.evaluation = eval_clock.seconds();
    return result;
}

}  // namespace vcgmm
