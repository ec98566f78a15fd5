#include "vcgmm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vcgmm/model.hpp"
#include "vcgmm/parallel.hpp"
#include "vcgmm/stopwatch.hpp"

namespace vcgmm {

void KMeansConfig::validate() const {
    if (n_clusters < 1) throw ContractViolation("KMeansConfig: n_clusters must be >= 1");
    if (!(convergence_epsilon > 0.0))
        throw ContractViolation("KMeansConfig: convergence_epsilon must be positive");
    if (max_iterations < 1) throw ContractViolation("KMeansConfig: max_iterations must be >= 1");
    if (workers < 1) throw ContractViolation("KMeansConfig: workers must be >= 1");
}

LloydStep lloyd_iterate(const WeightedCoreset& data, const DataMatrix& means,
                        DistanceCounter& counter, std::size_t workers) {
    const std::size_t n = data.size();
    const std::size_t n_clusters = means.n_points();
    const std::size_t dim = means.dim();
    if (data.dim() != dim) throw ContractViolation("lloyd_iterate: dimension mismatch");

    struct WorkerLocal {
        DistanceCounter counter;
        double objective = 0.0;
        std::vector<double> mass;
        std::vector<double> acc;
    };
    workers = std::max<std::size_t>(workers, 1);
    std::vector<WorkerLocal> locals(workers);
    for (auto& l : locals) {
        l.mass.assign(n_clusters, 0.0);
        l.acc.assign(n_clusters * dim, 0.0);
    }
    std::vector<std::uint32_t> assignments(n);

    parallel_ranges(n, workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
        WorkerLocal& local = locals[w];
        for (std::size_t i = begin; i < end; ++i) {
            const double* y = data.points.row(i).data();
            double best = std::numeric_limits<double>::infinity();
            std::uint32_t best_c = 0;
            for (std::size_t c = 0; c < n_clusters; ++c) {
                const double d = detail::sq_dist(y, means.row(c).data(), dim);
                if (d < best) {
                    best = d;
                    best_c = static_cast<std::uint32_t>(c);
                }
            }
            local.counter.charge(n_clusters);
            assignments[i] = best_c;
            const double gamma = data.weights[i];
            local.objective += gamma * best;
            local.mass[best_c] += gamma;
            double* acc = local.acc.data() + best_c * dim;
            for (std::size_t d = 0; d < dim; ++d) acc[d] += gamma * y[d];
        }
    });

    double objective = 0.0;
    std::vector<double> mass(n_clusters, 0.0);
    std::vector<double> acc(n_clusters * dim, 0.0);
    for (const auto& local : locals) {
        counter.merge(local.counter);
        objective += local.objective;
        for (std::size_t c = 0; c < n_clusters; ++c) mass[c] += local.mass[c];
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += local.acc[i];
    }

    LloydStep step{DataMatrix(n_clusters, dim), std::move(assignments), objective};
    for (std::size_t c = 0; c < n_clusters; ++c) {
        const auto dst = step.means.mutable_row(c);
        if (mass[c] > 0.0) {
            for (std::size_t d = 0; d < dim; ++d) dst[d] = acc[c * dim + d] / mass[c];
        } else {
            const auto old = means.row(c);
            std::copy(old.begin(), old.end(), dst.begin());
        }
    }
    return step;
}

namespace {

// Lloyd loop shared by the k-means baselines. The trace holds the objective
// of each visited set of means, starting with the seeds.
void lloyd_loop(const WeightedCoreset& train, DataMatrix& means, const KMeansConfig& cfg,
                RunReport& report) {
    Stopwatch em_clock;
    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        const std::uint64_t before = report.distance_counts.estep.value;
        LloydStep step = lloyd_iterate(train, means, report.distance_counts.estep, cfg.workers);
        report.estep_evals_per_iter.push_back(report.distance_counts.estep.value - before);
        means = std::move(step.means);

        if (!std::isfinite(step.objective))
            throw NumericalError("lloyd_loop: objective became non-finite");
        report.objective_trace.push_back(step.objective);
        const std::size_t len = report.objective_trace.size();
        if (len >= 2) {
            report.n_iterations = len - 1;
            const double cur = report.objective_trace[len - 1];
            const double change = std::abs(cur - report.objective_trace[len - 2]);
            const double denom = std::abs(cur);
            if (denom > 0.0 ? change / denom < cfg.convergence_epsilon
                            : change < cfg.convergence_epsilon) {
                report.converged = true;
                break;
            }
        }
    }
    report.wall_times.em_loop = em_clock.seconds();
    report.final_objective = report.objective_trace.back();
}

void evaluate_final(const DataMatrix& eval_data, const DataMatrix& means, RunReport& report) {
    Stopwatch eval_clock;
    report.final_quantization_error =
        quantization_error(eval_data, means, report.distance_counts.evaluation);
    report.wall_times.evaluation = eval_clock.seconds();
}

}  // namespace

BaselineResult kmeanspp_fit(const DataMatrix& data, const KMeansConfig& cfg,
                            const DataMatrix* eval_data) {
    cfg.validate();
    BaselineResult result{DataMatrix(cfg.n_clusters, data.dim()), RunReport{}};
    result.report.algorithm = "kmeanspp";
    result.report.seed = cfg.rng_seed;

    Stopwatch seed_clock;
    SeedingConfig seed_cfg{cfg.n_clusters, 1, cfg.rng_seed};
    result.means = dsquared_seed(data, seed_cfg, result.report.distance_counts.seeding);
    result.report.wall_times.seeding = seed_clock.seconds();

    const WeightedCoreset full = identity_coreset(data);
    lloyd_loop(full, result.means, cfg, result.report);
    evaluate_final(eval_data ? *eval_data : data, result.means, result.report);
    return result;
}

BaselineResult lwcs_kmeans_fit(const DataMatrix& data, const LwcsConfig& lwcs_cfg,
                               const SeedingConfig& seed_cfg, const KMeansConfig& km_cfg,
                               const DataMatrix* eval_data) {
    km_cfg.validate();
    BaselineResult result{DataMatrix(km_cfg.n_clusters, data.dim()), RunReport{}};
    result.report.algorithm = "lwcs-kmeans";
    result.report.seed = km_cfg.rng_seed;

    Stopwatch coreset_clock;
    const WeightedCoreset coreset =
        build_lightweight_coreset(data, lwcs_cfg, result.report.distance_counts.coreset);
    result.report.wall_times.coreset = coreset_clock.seconds();

    Stopwatch seed_clock;
    result.means = afkmc2_seed(coreset, seed_cfg, result.report.distance_counts.seeding);
    result.report.wall_times.seeding = seed_clock.seconds();

    lloyd_loop(coreset, result.means, km_cfg, result.report);
    evaluate_final(eval_data ? *eval_data : data, result.means, result.report);
    return result;
}

FitResult var_gmm_s_fit(const DataMatrix& data, const SeedingConfig& seed_cfg,
                        const VcGmmConfig& em_cfg, const DataMatrix* eval_data) {
    const WeightedCoreset coreset = identity_coreset(data);

    Stopwatch seed_clock;
    DistanceCounter seeding_counter;
    const DataMatrix means = afkmc2_seed(coreset, seed_cfg, seeding_counter);
    const double seeding_time = seed_clock.seconds();

    FitResult result = fit(eval_data ? *eval_data : data, coreset, means, em_cfg);
    result.report.algorithm = "var-gmm-s";
    result.report.distance_counts.seeding = seeding_counter;
    result.report.wall_times.seeding = seeding_time;
    return result;
}

}  // namespace vcgmm
