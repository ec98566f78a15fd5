#include "vcgmm/experiment.hpp"

#include <cmath>
#include <fstream>

#include "vcgmm/coreset.hpp"
#include "vcgmm/metrics.hpp"
#include "vcgmm/model.hpp"
#include "vcgmm/seeding.hpp"
#include "vcgmm/stopwatch.hpp"

namespace vcgmm {

namespace {

constexpr std::uint64_t kCoresetStream = 1;
constexpr std::uint64_t kSeedingStream = 2;
constexpr std::uint64_t kEmStream = 3;

}  // namespace

std::string algorithm_name(Algorithm algo) {
    switch (algo) {
        case Algorithm::VcGmm: return "vc-gmm";
        case Algorithm::VarGmmS: return "var-gmm-s";
        case Algorithm::LwcsKmeans: return "lwcs-kmeans";
        case Algorithm::KmeansPP: return "kmeanspp";
        case Algorithm::SeedOnly: return "seed-only";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
    if (name == "vc-gmm") return Algorithm::VcGmm;
    if (name == "var-gmm-s") return Algorithm::VarGmmS;
    if (name == "lwcs-kmeans") return Algorithm::LwcsKmeans;
    if (name == "kmeanspp") return Algorithm::KmeansPP;
    if (name == "seed-only") return Algorithm::SeedOnly;
    throw ConfigError("unknown algorithm: " + name +
                      " (expected vc-gmm | var-gmm-s | lwcs-kmeans | kmeanspp | seed-only)");
}

void PipelineConfig::validate() const {
    if (n_clusters < 1) throw ConfigError("n_clusters must be >= 1");
    if (!(convergence_epsilon > 0.0)) throw ConfigError("epsilon must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (chain_length < 1) throw ConfigError("chain_length must be >= 1");
    if (algorithm == Algorithm::VcGmm || algorithm == Algorithm::VarGmmS) {
        if (c_prime < 1 || c_prime > n_clusters)
            throw ConfigError("require 1 <= c_prime <= clusters");
        if (g_size < 1 || g_size > n_clusters)
            throw ConfigError("require 1 <= g_size <= clusters");
    }
    if (algorithm == Algorithm::VarGmmS && coreset_size != 0)
        throw ConfigError("var-gmm-s runs on the full data; do not set a coreset size");
    if (algorithm == Algorithm::LwcsKmeans && coreset_size == 0)
        throw ConfigError("lwcs-kmeans requires a coreset size");
}

nlohmann::json PipelineConfig::echo(const std::string& dataset, double test_split) const {
    nlohmann::json j;
    j["algorithm"] = algorithm_name(algorithm);
    j["dataset"] = dataset;
    j["test_split"] = test_split;
    j["clusters"] = n_clusters;
    j["coreset_size"] = coreset_size;
    j["chain_length"] = chain_length;
    j["c_prime"] = c_prime;
    j["g_size"] = g_size;
    j["plus_one"] = plus_one_random;
    j["init_esteps"] = n_initial_esteps;
    j["epsilon"] = convergence_epsilon;
    j["max_iters"] = max_iterations;
    j["seed"] = seed;
    j["workers"] = workers;
    return j;
}

std::string PipelineConfig::label() const {
    std::string label = algorithm_name(algorithm);
    if (coreset_size > 0) label += " N'=" + std::to_string(coreset_size);
    if (algorithm == Algorithm::VcGmm || algorithm == Algorithm::VarGmmS) {
        label += " G=" + std::to_string(g_size);
        if (plus_one_random) label += "+1";
        label += " C'=" + std::to_string(c_prime);
    }
    if (algorithm == Algorithm::SeedOnly) label += " m=" + std::to_string(chain_length);
    return label;
}

DataSplit split_data(const DataMatrix& data, double test_fraction) {
    if (test_fraction < 0.0 || test_fraction >= 1.0)
        throw ConfigError("test_split must lie in [0, 1)");
    if (test_fraction == 0.0) return {data, data};

    const std::size_t n = data.n_points();
    const std::size_t n_eval = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * test_fraction));
    if (n_eval < 1 || n_eval >= n)
        throw ConfigError("test_split leaves an empty train or eval set");

    const std::size_t n_train = n - n_eval;
    const std::size_t dim = data.dim();
    std::vector<double> train(data.values().begin(), data.values().begin() + n_train * dim);
    std::vector<double> eval(data.values().begin() + n_train * dim, data.values().end());
    return {DataMatrix(n_train, dim, std::move(train)), DataMatrix(n_eval, dim, std::move(eval))};
}

RunReport run_pipeline(const DataMatrix& train, const DataMatrix& eval,
                       const PipelineConfig& cfg, GmmParams* model_out) {
    cfg.validate();
    const std::uint64_t coreset_seed = derive_seed(cfg.seed, kCoresetStream);
    const std::uint64_t seeding_seed = derive_seed(cfg.seed, kSeedingStream);
    const std::uint64_t em_seed = derive_seed(cfg.seed, kEmStream);

    const SeedingConfig seed_cfg{cfg.n_clusters, cfg.chain_length, seeding_seed};
    const KMeansConfig km_cfg{cfg.n_clusters, cfg.convergence_epsilon, cfg.max_iterations,
                              cfg.seed, cfg.workers};
    VcGmmConfig em_cfg;
    em_cfg.c_prime = cfg.c_prime;
    em_cfg.g_size = cfg.g_size;
    em_cfg.plus_one_random = cfg.plus_one_random;
    em_cfg.n_initial_esteps = cfg.n_initial_esteps;
    em_cfg.convergence_epsilon = cfg.convergence_epsilon;
    em_cfg.max_iterations = cfg.max_iterations;
    em_cfg.rng_seed = em_seed;
    em_cfg.workers = cfg.workers;

    RunReport report;
    GmmParams model;

    switch (cfg.algorithm) {
        case Algorithm::VcGmm:
        case Algorithm::VarGmmS: {
            WeightedCoreset coreset;
            double coreset_time = 0.0;
            DistanceCounter coreset_counter;
            if (cfg.coreset_size > 0) {
                Stopwatch clock;
                coreset = build_lightweight_coreset(train, {cfg.coreset_size, coreset_seed},
                                                    coreset_counter);
                coreset_time = clock.seconds();
            } else {
                coreset = identity_coreset(train);
            }

            Stopwatch seed_clock;
            DistanceCounter seeding_counter;
            const DataMatrix means = afkmc2_seed(coreset, seed_cfg, seeding_counter);
            const double seeding_time = seed_clock.seconds();

            FitResult result = fit(eval, coreset, means, em_cfg);
            report = std::move(result.report);
            report.algorithm = algorithm_name(cfg.algorithm);
            report.distance_counts.coreset = coreset_counter;
            report.distance_counts.seeding = seeding_counter;
            report.wall_times.coreset = coreset_time;
            report.wall_times.seeding = seeding_time;
            model = std::move(result.params);
            break;
        }
        case Algorithm::LwcsKmeans: {
            BaselineResult result =
                lwcs_kmeans_fit(train, {cfg.coreset_size, coreset_seed}, seed_cfg, km_cfg, &eval);
            report = std::move(result.report);
            model = GmmParams{std::move(result.means), 1.0};
            break;
        }
        case Algorithm::KmeansPP: {
            KMeansConfig pp_cfg = km_cfg;
            pp_cfg.rng_seed = seeding_seed;
            BaselineResult result = kmeanspp_fit(train, pp_cfg, &eval);
            report = std::move(result.report);
            model = GmmParams{std::move(result.means), 1.0};
            break;
        }
        case Algorithm::SeedOnly: {
            WeightedCoreset coreset;
            DistanceCounter coreset_counter;
            double coreset_time = 0.0;
            if (cfg.coreset_size > 0) {
                Stopwatch clock;
                coreset = build_lightweight_coreset(train, {cfg.coreset_size, coreset_seed},
                                                    coreset_counter);
                coreset_time = clock.seconds();
            } else {
                coreset = identity_coreset(train);
            }
            Stopwatch seed_clock;
            DataMatrix means = afkmc2_seed(coreset, seed_cfg, report.distance_counts.seeding);
            report.wall_times.seeding = seed_clock.seconds();
            report.distance_counts.coreset = coreset_counter;
            report.wall_times.coreset = coreset_time;

            Stopwatch eval_clock;
            report.final_quantization_error =
                quantization_error(eval, means, report.distance_counts.evaluation);
            report.wall_times.evaluation = eval_clock.seconds();
            report.objective_trace = {report.final_quantization_error};
            report.final_objective = report.final_quantization_error;
            report.converged = true;
            model = GmmParams{std::move(means), 1.0};
            break;
        }
    }

    report.algorithm = algorithm_name(cfg.algorithm);
    report.seed = cfg.seed;
    if (model_out) *model_out = std::move(model);
    return report;
}

namespace {

nlohmann::json aggregate_config(const std::vector<RunReport>& runs, const std::string& label,
                                const nlohmann::json& config_echo) {
    std::vector<double> q, eta, nmi_values, iters, total_time, coreset_frac, seed_frac;
    std::vector<double> evals_total, evals_coreset, evals_seeding, evals_estep, evals_eval;
    std::size_t failures = 0;
    for (const auto& r : runs) {
        if (r.status != "ok") {
            ++failures;
            continue;
        }
        q.push_back(r.final_quantization_error);
        if (r.has_eta) eta.push_back(r.eta);
        if (r.has_nmi) nmi_values.push_back(r.nmi_vs_baseline);
        iters.push_back(static_cast<double>(r.n_iterations));
        const double total = r.wall_times.total();
        total_time.push_back(total);
        if (total > 0.0) {
            coreset_frac.push_back(r.wall_times.coreset / total);
            seed_frac.push_back(r.wall_times.seeding / total);
        }
        evals_total.push_back(static_cast<double>(r.distance_counts.algorithm_total()));
        evals_coreset.push_back(static_cast<double>(r.distance_counts.coreset.value));
        evals_seeding.push_back(static_cast<double>(r.distance_counts.seeding.value));
        evals_estep.push_back(static_cast<double>(r.distance_counts.estep.value));
        evals_eval.push_back(static_cast<double>(r.distance_counts.evaluation.value));
    }

    const auto stats = [](const std::vector<double>& v) {
        const MeanSem ms = mean_sem(v);
        return nlohmann::json{{"mean", ms.mean}, {"sem", ms.sem}, {"n", ms.count}};
    };

    nlohmann::json j;
    j["label"] = label;
    j["config"] = config_echo;
    j["n_runs"] = runs.size();
    j["n_failures"] = failures;
    j["quantization_error"] = stats(q);
    if (!eta.empty()) j["eta"] = stats(eta);
    if (!nmi_values.empty()) j["nmi"] = stats(nmi_values);
    j["iterations"] = stats(iters);
    j["wall_time_total"] = stats(total_time);
    j["wall_time_coreset_fraction"] = stats(coreset_frac);
    j["wall_time_seeding_fraction"] = stats(seed_frac);
    j["distance_evaluations"] = {
        {"algorithm", stats(evals_total)}, {"coreset", stats(evals_coreset)},
        {"seeding", stats(evals_seeding)}, {"estep", stats(evals_estep)},
        {"evaluation", stats(evals_eval)},
    };
    return j;
}

}  // namespace

ExperimentResult run_experiment(const DataMatrix& data, const ExperimentSpec& spec) {
    if (spec.configurations.empty()) throw ConfigError("experiment has no configurations");
    if (spec.seeds.empty()) throw ConfigError("experiment has no seeds");

    const DataSplit split = split_data(data, spec.test_split);
    ExperimentResult result;
    result.summary["dataset"] = spec.dataset_label;
    result.summary["algorithm"] = algorithm_name(spec.algorithm);
    result.summary["test_split"] = spec.test_split;
    result.summary["seeds"] = spec.seeds;

    // Baseline grid first: its mean quantization error anchors eta and its
    // per-seed partitions anchor NMI.
    std::optional<double> baseline_q = spec.baseline_q;
    std::vector<std::vector<std::uint32_t>> baseline_partitions;
    if (spec.with_baseline) {
        std::vector<RunReport> baseline_runs;
        std::vector<double> baseline_qs;
        for (std::uint64_t seed : spec.seeds) {
            PipelineConfig cfg = spec.configurations.front();
            cfg.algorithm = Algorithm::KmeansPP;
            cfg.coreset_size = 0;
            cfg.seed = seed;
            GmmParams model;
            RunReport report = run_pipeline(split.train, split.eval, cfg, &model);
            report.config_echo = cfg.echo(spec.dataset_label, spec.test_split);
            baseline_partitions.push_back(
                map_partition(split.eval, model, report.distance_counts.evaluation));
            baseline_qs.push_back(report.final_quantization_error);
            baseline_runs.push_back(std::move(report));
        }
        baseline_q = mean_sem(baseline_qs).mean;
        result.summary["baseline"] =
            aggregate_config(baseline_runs, "kmeanspp (baseline)",
                             baseline_runs.front().config_echo);
        result.summary["baseline_q_mean"] = *baseline_q;
        for (auto& r : baseline_runs) result.runs.push_back(std::move(r));
    }

    nlohmann::json config_summaries = nlohmann::json::array();
    for (const PipelineConfig& base_cfg : spec.configurations) {
        PipelineConfig grid_cfg = base_cfg;
        grid_cfg.algorithm = spec.algorithm;
        std::vector<RunReport> config_runs;
        for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
            PipelineConfig cfg = grid_cfg;
            cfg.seed = spec.seeds[i];
            RunReport report;
            GmmParams model;
            try {
                report = run_pipeline(split.train, split.eval, cfg, &model);
                if (baseline_q) {
                    report.eta = relative_error(report.final_quantization_error, *baseline_q);
                    report.has_eta = true;
                }
                if (i < baseline_partitions.size()) {
                    const auto partition =
                        map_partition(split.eval, model, report.distance_counts.evaluation);
                    report.nmi_vs_baseline = nmi(partition, baseline_partitions[i]);
                    report.has_nmi = true;
                }
            } catch (const std::exception& e) {
                report = RunReport{};
                report.status = "failed";
                report.error_message = e.what();
            }
            report.algorithm = algorithm_name(spec.algorithm);
            report.seed = cfg.seed;
            report.config_echo = cfg.echo(spec.dataset_label, spec.test_split);
            config_runs.push_back(std::move(report));
        }
        config_summaries.push_back(aggregate_config(config_runs, grid_cfg.label(),
                                                    config_runs.front().config_echo));
        for (auto& r : config_runs) result.runs.push_back(std::move(r));
    }
    result.summary["configurations"] = std::move(config_summaries);
    return result;
}

void write_runs_jsonl(const std::vector<RunReport>& runs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open results file for writing: " + path);
    for (const auto& r : runs) out << report_to_json(r).dump() << "\n";
}

void write_summary(const nlohmann::json& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open summary file for writing: " + path);
    out << summary.dump(2) << "\n";
}

}  // namespace vcgmm
