#include "vcgmm/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "vcgmm/coreset.hpp"
#include "vcgmm/experiment.hpp"
#include "vcgmm/io.hpp"
#include "vcgmm/metrics.hpp"
#include "vcgmm/model.hpp"
#include "vcgmm/seeding.hpp"

namespace vcgmm {

namespace {

struct CliOptions {
    std::string data_path;
    std::string algorithm = "vc-gmm";
    std::size_t clusters = 1;
    std::size_t c_prime = 0;  // 0: min(5, clusters)
    std::size_t g_size = 0;   // 0: min(5, clusters)
    bool plus_one = false;
    std::vector<std::size_t> coreset_sizes;  // bench sweeps; fit uses the first
    std::size_t chain_length = 2;
    double epsilon = 1e-4;
    std::size_t max_iters = 1000;
    std::uint64_t seed = 1;
    std::vector<std::uint64_t> seeds;
    std::size_t runs = 0;
    std::size_t init_esteps = 0;
    double test_split = 0.0;
    std::size_t workers = 1;
    std::string out;
    bool with_baseline = false;
    double baseline_q = 0.0;
    bool baseline_q_set = false;

    // seed subcommand
    std::string method = "afkmc2";
    bool evaluate = false;

    // eval subcommand
    std::string model_path;
    std::string baseline_model_path;
};

void add_algorithm_flags(CLI::App* cmd, CliOptions& opt, bool sweep) {
    cmd->add_option("--data", opt.data_path, "Dataset path (.csv or binary)")->required();
    cmd->add_option("--algorithm", opt.algorithm,
                    "vc-gmm | var-gmm-s | lwcs-kmeans | kmeanspp | seed-only");
    cmd->add_option("--clusters", opt.clusters, "Number of clusters C")->required();
    cmd->add_option("--c-prime", opt.c_prime, "Winning clusters per point C' (default min(5, C))");
    cmd->add_option("--g-size", opt.g_size, "Cluster neighborhood size G (default min(5, C))");
    cmd->add_flag("--plus-one", opt.plus_one, "Add one random cluster per search space");
    auto* cs = cmd->add_option("--coreset-size", opt.coreset_sizes,
                               sweep ? "Coreset size N' (repeat or comma-list for a sweep)"
                                     : "Coreset size N' (omit to use the full data)");
    cs->delimiter(',');
    cmd->add_option("--chain-length", opt.chain_length, "AFK-MC^2 Markov chain length m");
    cmd->add_option("--epsilon", opt.epsilon, "Relative-change convergence threshold");
    cmd->add_option("--max-iters", opt.max_iters, "Maximum EM iterations");
    cmd->add_option("--init-esteps", opt.init_esteps, "Initial E-steps before the first M-step");
    cmd->add_option("--test-split", opt.test_split, "Held-out fraction for evaluation");
    cmd->add_option("--workers", opt.workers, "E-step worker threads (1 = deterministic)");
}

PipelineConfig make_pipeline_config(const CliOptions& opt, std::size_t coreset_size) {
    PipelineConfig cfg;
    cfg.algorithm = parse_algorithm(opt.algorithm);
    cfg.n_clusters = opt.clusters;
    cfg.coreset_size = coreset_size;
    cfg.chain_length = opt.chain_length;
    cfg.c_prime = opt.c_prime > 0 ? opt.c_prime : std::min<std::size_t>(5, opt.clusters);
    cfg.g_size = opt.g_size > 0 ? opt.g_size : std::min<std::size_t>(5, opt.clusters);
    cfg.plus_one_random = opt.plus_one;
    cfg.n_initial_esteps = opt.init_esteps;
    cfg.convergence_epsilon = opt.epsilon;
    cfg.max_iterations = opt.max_iters;
    cfg.seed = opt.seed;
    cfg.workers = opt.workers;
    return cfg;
}

// Default repetition count for bench grids; results are reported as mean and
// SEM over these runs.
constexpr std::size_t kDefaultBenchRuns = 50;

std::vector<std::uint64_t> resolve_seeds(const CliOptions& opt) {
    if (!opt.seeds.empty()) return opt.seeds;
    const std::size_t runs = opt.runs > 0 ? opt.runs : kDefaultBenchRuns;
    std::vector<std::uint64_t> seeds(runs);
    for (std::size_t i = 0; i < runs; ++i) seeds[i] = opt.seed + i;
    return seeds;
}

void print_counts(const RunReport& r) {
    const auto& c = r.distance_counts;
    std::printf("distance evaluations: coreset=%llu seeding=%llu e-step=%llu | algorithm=%llu"
                " (evaluation=%llu, separate channel)\n",
                static_cast<unsigned long long>(c.coreset.value),
                static_cast<unsigned long long>(c.seeding.value),
                static_cast<unsigned long long>(c.estep.value),
                static_cast<unsigned long long>(c.algorithm_total()),
                static_cast<unsigned long long>(c.evaluation.value));
}

void print_times(const RunReport& r) {
    const auto& t = r.wall_times;
    const double total = t.total();
    const auto frac = [&](double x) { return total > 0.0 ? 100.0 * x / total : 0.0; };
    std::printf("wall time [s]: total=%.3f coreset=%.3f (%.1f%%) seeding=%.3f (%.1f%%)"
                " sigma-init=%.3f em-loop=%.3f evaluation=%.3f\n",
                total, t.coreset, frac(t.coreset), t.seeding, frac(t.seeding), t.sigma_init,
                t.em_loop, t.evaluation);
}

void print_run_summary(const RunReport& r) {
    std::printf("algorithm: %s  seed: %llu\n", r.algorithm.c_str(),
                static_cast<unsigned long long>(r.seed));
    std::printf("iterations: %zu (%s)\n", r.n_iterations,
                r.converged ? "converged" : "max iterations reached");
    std::printf("final objective: %.10g\n", r.final_objective);
    std::printf("quantization error: %.10g\n", r.final_quantization_error);
    if (r.has_eta) std::printf("relative error eta: %.4f\n", r.eta);
    if (r.has_nmi) std::printf("NMI vs baseline: %.4f\n", r.nmi_vs_baseline);
    print_counts(r);
    print_times(r);
}

int cmd_fit(const CliOptions& opt) {
    const DataMatrix data = load_matrix(opt.data_path);
    const DataSplit split = split_data(data, opt.test_split);
    const std::size_t coreset_size = opt.coreset_sizes.empty() ? 0 : opt.coreset_sizes.front();
    PipelineConfig cfg = make_pipeline_config(opt, coreset_size);

    GmmParams model;
    RunReport report = run_pipeline(split.train, split.eval, cfg, &model);
    report.config_echo = cfg.echo(opt.data_path, opt.test_split);
    print_run_summary(report);

    if (!opt.out.empty()) {
        save_model(model, opt.out + ".model.json");
        write_runs_jsonl({report}, opt.out + ".report.jsonl");
        std::printf("wrote %s.model.json and %s.report.jsonl\n", opt.out.c_str(),
                    opt.out.c_str());
    }
    return 0;
}

int cmd_bench(const CliOptions& opt) {
    const DataMatrix data = load_matrix(opt.data_path);

    ExperimentSpec spec;
    spec.dataset_label = opt.data_path;
    spec.algorithm = parse_algorithm(opt.algorithm);
    spec.seeds = resolve_seeds(opt);
    spec.test_split = opt.test_split;
    spec.with_baseline = opt.with_baseline;
    if (opt.baseline_q_set) spec.baseline_q = opt.baseline_q;

    std::vector<std::size_t> sizes = opt.coreset_sizes;
    if (sizes.empty()) sizes.push_back(0);
    for (std::size_t size : sizes) spec.configurations.push_back(make_pipeline_config(opt, size));
    for (const auto& cfg : spec.configurations) cfg.validate();  // fail before any compute

    const ExperimentResult result = run_experiment(data, spec);

    const auto print_agg = [](const nlohmann::json& agg, double baseline_evals) {
        const double q_mean = agg["quantization_error"]["mean"].get<double>();
        const double q_sem = agg["quantization_error"]["sem"].get<double>();
        const double evals = agg["distance_evaluations"]["algorithm"]["mean"].get<double>();
        std::printf("%-28s Q = %.6g +- %.2g | evals %.4g", agg["label"].get<std::string>().c_str(),
                    q_mean, q_sem, evals);
        if (agg.contains("eta"))
            std::printf(" | eta = %.4f +- %.4f", agg["eta"]["mean"].get<double>(),
                        agg["eta"]["sem"].get<double>());
        if (agg.contains("nmi")) std::printf(" | NMI = %.4f", agg["nmi"]["mean"].get<double>());
        if (baseline_evals > 0.0 && evals > 0.0)
            std::printf(" | speedup %.2fx", baseline_evals / evals);
        const auto failures = agg["n_failures"].get<std::size_t>();
        if (failures > 0) std::printf(" | FAILURES: %zu", failures);
        std::printf("\n");
    };

    double baseline_evals = 0.0;
    if (result.summary.contains("baseline")) {
        baseline_evals =
            result.summary["baseline"]["distance_evaluations"]["algorithm"]["mean"].get<double>();
        print_agg(result.summary["baseline"], 0.0);
    }
    for (const auto& agg : result.summary["configurations"]) print_agg(agg, baseline_evals);

    if (!opt.out.empty()) {
        write_runs_jsonl(result.runs, opt.out + ".runs.jsonl");
        write_summary(result.summary, opt.out + ".summary.json");
        std::printf("wrote %s.runs.jsonl and %s.summary.json\n", opt.out.c_str(), opt.out.c_str());
    }
    return 0;
}

int cmd_coreset(const CliOptions& opt) {
    if (opt.coreset_sizes.empty()) throw ConfigError("coreset: --coreset-size is required");
    if (opt.out.empty()) throw ConfigError("coreset: --out is required");
    const DataMatrix data = load_matrix(opt.data_path);

    DistanceCounter counter;
    const WeightedCoreset coreset =
        build_lightweight_coreset(data, {opt.coreset_sizes.front(), opt.seed}, counter);
    write_binary(coreset.points, opt.out + ".points.bin");
    save_weights(coreset.weights, opt.out + ".weights.txt");
    std::printf("coreset: N'=%zu of N=%zu, weight sum %.6g, %llu distance evaluations\n",
                coreset.size(), data.n_points(), coreset.weight_sum(),
                static_cast<unsigned long long>(counter.value));
    std::printf("wrote %s.points.bin and %s.weights.txt\n", opt.out.c_str(), opt.out.c_str());
    return 0;
}

int cmd_seed(const CliOptions& opt) {
    if (opt.out.empty()) throw ConfigError("seed: --out is required");
    const DataMatrix data = load_matrix(opt.data_path);
    const std::uint64_t coreset_seed = derive_seed(opt.seed, 1);
    const std::uint64_t seeding_seed = derive_seed(opt.seed, 2);
    const SeedingConfig cfg{opt.clusters, opt.chain_length, seeding_seed};

    DistanceCounter coreset_counter, seeding_counter;
    DataMatrix means(1, 1);
    if (opt.method == "afkmc2") {
        WeightedCoreset coreset;
        if (!opt.coreset_sizes.empty())
            coreset = build_lightweight_coreset(data, {opt.coreset_sizes.front(), coreset_seed},
                                                coreset_counter);
        else
            coreset = identity_coreset(data);
        means = afkmc2_seed(coreset, cfg, seeding_counter);
    } else if (opt.method == "dsquared") {
        means = dsquared_seed(data, cfg, seeding_counter);
    } else if (opt.method == "uniform") {
        means = uniform_seed(data, cfg);
    } else {
        throw ConfigError("seed: unknown method " + opt.method +
                          " (expected afkmc2 | dsquared | uniform)");
    }

    write_csv(means, opt.out);
    std::printf("seeding: method=%s C=%zu m=%zu, %llu distance evaluations"
                " (+%llu coreset)\n",
                opt.method.c_str(), opt.clusters, opt.chain_length,
                static_cast<unsigned long long>(seeding_counter.value),
                static_cast<unsigned long long>(coreset_counter.value));
    if (opt.evaluate) {
        const double q = quantization_error(data, means);
        std::printf("post-seeding quantization error: %.10g\n", q);
    }
    std::printf("wrote %s\n", opt.out.c_str());
    return 0;
}

int cmd_eval(const CliOptions& opt) {
    const DataMatrix data = load_matrix(opt.data_path);
    const DataSplit split = split_data(data, opt.test_split);
    const GmmParams model = load_model(opt.model_path);

    const double q = quantization_error(split.eval, model.means);
    std::printf("quantization error: %.10g\n", q);
    if (!opt.baseline_model_path.empty()) {
        const GmmParams baseline = load_model(opt.baseline_model_path);
        const double q_base = quantization_error(split.eval, baseline.means);
        std::printf("baseline quantization error: %.10g\n", q_base);
        std::printf("relative error eta: %.6f\n", relative_error(q, q_base));
        const auto part_a = map_partition(split.eval, model);
        const auto part_b = map_partition(split.eval, baseline);
        std::printf("NMI: %.6f\n", nmi(part_a, part_b));
    }
    return 0;
}

}  // namespace

int main_cli(std::vector<std::string> args) {
    CLI::App app{"vcgmm: coreset + truncated variational EM clustering engine"};
    app.require_subcommand(1);
    CliOptions opt;

    CLI::App* fit_cmd = app.add_subcommand("fit", "Run one clustering fit");
    add_algorithm_flags(fit_cmd, opt, false);
    fit_cmd->add_option("--seed", opt.seed, "Master RNG seed");
    fit_cmd->add_option("--out", opt.out, "Output prefix for model and report");

    CLI::App* bench_cmd = app.add_subcommand("bench", "Run a seed grid and aggregate");
    add_algorithm_flags(bench_cmd, opt, true);
    bench_cmd->add_option("--seed", opt.seed, "Base seed when --seeds/--runs derive a list");
    bench_cmd->add_option("--seeds", opt.seeds, "Explicit seed list (comma-separated)")
        ->delimiter(',');
    bench_cmd->add_option("--runs", opt.runs,
                          "Number of runs (seeds = seed, seed+1, ...; default 50)");
    bench_cmd->add_flag("--with-baseline", opt.with_baseline,
                        "Also run the k-means++ baseline grid (enables eta and NMI)");
    bench_cmd->add_option("--baseline-q", opt.baseline_q,
                          "External baseline quantization error for eta")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--out", opt.out, "Output prefix for runs and summary files");

    CLI::App* coreset_cmd = app.add_subcommand("coreset", "Build and save a lightweight coreset");
    coreset_cmd->add_option("--data", opt.data_path, "Dataset path")->required();
    coreset_cmd->add_option("--coreset-size", opt.coreset_sizes, "Coreset size N'")
        ->required()
        ->delimiter(',');
    coreset_cmd->add_option("--seed", opt.seed, "RNG seed");
    coreset_cmd->add_option("--out", opt.out, "Output prefix")->required();

    CLI::App* seed_cmd = app.add_subcommand("seed", "Compute initial cluster means only");
    seed_cmd->add_option("--data", opt.data_path, "Dataset path")->required();
    seed_cmd->add_option("--method", opt.method, "afkmc2 | dsquared | uniform");
    seed_cmd->add_option("--clusters", opt.clusters, "Number of clusters C")->required();
    seed_cmd->add_option("--chain-length", opt.chain_length, "AFK-MC^2 chain length m");
    seed_cmd->add_option("--coreset-size", opt.coreset_sizes,
                         "Seed on a lightweight coreset of this size")
        ->delimiter(',');
    seed_cmd->add_option("--seed", opt.seed, "Master RNG seed");
    seed_cmd->add_flag("--evaluate", opt.evaluate, "Print the post-seeding quantization error");
    seed_cmd->add_option("--out", opt.out, "Output CSV of means")->required();

    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate metrics for a saved model");
    eval_cmd->add_option("--data", opt.data_path, "Dataset path")->required();
    eval_cmd->add_option("--model", opt.model_path, "Model JSON path")->required();
    eval_cmd->add_option("--baseline-model", opt.baseline_model_path,
                         "Second model for eta and NMI");
    eval_cmd->add_option("--test-split", opt.test_split, "Held-out fraction for evaluation");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << "Run with --help for usage.\n";
        return 1;
    }
    opt.baseline_q_set = bench_cmd->count("--baseline-q") > 0;

    try {
        if (app.got_subcommand(fit_cmd)) return cmd_fit(opt);
        if (app.got_subcommand(bench_cmd)) return cmd_bench(opt);
        if (app.got_subcommand(coreset_cmd)) return cmd_coreset(opt);
        if (app.got_subcommand(seed_cmd)) return cmd_seed(opt);
        if (app.got_subcommand(eval_cmd)) return cmd_eval(opt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const ContractViolation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return 3;
    }
    return 1;
}

}  // namespace vcgmm
