#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcgmm/baselines.hpp"
#include "vcgmm/report.hpp"
#include "vcgmm/types.hpp"
#include "vcgmm/var_em.hpp"

namespace vcgmm {

enum class Algorithm { VcGmm, VarGmmS, LwcsKmeans, KmeansPP, SeedOnly };

std::string algorithm_name(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);

// One fully-specified run, mirroring the CLI flags. Sub-seeds for coreset
// construction, seeding and EM are derived from `seed`, so one master seed
// reproduces the whole run.
struct PipelineConfig {
    Algorithm algorithm = Algorithm::VcGmm;
    std::size_t n_clusters = 1;
    std::size_t coreset_size = 0;  // 0: full data (identity coreset)
    std::size_t chain_length = 2;  // AFK-MC^2 m
    std::size_t c_prime = 5;
    std::size_t g_size = 5;
    bool plus_one_random = false;
    std::size_t n_initial_esteps = 0;
    double convergence_epsilon = 1e-4;
    std::size_t max_iterations = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;

    void validate() const;
    nlohmann::json echo(const std::string& dataset, double test_split) const;
    std::string label() const;
};

// Train/eval views for the optional held-out split: the last floor(N * f)
// rows form the evaluation set; f = 0 evaluates on the full training data.
struct DataSplit {
    DataMatrix train;
    DataMatrix eval;
};
DataSplit split_data(const DataMatrix& data, double test_fraction);

// Executes one run of the selected algorithm with per-phase counters and
// timings. model_out, when given, receives the fitted means (variance is
// meaningful for the GMM-based algorithms only).
RunReport run_pipeline(const DataMatrix& train, const DataMatrix& eval,
                       const PipelineConfig& cfg, GmmParams* model_out = nullptr);

// Experiment grid: one algorithm, a list of configurations (e.g. a coreset
// size sweep), a common seed list. When with_baseline is set, a k-means++
// grid over the same seeds provides the relative-error baseline and the
// per-seed reference partitions for NMI; alternatively baseline_q supplies
// an external baseline value.
struct ExperimentSpec {
    std::string dataset_label;
    Algorithm algorithm = Algorithm::VcGmm;
    std::vector<PipelineConfig> configurations;
    std::vector<std::uint64_t> seeds;
    double test_split = 0.0;
    bool with_baseline = false;
    std::optional<double> baseline_q;
};

struct ExperimentResult {
    std::vector<RunReport> runs;  // baseline first, then the grid, in execution order
    nlohmann::json summary;       // per-configuration aggregates (mean and SEM)
};

ExperimentResult run_experiment(const DataMatrix& data, const ExperimentSpec& spec);

void write_runs_jsonl(const std::vector<RunReport>& runs, const std::string& path);
void write_summary(const nlohmann::json& summary, const std::string& path);

}  // namespace vcgmm
