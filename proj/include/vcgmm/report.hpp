#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcgmm/counters.hpp"

namespace vcgmm {

// Wall-clock seconds per pipeline phase (monotonic clock). sigma_init covers
// variance estimation plus any initial E-steps.
struct PhaseTimes {
    double coreset = 0.0;
    double seeding = 0.0;
    double sigma_init = 0.0;
    double em_loop = 0.0;
    double evaluation = 0.0;

    double total() const { return coreset + seeding + sigma_init + em_loop + evaluation; }
};

// Everything recorded about one run: the objective trace (one entry before
// the EM loop plus one per iteration), per-phase distance counters and wall
// times, and the final quality numbers. config_echo holds the complete
// configuration needed to rerun the experiment.
struct RunReport {
    std::string algorithm;
    std::uint64_t seed = 0;

    std::vector<double> objective_trace;
    std::vector<std::uint64_t> estep_evals_per_iter;
    PhaseCounters distance_counts;
    PhaseTimes wall_times;

    std::size_t n_iterations = 0;
    bool converged = false;
    double final_objective = 0.0;
    double final_quantization_error = 0.0;
    bool has_eta = false;
    double eta = 0.0;
    bool has_nmi = false;
    double nmi_vs_baseline = 0.0;

    nlohmann::json config_echo;
    std::string status = "ok";
    std::string error_message;
};

nlohmann::json report_to_json(const RunReport& report);

// Mean and standard error of the mean; SEM is 0 for fewer than two values.
struct MeanSem {
    double mean = 0.0;
    double sem = 0.0;
    std::size_t count = 0;
};
MeanSem mean_sem(const std::vector<double>& values);

}  // namespace vcgmm
