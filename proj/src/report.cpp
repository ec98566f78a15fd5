#include "vcgmm/report.hpp"

#include <cmath>

namespace vcgmm {

nlohmann::json report_to_json(const RunReport& report) {
    nlohmann::json j;
    j["algorithm"] = report.algorithm;
    j["seed"] = report.seed;
    j["status"] = report.status;
    if (!report.error_message.empty()) j["error"] = report.error_message;
    j["n_iterations"] = report.n_iterations;
    j["converged"] = report.converged;
    j["objective_trace"] = report.objective_trace;
    j["estep_evals_per_iter"] = report.estep_evals_per_iter;
    j["distance_counts"] = {
        {"coreset", report.distance_counts.coreset.value},
        {"seeding", report.distance_counts.seeding.value},
        {"estep", report.distance_counts.estep.value},
        {"evaluation", report.distance_counts.evaluation.value},
        {"algorithm_total", report.distance_counts.algorithm_total()},
    };
    j["wall_times"] = {
        {"coreset", report.wall_times.coreset},
        {"seeding", report.wall_times.seeding},
        {"sigma_init", report.wall_times.sigma_init},
        {"em_loop", report.wall_times.em_loop},
        {"evaluation", report.wall_times.evaluation},
        {"total", report.wall_times.total()},
    };
    j["final_objective"] = report.final_objective;
    j["final_quantization_error"] = report.final_quantization_error;
    if (report.has_eta) j["eta"] = report.eta;
    if (report.has_nmi) j["nmi_vs_baseline"] = report.nmi_vs_baseline;
    j["config"] = report.config_echo;
    return j;
}

MeanSem mean_sem(const std::vector<double>& values) {
    MeanSem out;
    out.count = values.size();
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(values.size() - 1);
    out.sem = std::sqrt(var / static_cast<double>(values.size()));
    return out;
}

}  // namespace vcgmm
