#include <doctest.h>

#include <cmath>

#include "testutil.hpp"
#include "vcgmm/experiment.hpp"
#include "vcgmm/metrics.hpp"

using namespace vcgmm;

namespace {

PipelineConfig small_config(Algorithm algo) {
    PipelineConfig cfg;
    cfg.algorithm = algo;
    cfg.n_clusters = 4;
    cfg.c_prime = 2;
    cfg.g_size = 2;
    cfg.chain_length = 2;
    cfg.max_iterations = 40;
    return cfg;
}

}  // namespace

TEST_CASE("split_data") {
    const auto data = testutil::random_data(100, 2, 800);
    SUBCASE("zero fraction evaluates on the training data") {
        const auto split = split_data(data, 0.0);
        CHECK(split.train.n_points() == 100);
        CHECK(split.eval.values() == data.values());
    }
    SUBCASE("tail split") {
        const auto split = split_data(data, 0.25);
        CHECK(split.train.n_points() == 75);
        CHECK(split.eval.n_points() == 25);
        CHECK(split.eval.row(0)[0] == data.row(75)[0]);
    }
    SUBCASE("invalid fractions") {
        CHECK_THROWS_AS((void)split_data(data, 1.0), ConfigError);
        CHECK_THROWS_AS((void)split_data(data, -0.1), ConfigError);
    }
}

TEST_CASE("algorithm names round-trip") {
    for (Algorithm a : {Algorithm::VcGmm, Algorithm::VarGmmS, Algorithm::LwcsKmeans,
                        Algorithm::KmeansPP, Algorithm::SeedOnly})
        CHECK(parse_algorithm(algorithm_name(a)) == a);
    CHECK_THROWS_AS((void)parse_algorithm("quantum-kmeans"), ConfigError);
}

TEST_CASE("pipeline config validation") {
    auto cfg = small_config(Algorithm::VcGmm);
    cfg.c_prime = 9;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(Algorithm::VarGmmS);
    cfg.coreset_size = 10;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config(Algorithm::LwcsKmeans);
    cfg.coreset_size = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("run_pipeline covers every algorithm") {
    const auto blobs = testutil::make_blobs(600, 3, 4, 1.0, 0.02, 900);
    for (Algorithm algo : {Algorithm::VcGmm, Algorithm::VarGmmS, Algorithm::LwcsKmeans,
                           Algorithm::KmeansPP, Algorithm::SeedOnly}) {
        PipelineConfig cfg = small_config(algo);
        if (algo == Algorithm::VcGmm || algo == Algorithm::LwcsKmeans) cfg.coreset_size = 200;
        cfg.seed = 5;
        GmmParams model;
        const RunReport report = run_pipeline(blobs.data, blobs.data, cfg, &model);
        CHECK(report.algorithm == algorithm_name(algo));
        CHECK(report.final_quantization_error > 0.0);
        CHECK(report.objective_trace.size() == report.n_iterations + 1);
        CHECK(model.n_clusters() == 4);
        if (algo == Algorithm::VcGmm || algo == Algorithm::LwcsKmeans)
            CHECK(report.distance_counts.coreset.value == 2 * 600);
        if (algo != Algorithm::SeedOnly) CHECK(report.distance_counts.estep.value > 0);
    }
}

TEST_CASE("run_experiment aggregates a sweep with a baseline") {
    const auto blobs = testutil::make_blobs(800, 3, 4, 1.0, 0.02, 901);
    ExperimentSpec spec;
    spec.dataset_label = "synthetic";
    spec.algorithm = Algorithm::VcGmm;
    spec.seeds = {1, 2, 3};
    spec.with_baseline = true;
    for (std::size_t size : {std::size_t{100}, std::size_t{200}, std::size_t{300},
                             std::size_t{400}, std::size_t{500}}) {
        PipelineConfig cfg = small_config(Algorithm::VcGmm);
        cfg.coreset_size = size;
        spec.configurations.push_back(cfg);
    }

    const auto result = run_experiment(blobs.data, spec);
    CHECK(result.summary["configurations"].size() == 5);  // five coreset sizes, one row each
    CHECK(result.runs.size() == 3 + 5 * 3);
    CHECK(result.summary.contains("baseline"));

    for (const auto& agg : result.summary["configurations"]) {
        CHECK(agg["n_runs"].get<std::size_t>() == 3);
        CHECK(agg["n_failures"].get<std::size_t>() == 0);
        CHECK(agg.contains("eta"));
        CHECK(agg.contains("nmi"));
    }

    // eta and its SEM must match an independent recomputation from the runs.
    const double baseline_q = result.summary["baseline_q_mean"].get<double>();
    std::vector<double> etas;
    for (const auto& run : result.runs) {
        if (run.algorithm != "vc-gmm") continue;
        if (run.config_echo["coreset_size"].get<std::size_t>() != 100) continue;
        CHECK(run.has_eta);
        etas.push_back((run.final_quantization_error - baseline_q) / baseline_q);
        CHECK(run.eta == doctest::Approx(etas.back()).epsilon(1e-12));
    }
    const MeanSem recomputed = mean_sem(etas);
    const auto& agg = result.summary["configurations"][0];
    CHECK(agg["eta"]["mean"].get<double>() == doctest::Approx(recomputed.mean).epsilon(1e-12));
    CHECK(agg["eta"]["sem"].get<double>() == doctest::Approx(recomputed.sem).epsilon(1e-12));
}

TEST_CASE("run_experiment is deterministic given the seed list") {
    const auto blobs = testutil::make_blobs(400, 2, 3, 0.8, 0.02, 902);
    ExperimentSpec spec;
    spec.dataset_label = "synthetic";
    spec.algorithm = Algorithm::VcGmm;
    spec.seeds = {11, 12};
    spec.with_baseline = true;
    PipelineConfig cfg = small_config(Algorithm::VcGmm);
    cfg.coreset_size = 150;
    spec.configurations.push_back(cfg);

    const auto a = run_experiment(blobs.data, spec);
    const auto b = run_experiment(blobs.data, spec);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].objective_trace == b.runs[i].objective_trace);
        CHECK(a.runs[i].final_quantization_error == b.runs[i].final_quantization_error);
        CHECK(a.runs[i].distance_counts.estep.value == b.runs[i].distance_counts.estep.value);
        CHECK(a.runs[i].eta == b.runs[i].eta);
        CHECK(a.runs[i].nmi_vs_baseline == b.runs[i].nmi_vs_baseline);
    }
}

TEST_CASE("run_experiment records failures and keeps aggregating") {
    const auto data = testutil::random_data(50, 2, 903);
    ExperimentSpec spec;
    spec.dataset_label = "synthetic";
    spec.algorithm = Algorithm::VcGmm;
    spec.seeds = {1, 2};
    spec.baseline_q = 123.0;
    PipelineConfig bad = small_config(Algorithm::VcGmm);
    bad.c_prime = 40;  // invalid against n_clusters = 4: every run fails
    spec.configurations.push_back(bad);
    PipelineConfig good = small_config(Algorithm::VcGmm);
    spec.configurations.push_back(good);

    const auto result = run_experiment(data, spec);
    CHECK(result.summary["configurations"][0]["n_failures"].get<std::size_t>() == 2);
    CHECK(result.summary["configurations"][1]["n_failures"].get<std::size_t>() == 0);
    for (const auto& run : result.runs) {
        if (run.status != "ok") CHECK(!run.error_message.empty());
    }
    // External baseline still anchors eta for the successful runs.
    CHECK(result.summary["configurations"][1].contains("eta"));
}

TEST_CASE("external baseline_q drives eta without baseline runs") {
    const auto data = testutil::random_data(60, 2, 904, 3.0);
    ExperimentSpec spec;
    spec.dataset_label = "synthetic";
    spec.algorithm = Algorithm::KmeansPP;
    spec.seeds = {4};
    spec.baseline_q = 100.0;
    spec.configurations.push_back(small_config(Algorithm::KmeansPP));
    const auto result = run_experiment(data, spec);
    CHECK(result.runs.size() == 1);
    CHECK(result.runs.front().has_eta);
    CHECK(result.runs.front().eta ==
          doctest::Approx((result.runs.front().final_quantization_error - 100.0) / 100.0));
}
