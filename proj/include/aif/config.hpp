#pragma once

#include <memory>
#include <optional>
#include <string>

#include "aif/estimators.hpp"
#include "aif/models/linear_gaussian.hpp"
#include "aif/models/malaria.hpp"

namespace aif {

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> out_dir;
};

// One fully resolved run: model, data, estimation settings, harness options.
// Built from a JSON config file plus command-line overrides.
struct LoadedRun {
    std::string method;    // aif | if1 | if2 | pf-only | kalman
    std::string model_id;  // lg | malaria

    std::shared_ptr<PompModel> model;
    LinearGaussianSpec lg_spec;      // populated for model_id == "lg"
    MalariaSpec malaria_spec;        // populated for model_id == "malaria"
    Eigen::VectorXd theta_nat;       // the config's parameter point, natural scale

    TimeSeriesData data;
    bool data_from_simulation = false;
    std::uint64_t data_seed = 42;
    int sim_length = 0;  // n_times (lg) or months (malaria) when simulating

    MifConfig mif;
    SearchBox box;  // estimation scale; defaults to a point at theta
    ReplicateOptions replicate;

    std::optional<double> reference_loglik;  // for summaries; "kalman" resolves it
    double summary_threshold = 3.0;

    std::vector<int> benchmark_particle_counts{100, 1000};
    int benchmark_runs = 5;

    std::string out_dir = ".";
    std::uint64_t master_seed = 0;
    int workers = 1;

    Eigen::VectorXd theta_est() const;  // theta_nat on the estimation scale
};

LoadedRun load_run_config(const std::string& path, const CliOverrides& overrides = {});

}  // namespace aif
