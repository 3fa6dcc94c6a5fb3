// Command-line front end: simulate datasets, run filters, run estimation
// methods with replication, benchmark timings, and summarize result tables.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "aif/config.hpp"
#include "aif/errors.hpp"
#include "aif/io/csv.hpp"
#include "aif/numeric.hpp"
#include "aif/summary.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string config_path;
    aif::CliOverrides overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration file (JSON)")
        ->required();
    cmd->add_option("--seed", [&args](const CLI::results_t& res) {
        args.overrides.seed = std::stoull(res[0]);
        return true;
    }, "master seed override");
    cmd->add_option("--workers", [&args](const CLI::results_t& res) {
        args.overrides.workers = std::stoi(res[0]);
        return true;
    }, "worker thread count override");
    cmd->add_option("--out", [&args](const CLI::results_t& res) {
        args.overrides.out_dir = res[0];
        return true;
    }, "output directory override");
}

std::string out_path(const aif::LoadedRun& run, const std::string& name) {
    fs::create_directories(run.out_dir);
    return (fs::path(run.out_dir) / name).string();
}

int cmd_simulate(const CommonArgs& args) {
    const aif::LoadedRun run = aif::load_run_config(args.config_path, args.overrides);
    if (!run.data_from_simulation)
        throw aif::ConfigError("simulate needs a data.simulate block, not a data path");

    const std::string data_path = out_path(run, "dataset.csv");
    aif::io::write_dataset_csv(data_path, run.data);

    // metadata sidecar: model, parameters, seed
    json meta;
    meta["model"] = run.model_id;
    meta["seed"] = run.data_seed;
    meta["length"] = run.sim_length;
    const auto names = run.model->param_names();
    for (int i = 0; i < run.theta_nat.size(); ++i) meta["params"][names[i]] = run.theta_nat[i];
    std::ofstream meta_out(data_path + ".meta.json");
    meta_out << meta.dump(2) << "\n";

    std::cout << "wrote " << data_path << " (" << run.data.n_obs() << " rows)\n";
    return 0;
}

int cmd_filter(const CommonArgs& args) {
    const aif::LoadedRun run = aif::load_run_config(args.config_path, args.overrides);
    if (run.method == "kalman") {
        const aif::KalmanResult result = aif::kalman_loglik(run.lg_spec, run.data);
        aif::io::write_kalman_csv(out_path(run, "filter.csv"), result);
        std::cout << "kalman loglik " << aif::io::format_double(result.loglik) << "\n";
        return 0;
    }
    // pf-only (also accepted for any method tag: filtering at the config point)
    const aif::FilterOutput out = aif::bootstrap_filter(
        *run.model, run.theta_nat, run.data, run.mif.particles,
        aif::derive_seed(run.master_seed, aif::SeedTag::Evaluation, 0));
    aif::io::write_filter_csv(out_path(run, "filter.csv"), out, run.model->param_names());
    std::cout << "bootstrap loglik " << aif::io::format_double(out.loglik) << " (J="
              << run.mif.particles << ")\n";
    return 0;
}

int cmd_estimate(const CommonArgs& args) {
    const aif::LoadedRun run = aif::load_run_config(args.config_path, args.overrides);
    if (run.method == "pf-only" || run.method == "kalman")
        throw aif::ConfigError("estimate needs method aif, if1, or if2");

    aif::ReplicateOptions opts = run.replicate;
    opts.keep_traces = true;
    const aif::ExperimentResult result =
        aif::replicate_search(run.method, *run.model, run.data, run.box, run.mif, opts);

    const auto names = run.model->param_names();
    aif::io::write_experiment_csv(out_path(run, "experiment.csv"), result, names);
    for (std::size_t r = 0; r < result.traces.size(); ++r) {
        if (result.traces[r].steps.empty()) continue;
        aif::io::write_estimation_trace_csv(
            out_path(run, "trace_rep" + std::to_string(r) + ".csv"), result.traces[r], names);
    }

    int failures = 0;
    for (const auto& row : result.rows)
        if (!row.ok) {
            ++failures;
            std::cerr << "replication " << row.replication << " failed: " << row.message << "\n";
        }
    std::cout << "wrote " << out_path(run, "experiment.csv") << " (" << result.rows.size()
              << " replications, " << failures << " failed)\n";
    return failures == 0 ? 0 : 1;
}

int cmd_benchmark(const CommonArgs& args) {
    const aif::LoadedRun run = aif::load_run_config(args.config_path, args.overrides);
    const auto theta0 = run.theta_est();

    const std::string path = out_path(run, "benchmark.csv");
    std::ofstream out(path);
    out << "# schema " << aif::io::kBenchmarkSchema << "\n";
    out << "method,particles,mean_wall_seconds,ratio_vs_if2\n";

    const std::vector<std::string> methods{"if1", "if2", "aif"};
    for (int particles : run.benchmark_particle_counts) {
        std::map<std::string, double> mean_seconds;
        for (const auto& method : methods) {
            std::vector<double> seconds(run.benchmark_runs);
            for (int rep = 0; rep < run.benchmark_runs; ++rep) {
                aif::MifConfig cfg = run.mif;
                cfg.particles = particles;
                cfg.seed = aif::derive_seed(run.master_seed, aif::SeedTag::Replication, rep);
                // wall clock around the estimation loop only
                const auto tick = std::chrono::steady_clock::now();
                aif::run_method(method, *run.model, run.data, theta0, cfg);
                seconds[rep] =
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - tick)
                        .count();
            }
            mean_seconds[method] = aif::mean(seconds);
        }
        for (const auto& method : methods)
            out << method << "," << particles << ","
                << aif::io::format_double(mean_seconds[method]) << ","
                << aif::io::format_double(mean_seconds[method] / mean_seconds["if2"]) << "\n";
        std::cout << "J=" << particles
                  << " aif/if2 ratio: " << mean_seconds["aif"] / mean_seconds["if2"] << "\n";
    }
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_summarize(const CommonArgs& args, const std::vector<std::string>& result_files) {
    const aif::LoadedRun run = aif::load_run_config(args.config_path, args.overrides);
    if (result_files.empty()) throw aif::ConfigError("summarize needs at least one result file");
    const aif::SummaryResult summary =
        aif::summarize_experiments(result_files, run.reference_loglik, run.summary_threshold);
    aif::write_summary_csv(out_path(run, "summary.csv"), summary);
    aif::write_density_csv(out_path(run, "density.csv"), summary);
    for (const auto& ms : summary.methods)
        std::cout << ms.method << ": median loglik " << ms.loglik_median << " ("
                  << ms.count << " runs)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulation-based inference for partially observed Markov processes"};
    app.require_subcommand(1);

    CommonArgs sim_args, filter_args, est_args, bench_args, sum_args;
    std::vector<std::string> result_files;

    add_common(app.add_subcommand("simulate", "write a synthetic dataset"), sim_args);
    add_common(app.add_subcommand("filter", "run a filter at the config parameters"),
               filter_args);
    add_common(app.add_subcommand("estimate", "run a multi-start estimation experiment"),
               est_args);
    add_common(app.add_subcommand("benchmark", "time the estimation methods"), bench_args);
    auto* summarize =
        app.add_subcommand("summarize", "join experiment tables into summary quantiles");
    add_common(summarize, sum_args);
    summarize->add_option("results", result_files, "experiment CSV files");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("simulate")) return cmd_simulate(sim_args);
        if (app.got_subcommand("filter")) return cmd_filter(filter_args);
        if (app.got_subcommand("estimate")) return cmd_estimate(est_args);
        if (app.got_subcommand("benchmark")) return cmd_benchmark(bench_args);
        if (app.got_subcommand("summarize")) return cmd_summarize(sum_args, result_files);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
