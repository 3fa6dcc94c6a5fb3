#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aif/aig.hpp"
#include "aif/smc.hpp"

namespace aif {

// Open choices in the update rule, both resolvable from the config: where the
// score displacements are centered and whether step sizes are taken at the
// current or the previous iteration index.
enum class ScoreCenter { CurrentMd, PreviousMd };
enum class StepIndexing { Current, Previous };

struct MifConfig {
    int particles = 1000;   // J
    int iterations = 25;    // M
    PerturbSpec perturb;

    // Step-size schedule for the accelerated estimator. Custom supplies the
    // alpha/beta/lambda sequences directly (only those three are consumed).
    SchedulePolicy policy = SchedulePolicy::Nonconvex;
    double lipschitz = 1.0;
    double delta = 1.0;
    std::optional<AigSchedule> custom_schedule;

    // Position inside the admissible interval lambda_m in [beta_m,
    // (1+1/m) beta_m] of the nonconvex policy: lambda_m = (1 + excess/m)
    // beta_m. Zero (the builder default) collapses the accelerated update
    // onto the first-order one, since lambda = beta forces theta_ag = theta.
    double lambda_excess = 0.0;
    // Scale lambda_m and beta_m by c^{2(m-1)}. The score's Monte Carlo error
    // grows like c^{-2(m-1)} as the perturbation cools, so cooled steps keep
    // the products lambda_m * error_m summable (the noise-control condition
    // the convergence analysis assumes).
    bool step_cooling = false;

    ScoreMode score_mode = ScoreMode::Sum;
    ScoreCenter score_center = ScoreCenter::CurrentMd;
    StepIndexing step_indexing = StepIndexing::Current;

    // First-order baseline step gamma_1; unset picks mean sigma_i^2 over the
    // perturbed non-IVP coordinates, which makes gamma_m S_m a plain sum of
    // filter-mean displacements.
    std::optional<double> if1_step;

    int ivp_lag = 0;  // L in [1, N]; 0 means N
    std::uint64_t seed = 0;

    void validate(int param_dim, int n_times) const;
    AigSchedule make_schedule() const;
    int resolved_ivp_lag(int n_times) const;
};

struct EstimationStep {
    int iteration = 0;  // m
    Eigen::VectorXd theta, theta_ag, theta_md, score;
    double loglik = 0.0;
    double wall_seconds = 0.0;
};

struct EstimationTrace {
    std::string method;
    std::vector<EstimationStep> steps;

    const Eigen::VectorXd& final_theta() const { return steps.back().theta; }
};

// Accelerated iterated filtering: each iteration runs the perturbed filter at
// the interpolation point theta_m^md, turns the parameter filter means into a
// score estimate S_m, and takes the ascent steps
//   theta_m = theta_{m-1} + lambda_m S_m,  theta_m^ag = theta_m^md + beta_m S_m
// on non-IVP coordinates; IVP coordinates are set to the lag-L filter mean.
// theta0 on the estimation scale.
EstimationTrace aif_run(const PompModel& model, const TimeSeriesData& data,
                        const Eigen::VectorXd& theta0_est, const MifConfig& cfg);

// First-order baseline: theta_m = theta_{m-1} + gamma_m S_m with the cooled
// step sequence gamma_m = gamma_1 c^{2(m-1)}.
EstimationTrace if1_run(const PompModel& model, const TimeSeriesData& data,
                        const Eigen::VectorXd& theta0_est, const MifConfig& cfg);

// Swarm baseline: the parameter particle swarm survives across iterations
// (re-perturbed, never re-centered); theta_m is the final-time swarm mean.
EstimationTrace if2_run(const PompModel& model, const TimeSeriesData& data,
                        const Eigen::VectorXd& theta0_est, const MifConfig& cfg);

EstimationTrace run_method(const std::string& method, const PompModel& model,
                           const TimeSeriesData& data, const Eigen::VectorXd& theta0_est,
                           const MifConfig& cfg);

struct SearchBox {
    Eigen::VectorXd lower, upper;  // estimation scale; equal bounds pin a coordinate
    void validate(int param_dim) const;
};

struct ReplicationRow {
    std::string method;
    int replication = 0;
    std::uint64_t seed = 0;
    Eigen::VectorXd start, final;  // estimation scale
    double loglik = 0.0;           // median of the evaluation filters
    double wall_seconds = 0.0;
    bool ok = false;
    std::string message;
};

struct ExperimentResult {
    std::vector<ReplicationRow> rows;
    std::vector<EstimationTrace> traces;  // per replication, when requested
};

struct ReplicateOptions {
    int replications = 1;
    int eval_particles = 0;  // J for the evaluation filters; 0 -> cfg.particles
    int eval_reps = 10;      // K evaluation filters, median reported
    int workers = 1;
    std::uint64_t master_seed = 0;
    bool keep_traces = false;
};

// Multi-start replication harness. Starts are uniform in the box with
// per-replication streams; every final point is re-evaluated by K plain
// bootstrap filters whose seeds depend only on the master seed, so loglik
// comparisons across methods share identical evaluation filters. Individual
// failures are recorded per row, never fatal. Deterministic given the master
// seed, for any worker count.
ExperimentResult replicate_search(const std::string& method, const PompModel& model,
                                  const TimeSeriesData& data, const SearchBox& box,
                                  const MifConfig& cfg, const ReplicateOptions& opts);

// Median loglik of K plain bootstrap filters at theta (estimation scale),
// with seeds derived from master_seed only.
double evaluate_loglik(const PompModel& model, const TimeSeriesData& data,
                       const Eigen::VectorXd& theta_est, int particles, int reps,
                       std::uint64_t master_seed);

}  // namespace aif
