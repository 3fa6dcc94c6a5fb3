#include "aif/estimators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "aif/errors.hpp"
#include "aif/numeric.hpp"
#include "aif/parallel.hpp"

namespace aif {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t iteration_filter_seed(const MifConfig& cfg, int iteration) {
    return derive_seed(cfg.seed, SeedTag::IterationFilter, iteration);
}

// IVP coordinates take the lag-L filter mean (both theta and theta_ag, so the
// next interpolation point carries the same value).
void apply_ivp_update(const MifConfig& cfg, const FilterOutput& out, int lag,
                      Eigen::VectorXd& theta, Eigen::VectorXd* theta_ag) {
    for (int i = 0; i < theta.size(); ++i) {
        if (!cfg.perturb.ivp_mask[i]) continue;
        theta[i] = out.param_filter_means(lag - 1, i);
        if (theta_ag) (*theta_ag)[i] = theta[i];
    }
}

}  // namespace

void MifConfig::validate(int param_dim, int n_times) const {
    if (particles < 2) throw DomainError("MifConfig: need at least 2 particles");
    if (iterations < 1) throw DomainError("MifConfig: need at least 1 iteration");
    perturb.validate(param_dim);
    if (ivp_lag < 0 || ivp_lag > n_times)
        throw DomainError("MifConfig: ivp_lag must lie in [1, N] (or 0 for N)");
    if (lambda_excess < 0.0 || lambda_excess > 1.0)
        throw DomainError("MifConfig: lambda_excess must lie in [0, 1]");
    if (policy == SchedulePolicy::Custom) {
        if (!custom_schedule) throw ConfigError("MifConfig: custom policy without a schedule");
        if (custom_schedule->horizon() < iterations)
            throw ConfigError("MifConfig: custom schedule shorter than the iteration count");
    }
}

AigSchedule MifConfig::make_schedule() const {
    AigSchedule schedule;
    switch (policy) {
        case SchedulePolicy::Nonconvex:
            schedule = build_schedule_nonconvex(iterations, lipschitz);
            if (lambda_excess != 0.0)
                for (int m = 1; m <= iterations; ++m)
                    schedule.lambdas[m - 1] = schedule.betas[m - 1] * (1.0 + lambda_excess / m);
            break;
        case SchedulePolicy::Convex:
            schedule = build_schedule_convex(iterations, lipschitz, delta);
            break;
        case SchedulePolicy::Custom: return *custom_schedule;
    }
    if (step_cooling) {
        for (int m = 1; m <= iterations; ++m) {
            const double factor = std::pow(perturb.cooling_c, 2.0 * (m - 1));
            schedule.lambdas[m - 1] *= factor;
            schedule.betas[m - 1] *= factor;
        }
    }
    return schedule;
}

int MifConfig::resolved_ivp_lag(int n_times) const { return ivp_lag == 0 ? n_times : ivp_lag; }

EstimationTrace aif_run(const PompModel& model, const TimeSeriesData& data,
                        const Eigen::VectorXd& theta0_est, const MifConfig& cfg) {
    cfg.validate(model.param_dim(), data.n_obs());
    if (theta0_est.size() != model.param_dim())
        throw DimensionError("aif_run: starting point dimension mismatch");

    const AigSchedule schedule = cfg.make_schedule();
    const int lag = cfg.resolved_ivp_lag(data.n_obs());

    EstimationTrace trace;
    trace.method = "aif";
    Eigen::VectorXd theta = theta0_est;
    Eigen::VectorXd theta_ag = theta0_est;
    Eigen::VectorXd md_prev = theta0_est;  // theta_0^md = theta_0

    for (int m = 1; m <= cfg.iterations; ++m) {
        const auto tick = Clock::now();
        const double alpha = schedule.alpha(m);
        const Eigen::VectorXd theta_md = (1.0 - alpha) * theta_ag + alpha * theta;

        FilterOutput out;
        try {
            out = perturbed_filter(model, theta_md, data, cfg.particles, cfg.perturb, m,
                                   iteration_filter_seed(cfg, m));
        } catch (const DegeneracyError& e) {
            throw DegeneracyError("aif iteration " + std::to_string(m) + ": " + e.what(),
                                  e.time_index, m);
        }

        const Eigen::VectorXd& center =
            cfg.score_center == ScoreCenter::CurrentMd ? theta_md : md_prev;
        const Eigen::VectorXd score =
            estimate_score(out, center, cfg.perturb, m, cfg.score_mode);

        const int step_idx = cfg.step_indexing == StepIndexing::Current ? m : std::max(1, m - 1);
        const double lambda = schedule.lambda(step_idx);
        const double beta = schedule.beta(step_idx);

        Eigen::VectorXd theta_next = theta;
        Eigen::VectorXd theta_ag_next = theta_ag;
        for (int i = 0; i < theta.size(); ++i) {
            if (cfg.perturb.ivp_mask[i]) continue;
            theta_next[i] = theta[i] + lambda * score[i];      // ascent
            theta_ag_next[i] = theta_md[i] + beta * score[i];
        }
        apply_ivp_update(cfg, out, lag, theta_next, &theta_ag_next);

        theta = theta_next;
        theta_ag = theta_ag_next;
        md_prev = theta_md;
        trace.steps.push_back(
            {m, theta, theta_ag, theta_md, score, out.loglik, seconds_since(tick)});
    }
    return trace;
}

EstimationTrace if1_run(const PompModel& model, const TimeSeriesData& data,
                        const Eigen::VectorXd& theta0_est, const MifConfig& cfg) {
    cfg.validate(model.param_dim(), data.n_obs());
    if (theta0_est.size() != model.param_dim())
        throw DimensionError("if1_run: starting point dimension mismatch");
    const int lag = cfg.resolved_ivp_lag(data.n_obs());

    double gamma1;
    if (cfg.if1_step) {
        gamma1 = *cfg.if1_step;
    } else {
        // mean sigma_i^2 / N: under the sum-mode score this turns gamma_1 S_1
        // into the average filter-mean displacement, which keeps the first
        // step inside the random-walk reach regardless of how far the start
        // sits from the optimum.
        double acc = 0.0;
        int count = 0;
        for (int i = 0; i < cfg.perturb.sigmas.size(); ++i) {
            if (cfg.perturb.ivp_mask[i] || cfg.perturb.sigmas[i] == 0.0) continue;
            acc += cfg.perturb.sigmas[i] * cfg.perturb.sigmas[i];
            ++count;
        }
        gamma1 = count > 0 ? acc / (count * data.n_obs()) : 0.0;
    }

    EstimationTrace trace;
    trace.method = "if1";
    Eigen::VectorXd theta = theta0_est;

    for (int m = 1; m <= cfg.iterations; ++m) {
        const auto tick = Clock::now();
        FilterOutput out;
        try {
            out = perturbed_filter(model, theta, data, cfg.particles, cfg.perturb, m,
                                   iteration_filter_seed(cfg, m));
        } catch (const DegeneracyError& e) {
            throw DegeneracyError("if1 iteration " + std::to_string(m) + ": " + e.what(),
                                  e.time_index, m);
        }
        const Eigen::VectorXd score = estimate_score(out, theta, cfg.perturb, m, cfg.score_mode);
        const double gamma_m =
            gamma1 * std::pow(cfg.perturb.cooling_c, 2.0 * (m - 1));

        Eigen::VectorXd theta_next = theta;
        for (int i = 0; i < theta.size(); ++i)
            if (!cfg.perturb.ivp_mask[i]) theta_next[i] = theta[i] + gamma_m * score[i];
        apply_ivp_update(cfg, out, lag, theta_next, nullptr);

        theta = theta_next;
        trace.steps.push_back({m, theta, theta, theta, score, out.loglik, seconds_since(tick)});
    }
    return trace;
}

EstimationTrace if2_run(const PompModel& model, const TimeSeriesData& data,
                        const Eigen::VectorXd& theta0_est, const MifConfig& cfg) {
    cfg.validate(model.param_dim(), data.n_obs());
    if (theta0_est.size() != model.param_dim())
        throw DimensionError("if2_run: starting point dimension mismatch");

    const int p = model.param_dim();
    Eigen::MatrixXd swarm(cfg.particles, p);
    for (int j = 0; j < cfg.particles; ++j) swarm.row(j) = theta0_est;

    EstimationTrace trace;
    trace.method = "if2";
    Eigen::VectorXd theta = theta0_est;

    for (int m = 1; m <= cfg.iterations; ++m) {
        const auto tick = Clock::now();
        FilterOutput out;
        try {
            out = perturbed_filter_swarm(model, swarm, data, cfg.perturb, m,
                                         iteration_filter_seed(cfg, m));
        } catch (const DegeneracyError& e) {
            throw DegeneracyError("if2 iteration " + std::to_string(m) + ": " + e.what(),
                                  e.time_index, m);
        }
        // Final-time swarm mean, all coordinates (IVPs included).
        theta = out.param_filter_means.row(data.n_obs() - 1);
        trace.steps.push_back({m, theta, theta, theta, Eigen::VectorXd::Zero(p), out.loglik,
                               seconds_since(tick)});
    }
    return trace;
}

EstimationTrace run_method(const std::string& method, const PompModel& model,
                           const TimeSeriesData& data, const Eigen::VectorXd& theta0_est,
                           const MifConfig& cfg) {
    if (method == "aif") return aif_run(model, data, theta0_est, cfg);
    if (method == "if1") return if1_run(model, data, theta0_est, cfg);
    if (method == "if2") return if2_run(model, data, theta0_est, cfg);
    throw ConfigError("unknown estimation method '" + method + "'");
}

void SearchBox::validate(int param_dim) const {
    if (lower.size() != param_dim || upper.size() != param_dim)
        throw DimensionError("SearchBox: bounds dimension mismatch");
    for (int i = 0; i < lower.size(); ++i) {
        if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
            throw DomainError("SearchBox: bounds must be finite");
        if (lower[i] > upper[i]) throw DomainError("SearchBox: lower bound exceeds upper");
    }
}

double evaluate_loglik(const PompModel& model, const TimeSeriesData& data,
                       const Eigen::VectorXd& theta_est, int particles, int reps,
                       std::uint64_t master_seed) {
    const Eigen::VectorXd theta_nat = model.param_transform().inverse(theta_est);
    std::vector<double> logliks(reps);
    for (int k = 0; k < reps; ++k) {
        const std::uint64_t eval_seed = derive_seed(master_seed, SeedTag::Evaluation, k);
        logliks[k] = bootstrap_filter(model, theta_nat, data, particles, eval_seed).loglik;
    }
    return median(logliks);
}

ExperimentResult replicate_search(const std::string& method, const PompModel& model,
                                  const TimeSeriesData& data, const SearchBox& box,
                                  const MifConfig& cfg, const ReplicateOptions& opts) {
    if (opts.replications < 1) throw DomainError("replicate_search: need at least 1 replication");
    box.validate(model.param_dim());
    cfg.validate(model.param_dim(), data.n_obs());
    const int eval_particles = opts.eval_particles > 0 ? opts.eval_particles : cfg.particles;

    ExperimentResult result;
    result.rows.resize(opts.replications);
    if (opts.keep_traces) result.traces.resize(opts.replications);

    parallel_for(opts.replications, opts.workers, [&](int r) {
        ReplicationRow row;
        row.method = method;
        row.replication = r;
        row.seed = derive_seed(opts.master_seed, SeedTag::Replication, r);

        RngStream start_rng(derive_seed(opts.master_seed, SeedTag::StartDraw, r), 0);
        row.start.resize(model.param_dim());
        for (int i = 0; i < row.start.size(); ++i)
            row.start[i] = start_rng.uniform(box.lower[i], box.upper[i]);

        MifConfig run_cfg = cfg;
        run_cfg.seed = row.seed;

        const auto tick = Clock::now();
        try {
            EstimationTrace trace = run_method(method, model, data, row.start, run_cfg);
            row.wall_seconds = seconds_since(tick);
            row.final = trace.final_theta();
            row.loglik = evaluate_loglik(model, data, row.final, eval_particles, opts.eval_reps,
                                         opts.master_seed);
            row.ok = true;
            if (opts.keep_traces) result.traces[r] = std::move(trace);
        } catch (const std::exception& e) {
            row.wall_seconds = seconds_since(tick);
            row.final = Eigen::VectorXd::Constant(model.param_dim(),
                                                  std::numeric_limits<double>::quiet_NaN());
            row.loglik = std::numeric_limits<double>::quiet_NaN();
            row.ok = false;
            row.message = e.what();
        }
        result.rows[r] = std::move(row);
    });
    return result;
}

}  // namespace aif
