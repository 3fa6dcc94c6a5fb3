#include "aif/aig.hpp"

#include <cmath>
#include <limits>

#include "aif/errors.hpp"
#include "aif/rng.hpp"

namespace aif {

void AigSchedule::validate() const {
    const int n = horizon();
    if (n < 1) throw DomainError("AigSchedule: empty horizon");
    if (static_cast<int>(betas.size()) != n || static_cast<int>(lambdas.size()) != n ||
        static_cast<int>(gammas.size()) != n)
        throw DimensionError("AigSchedule: sequence lengths disagree");
    if (alphas[0] != 1.0) throw DomainError("AigSchedule: alpha_1 must be 1");
    for (int k = 2; k <= n; ++k)
        if (!(alpha(k) > 0.0 && alpha(k) < 1.0))
            throw DomainError("AigSchedule: alpha_k must lie in (0,1) for k >= 2");
    for (int k = 1; k <= n; ++k)
        if (!(beta(k) > 0.0) || !(lambda(k) > 0.0) || !(gamma(k) > 0.0))
            throw DomainError("AigSchedule: beta, lambda, gamma must be positive");
}

namespace {

// alpha_k = (k^{1+d} - (k-1)^{1+d})/k^{1+d} and Gamma_k = 1/k^{1+d} satisfy
// the recursion Gamma_k = (1-alpha_k) Gamma_{k-1} exactly.
void fill_alpha_gamma(AigSchedule& s, int horizon, double delta) {
    s.alphas.resize(horizon);
    s.gammas.resize(horizon);
    for (int k = 1; k <= horizon; ++k) {
        const double kp = std::pow(k, 1.0 + delta);
        const double km = std::pow(k - 1, 1.0 + delta);
        s.alphas[k - 1] = (kp - km) / kp;
        s.gammas[k - 1] = 1.0 / kp;
    }
}

}  // namespace

AigSchedule build_schedule_nonconvex(int horizon, double lipschitz) {
    if (horizon < 1) throw DomainError("build_schedule_nonconvex: horizon must be >= 1");
    if (!(lipschitz > 0.0)) throw DomainError("build_schedule_nonconvex: L must be > 0");
    AigSchedule s;
    s.policy = SchedulePolicy::Nonconvex;
    s.lipschitz = lipschitz;
    s.delta = 1.0;
    fill_alpha_gamma(s, horizon, 1.0);
    const double beta = 1.0 / (2.0 * lipschitz);
    s.betas.assign(horizon, beta);
    // Lower end of the admissible interval [beta_k, (1+1/k) beta_k].
    s.lambdas.assign(horizon, beta);
    s.validate();
    return s;
}

AigSchedule build_schedule_convex(int horizon, double lipschitz, double delta) {
    if (horizon < 1) throw DomainError("build_schedule_convex: horizon must be >= 1");
    if (!(lipschitz > 0.0)) throw DomainError("build_schedule_convex: L must be > 0");
    if (!(delta > 0.0 && delta <= 1.0))
        throw DomainError("build_schedule_convex: delta must lie in (0, 1]");
    AigSchedule s;
    s.policy = SchedulePolicy::Convex;
    s.lipschitz = lipschitz;
    s.delta = delta;
    fill_alpha_gamma(s, horizon, delta);
    const double beta = 1.0 / (2.0 * lipschitz);
    s.betas.assign(horizon, beta);

    // lambda_k = c (k^{1+d} - (k-1)^{1+d}); pick the largest c keeping
    // alpha_k lambda_k <= beta_k over the finite horizon, not just
    // asymptotically.
    s.lambdas.resize(horizon);
    double max_ratio = 0.0;  // (k^{1+d}-(k-1)^{1+d})^2 / k^{1+d}
    for (int k = 1; k <= horizon; ++k) {
        const double inc = std::pow(k, 1.0 + delta) - std::pow(k - 1, 1.0 + delta);
        s.lambdas[k - 1] = inc;  // scaled below
        max_ratio = std::max(max_ratio, s.alphas[k - 1] * inc);
    }
    const double c = beta / max_ratio;
    if (!(c > 0.0) || !std::isfinite(c))
        throw DomainError("build_schedule_convex: no feasible step constant");
    for (double& l : s.lambdas) l *= c;
    s.validate();
    return s;
}

CkReport ck_coefficients(const AigSchedule& schedule, double lipschitz) {
    schedule.validate();
    const int n = schedule.horizon();
    CkReport report;
    report.values.resize(n);
    report.statement_form.resize(n);

    // Tail sums from k to N, accumulated backwards.
    double tail_gamma = 0.0;
    double tail_inv_gamma = 0.0;
    for (int k = n; k >= 1; --k) {
        tail_gamma += schedule.gamma(k);
        tail_inv_gamma += 1.0 / schedule.gamma(k);
        const double l = schedule.lambda(k);
        const double b = schedule.beta(k);
        const double quad = (l - b) * (l - b) / (2.0 * schedule.alpha(k) * schedule.gamma(k) * l);
        report.values[k - 1] = 1.0 - lipschitz * (l + quad * tail_gamma);
        report.statement_form[k - 1] = 1.0 - lipschitz * l - lipschitz * quad * tail_inv_gamma;
    }
    for (int k = 1; k <= n; ++k)
        if (report.values[k - 1] <= 0.0) {
            report.first_nonpositive = k;
            break;
        }
    return report;
}

AigState AigState::init(const Eigen::VectorXd& theta0) {
    AigState s;
    s.theta = theta0;
    s.theta_ag = theta0;  // theta_0^ag = theta_0
    s.theta_md = theta0;
    s.step = 0;
    return s;
}

Eigen::VectorXd next_md_point(const AigState& state, const AigSchedule& schedule) {
    const int k = state.step + 1;
    if (k > schedule.horizon()) throw DomainError("aig: past the schedule horizon");
    const double a = schedule.alpha(k);
    return (1.0 - a) * state.theta_ag + a * state.theta;
}

AigState aig_step(const AigState& state, const AigSchedule& schedule,
                  const Eigen::VectorXd& gradient) {
    const int k = state.step + 1;
    if (k > schedule.horizon()) throw DomainError("aig: past the schedule horizon");
    if (gradient.size() != state.theta.size())
        throw DimensionError("aig_step: gradient dimension mismatch");
    if (!gradient.allFinite())
        throw DomainError("aig_step: non-finite gradient at k=" + std::to_string(k));

    AigState next;
    next.theta_md = next_md_point(state, schedule);
    next.theta = state.theta - schedule.lambda(k) * gradient;
    next.theta_ag = next.theta_md - schedule.beta(k) * gradient;
    next.step = k;
    return next;
}

AigRunResult aig_run(const GradientOracle& oracle, const Eigen::VectorXd& theta0,
                     const AigSchedule& schedule, OptimizeSense sense) {
    schedule.validate();
    AigRunResult result;
    AigState state = AigState::init(theta0);
    result.best_grad_norm = std::numeric_limits<double>::infinity();

    for (int k = 1; k <= schedule.horizon(); ++k) {
        const Eigen::VectorXd md = next_md_point(state, schedule);
        OracleResult est;
        try {
            est = oracle(md, k);
        } catch (const std::exception& e) {
            throw Error("aig_run: oracle failed at k=" + std::to_string(k) + ": " + e.what());
        }
        const Eigen::VectorXd g =
            sense == OptimizeSense::Maximize ? Eigen::VectorXd(-est.gradient) : est.gradient;
        state = aig_step(state, schedule, g);

        AigStepRecord rec;
        rec.step = k;
        rec.theta = state.theta;
        rec.theta_ag = state.theta_ag;
        rec.theta_md = state.theta_md;
        rec.grad_norm = est.gradient.norm();
        rec.objective = est.objective;
        result.trace.push_back(std::move(rec));

        if (result.trace.back().grad_norm < result.best_grad_norm) {
            result.best_grad_norm = result.trace.back().grad_norm;
            result.best_point = state.theta_md;
            result.best_step = k;
        }
    }
    result.final_state = state;
    return result;
}

double estimate_lipschitz(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          std::uint64_t seed, int pairs) {
    if (lower.size() != upper.size() || lower.size() == 0)
        throw DimensionError("estimate_lipschitz: bad box");
    RngStream rng(derive_seed(seed, SeedTag::Lipschitz, 0), 0);
    const int p = static_cast<int>(lower.size());
    double best = 0.0;
    for (int it = 0; it < pairs; ++it) {
        Eigen::VectorXd x(p), y(p);
        for (int i = 0; i < p; ++i) {
            x[i] = rng.uniform(lower[i], upper[i]);
            y[i] = rng.uniform(lower[i], upper[i]);
        }
        const double dist = (x - y).norm();
        if (dist < 1e-12) continue;
        best = std::max(best, (grad(x) - grad(y)).norm() / dist);
    }
    if (!(best > 0.0)) throw DomainError("estimate_lipschitz: degenerate gradient samples");
    return 2.0 * best;
}

}  // namespace aif
