#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace aif {

enum class SchedulePolicy { Nonconvex, Convex, Custom };

// The four coupled step-size sequences of the accelerated inexact-gradient
// method. Indexing is 1-based in the method's notation; element k lives at
// position k-1. Invariants: alpha_1 = 1, alpha_k in (0,1) for k >= 2,
// Gamma_1 = 1 and Gamma_k = (1 - alpha_k) Gamma_{k-1}.
struct AigSchedule {
    std::vector<double> alphas;
    std::vector<double> betas;
    std::vector<double> lambdas;
    std::vector<double> gammas;
    SchedulePolicy policy = SchedulePolicy::Custom;
    double lipschitz = 0.0;  // L estimate the step sizes were built from
    double delta = 1.0;

    int horizon() const { return static_cast<int>(alphas.size()); }
    double alpha(int k) const { return alphas[k - 1]; }
    double beta(int k) const { return betas[k - 1]; }
    double lambda(int k) const { return lambdas[k - 1]; }
    double gamma(int k) const { return gammas[k - 1]; }

    void validate() const;
};

// Conservative policy, valid without convexity: beta_k = lambda_k = 1/(2L),
// alpha_k = (k^2 - (k-1)^2)/k^2, Gamma_k = 1/k^2.
AigSchedule build_schedule_nonconvex(int horizon, double lipschitz);

// Aggressive policy for convex objectives: lambda_k proportional to
// k^{1+delta} - (k-1)^{1+delta}, scaled by the largest constant keeping
// alpha_k lambda_k <= beta_k = 1/(2L) over the whole horizon; the ratio
// alpha_k / (lambda_k Gamma_k) is constant in k by construction.
AigSchedule build_schedule_convex(int horizon, double lipschitz, double delta);

// Step-validity coefficients. The proof-side form uses the tail sum of
// Gamma_tau; the theorem-statement form (tail sum of 1/Gamma_tau) is kept for
// inspection since the two differ materially.
struct CkReport {
    std::vector<double> values;          // 1 - L[l_k + (l_k-b_k)^2/(2 a_k G_k l_k) sum G_tau]
    std::vector<double> statement_form;  // same with sum of 1/G_tau
    std::optional<int> first_nonpositive;  // smallest k (1-based) with values[k] <= 0
};
CkReport ck_coefficients(const AigSchedule& schedule, double lipschitz);

struct AigState {
    Eigen::VectorXd theta;
    Eigen::VectorXd theta_ag;
    Eigen::VectorXd theta_md;
    int step = 0;  // last completed step k

    static AigState init(const Eigen::VectorXd& theta0);
};

// Interpolation point theta_{k+1}^md where the next gradient is evaluated.
Eigen::VectorXd next_md_point(const AigState& state, const AigSchedule& schedule);

// One descent update with a gradient estimate taken at next_md_point(state):
//   theta_k    = theta_{k-1} - lambda_k g
//   theta_k^ag = theta_k^md  - beta_k g
// Throws on a non-finite gradient, leaving the state unchanged.
AigState aig_step(const AigState& state, const AigSchedule& schedule,
                  const Eigen::VectorXd& gradient);

enum class OptimizeSense { Minimize, Maximize };

struct OracleResult {
    Eigen::VectorXd gradient;
    std::optional<double> objective;
};

// Gradient estimate at the interpolation point; step is the 1-based k.
using GradientOracle = std::function<OracleResult(const Eigen::VectorXd& theta_md, int step)>;

struct AigStepRecord {
    int step = 0;
    Eigen::VectorXd theta, theta_ag, theta_md;
    double grad_norm = 0.0;
    std::optional<double> objective;
};

struct AigRunResult {
    std::vector<AigStepRecord> trace;
    Eigen::VectorXd best_point;  // md iterate with the smallest gradient-estimate norm
    double best_grad_norm = 0.0;
    int best_step = 0;
    AigState final_state;
};

// Runs the full horizon. Maximize negates the oracle output internally.
AigRunResult aig_run(const GradientOracle& oracle, const Eigen::VectorXd& theta0,
                     const AigSchedule& schedule, OptimizeSense sense);

// Fallback Lipschitz estimate when none is known: the largest gradient
// difference quotient over random point pairs in a box, doubled.
double estimate_lipschitz(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& grad,
                          const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                          std::uint64_t seed, int pairs = 20);

}  // namespace aif
