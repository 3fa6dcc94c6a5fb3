#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>

#include "aif/pomp_model.hpp"

namespace aif {

// Vivax malaria transmission model. Seven population classes — susceptible S,
// exposed E, infected I, recovered-but-infectious Q, and three dormant
// (hypnozoite) stages H1..H3 with relapse H3 -> I — coupled to a two-stage
// linear chain (kappa, mu_SE) that low-pass filters the latent force of
// infection with a shape-2 gamma kernel of mean tau_D. The force of infection
// carries a seasonal log-linear term (periodic cubic B-spline basis plus
// rainfall) and multiplicative gamma white noise. Observations are monthly
// case counts, negative-binomial around the accumulated new-case integral.
//
// All rates are per month; integration is Euler-Maruyama with a fixed step.
struct MalariaSpec {
    // rates (per month)
    double delta = 1.0 / (50.0 * 12.0);  // mortality
    double mu_EI = 2.0;                  // latency exit
    double mu_IS = 1.0;                  // recovery to susceptible
    double mu_IQ = 0.5;                  // progression to Q
    double mu_IH = 1.0;                  // dormancy entry
    double mu_HI = 0.3;                  // relapse chain rate (stages move at 3 mu_HI)
    double mu_QS = 0.2;                  // Q to susceptible
    // fractions in [0, 1]
    double frac_a = 0.2;  // dormancy entries short-circuited back to S
    double frac_b = 0.5;  // latency exits short-circuited back to S
    double frac_q = 0.1;  // infectivity discount of the Q class
    double tau_D = 0.3;   // gamma-kernel mean delay (months)
    // seasonality: log-transmission spline coefficients and rainfall loading
    std::array<double, 6> spline_coeffs{3.0, 2.5, 3.5, 3.0, 2.5, 3.0};
    double rain_coeff = 0.0;
    double sigma_proc = 0.05;  // gamma white-noise intensity
    double report_rate = 0.3;  // scaling of accumulated new cases into counts
    double sigma_obs = 0.3;    // observation overdispersion (variance M + M^2 sigma_obs^2)
    // initial conditions
    std::array<double, 7> init_compartments{0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};  // persons
    double init_force = 1.0;  // kappa(0) = mu_SE(0)
    // fixed model constants (not estimated)
    double population = 1e6;
    double euler_step = 1.0 / 20.0;  // months

    static MalariaSpec synthetic_benchmark();  // defaults plus a consistent initial split
    void validate() const;
};

// State layout used throughout: (S, E, I, Q, H1, H2, H3, kappa, mu_SE), with
// the accumulated-case integral appended as a 10th component inside the POMP
// wrapper.
inline constexpr int kMalariaOdeDim = 9;

// Periodic cubic B-spline basis on a 12-month period, 6 uniformly spaced
// basis functions; nonnegative partition of unity.
std::array<double, 6> periodic_bspline_basis(double t_months);

// exp{sum_i b_i s_i(t) + b_r R(t)}
double malaria_seasonal_factor(const MalariaSpec& spec, double t, double rainfall);

// Deterministic force of infection lambda(t) = ((I + q Q)/P) * seasonal factor.
double malaria_lambda_det(std::span<const double> state, const MalariaSpec& spec, double t,
                          double rainfall);

// One gamma-noise increment of the latent force over a step of length h:
// lambda_det * dGamma with dGamma ~ Gamma(h/sigma_P^2, sigma_P^2) (mean h).
// sigma_P = 0 degenerates to the deterministic lambda_det * h.
double latent_force_increment(std::span<const double> state, const MalariaSpec& spec, double t,
                              double rainfall, double h, RngStream& rng);

// Time derivative of the 9-dimensional state at the given force of infection
// value (pass malaria_lambda_det for the noise-free field).
void malaria_drift(std::span<const double> state, const MalariaSpec& spec, double lambda_value,
                   std::span<double> deriv);

// Integrated new-case rate entering the observation mean:
// report_rate * (mu_EI E + 3 mu_HI H3).
double malaria_case_rate(std::span<const double> state, const MalariaSpec& spec);

struct MalariaPath {
    Eigen::MatrixXd states;            // (months+1) x 9, month-boundary snapshots
    std::vector<double> monthly_cases; // accumulated M_n per month
    long clamp_events = 0;             // negative compartments clamped to 0
    long total_substeps = 0;
    bool clamp_warning = false;        // more than 1% of substeps clamped
};

// Full-path simulation over `months` months; deterministic given seed.
MalariaPath euler_maruyama_simulate(const MalariaSpec& spec, int months, std::uint64_t seed,
                                    const CovariateTable* rainfall = nullptr);

// log P(y | NegBin with the stated mean/variance): size 1/sigma_obs_sq,
// success probability size/(size + mean). mean 0 yields -inf; negative mean
// is an error.
double negbin_logpdf(double y, double mean, double sigma_obs_sq);

// Monthly synthetic dataset: latent path plus negative-binomial draws.
TimeSeriesData malaria_simulate_data(const MalariaSpec& spec, int months, std::uint64_t seed,
                                     const CovariateTable* rainfall = nullptr);

// POMP wrapper. The parameter vector (natural scale) is
//   [delta, mu_EI, mu_IS, mu_IQ, mu_IH, mu_HI, mu_QS,     (log)
//    frac_a, frac_b, frac_q,                               (logit)
//    tau_D,                                                (log)
//    b1..b6, b_rain,                                       (identity)
//    sigma_proc,                                           (log)
//    rho,                                                  (logit)
//    sigma_obs,                                            (log)
//    w_S, w_E, w_I, w_Q, w_H1, w_H2, w_H3,                 (log, IVP)
//    init_force]                                           (log, IVP)
// where the w_* are initial-split weights normalized to the population, so
// perturbed IVPs always produce a valid split.
class MalariaModel : public PompModel {
public:
    MalariaModel(MalariaSpec base, std::optional<CovariateTable> rainfall = std::nullopt);

    static constexpr int kParamDim = 29;

    int param_dim() const override { return kParamDim; }
    int state_dim() const override { return kMalariaOdeDim + 1; }  // + case accumulator
    int obs_dim() const override { return 1; }
    const ParamTransform& param_transform() const override { return transform_; }
    std::vector<std::string> param_names() const override;
    std::vector<bool> ivp_mask() const override;

    void simulate_initial(std::span<const double> theta_nat, RngStream& rng,
                          std::span<double> x0) const override;
    void simulate_transition(std::span<const double> theta_nat, double t_prev, double t_next,
                             std::span<const double> x_prev, RngStream& rng,
                             std::span<double> x_next) const override;
    double measurement_logpdf(std::span<const double> y, std::span<const double> x,
                              std::span<const double> theta_nat, double t) const override;

    // Natural-scale parameter vector of a spec (weights as fractions of P).
    Eigen::VectorXd pack_params(const MalariaSpec& spec) const;
    MalariaSpec unpack_params(std::span<const double> theta_nat) const;

    const MalariaSpec& base() const { return base_; }

private:
    double rainfall_at(double t) const;

    MalariaSpec base_;
    std::optional<CovariateTable> rainfall_;
    ParamTransform transform_;
};

}  // namespace aif
