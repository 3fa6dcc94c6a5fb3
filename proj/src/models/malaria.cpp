#include "aif/models/malaria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aif/errors.hpp"

namespace aif {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kPeriod = 12.0;  // months
constexpr int kBasisCount = 6;
constexpr double kKnotSpacing = kPeriod / kBasisCount;

// Uniform cubic B-spline bump on [0, 4) in knot units.
double cubic_bspline_bump(double u) {
    if (u < 0.0 || u >= 4.0) return 0.0;
    if (u < 1.0) return u * u * u / 6.0;
    if (u < 2.0) return (-3.0 * u * u * u + 12.0 * u * u - 12.0 * u + 4.0) / 6.0;
    if (u < 3.0) return (3.0 * u * u * u - 24.0 * u * u + 60.0 * u - 44.0) / 6.0;
    const double v = 4.0 - u;
    return v * v * v / 6.0;
}

}  // namespace

std::array<double, 6> periodic_bspline_basis(double t_months) {
    double x = std::fmod(t_months, kPeriod) / kKnotSpacing;  // knot units in [0, 6)
    if (x < 0.0) x += static_cast<double>(kBasisCount);
    std::array<double, 6> basis{};
    for (int i = 0; i < kBasisCount; ++i) {
        double u = x - i;
        if (u < 0.0) u += static_cast<double>(kBasisCount);  // periodic wrap
        basis[i] = cubic_bspline_bump(u);
    }
    return basis;
}

MalariaSpec MalariaSpec::synthetic_benchmark() {
    MalariaSpec s;
    s.spline_coeffs = {1.0, 0.8, 1.4, 1.6, 1.2, 0.9};
    s.population = 1e5;
    s.init_compartments = {0.8e5, 0.004e5, 0.025e5, 0.06e5, 0.037e5, 0.037e5, 0.037e5};
    s.init_force = 0.1;
    s.sigma_obs = 0.15;
    return s;
}

void MalariaSpec::validate() const {
    const double rates[] = {delta, mu_EI, mu_IS, mu_IQ, mu_IH, mu_HI, mu_QS, tau_D};
    for (double r : rates)
        if (!(r >= 0.0) || !std::isfinite(r))
            throw DomainError("MalariaSpec: rates must be finite and >= 0");
    const double fracs[] = {frac_a, frac_b, frac_q, report_rate};
    for (double f : fracs)
        if (!(f >= 0.0 && f <= 1.0)) throw DomainError("MalariaSpec: fractions must lie in [0,1]");
    for (double c : init_compartments)
        if (!(c >= 0.0)) throw DomainError("MalariaSpec: initial compartments must be >= 0");
    if (!(population > 0.0)) throw DomainError("MalariaSpec: population must be > 0");
    if (!(euler_step > 0.0)) throw DomainError("MalariaSpec: integration step must be > 0");
    if (!(sigma_proc >= 0.0) || !(sigma_obs >= 0.0))
        throw DomainError("MalariaSpec: noise intensities must be >= 0");
}

double malaria_seasonal_factor(const MalariaSpec& spec, double t, double rainfall) {
    const std::array<double, 6> basis = periodic_bspline_basis(t);
    double exponent = spec.rain_coeff * rainfall;
    for (int i = 0; i < kBasisCount; ++i) exponent += spec.spline_coeffs[i] * basis[i];
    return std::exp(exponent);
}

double malaria_lambda_det(std::span<const double> state, const MalariaSpec& spec, double t,
                          double rainfall) {
    const double infectious = state[2] + spec.frac_q * state[3];  // I + q Q
    if (infectious <= 0.0) return 0.0;
    return infectious / spec.population * malaria_seasonal_factor(spec, t, rainfall);
}

double latent_force_increment(std::span<const double> state, const MalariaSpec& spec, double t,
                              double rainfall, double h, RngStream& rng) {
    if (!(spec.population > 0.0) || !(h > 0.0))
        throw DomainError("latent_force_increment: need P > 0 and h > 0");
    const double lambda_det = malaria_lambda_det(state, spec, t, rainfall);
    if (spec.sigma_proc == 0.0) return lambda_det * h;
    const double s2 = spec.sigma_proc * spec.sigma_proc;
    const double increment = rng.gamma(h / s2, s2);  // mean h, variance s2 h
    return lambda_det * increment;
}

void malaria_drift(std::span<const double> state, const MalariaSpec& spec, double lambda_value,
                   std::span<double> deriv) {
    const double S = state[0], E = state[1], I = state[2], Q = state[3];
    const double H1 = state[4], H2 = state[5], H3 = state[6];
    const double kappa = state[7], mu_SE = state[8];
    const double d = spec.delta;
    const double stage_rate = 3.0 * spec.mu_HI;
    const double P = spec.population;  // constant, dP/dt = 0

    deriv[0] = d * P + spec.mu_IS * I + spec.mu_QS * Q + spec.frac_a * spec.mu_IH * I +
               spec.frac_b * spec.mu_EI * E - mu_SE * S - d * S;
    deriv[1] = mu_SE * S - spec.mu_EI * E - d * E;
    deriv[2] = (1.0 - spec.frac_b) * spec.mu_EI * E + stage_rate * H3 -
               (spec.mu_IH + spec.mu_IS + spec.mu_IQ) * I - d * I;
    deriv[3] = spec.mu_IQ * I - spec.mu_QS * Q - d * Q;
    deriv[4] = (1.0 - spec.frac_a) * spec.mu_IH * I - stage_rate * H1 - d * H1;
    deriv[5] = stage_rate * H1 - stage_rate * H2 - d * H2;
    deriv[6] = stage_rate * H2 - stage_rate * H3 - d * H3;
    deriv[7] = (lambda_value - kappa) / spec.tau_D;
    deriv[8] = (kappa - mu_SE) / spec.tau_D;
}

double malaria_case_rate(std::span<const double> state, const MalariaSpec& spec) {
    return spec.report_rate * (spec.mu_EI * state[1] + 3.0 * spec.mu_HI * state[6]);
}

namespace {

struct SubstepCounters {
    long clamped = 0;
    long total = 0;
};

// One Euler-Maruyama substep in place; the case accumulator (if present as a
// 10th component) integrates the left-endpoint case rate.
void euler_substep(std::span<double> state, const MalariaSpec& spec, double t, double h,
                   double rainfall, RngStream& rng, SubstepCounters& counters) {
    const double lambda_inc = latent_force_increment(state, spec, t, rainfall, h, rng);
    double deriv[kMalariaOdeDim];
    malaria_drift(state.first(kMalariaOdeDim), spec, lambda_inc / h, deriv);
    const double cases = malaria_case_rate(state, spec);
    ++counters.total;
    for (int i = 0; i < kMalariaOdeDim; ++i) {
        state[i] += h * deriv[i];
        if (state[i] < 0.0) {
            state[i] = 0.0;
            ++counters.clamped;
        }
    }
    if (state.size() > kMalariaOdeDim) state[kMalariaOdeDim] += h * cases;
}

void integrate_interval(std::span<double> state, const MalariaSpec& spec, double t_from,
                        double t_to, double rainfall_value, RngStream& rng,
                        SubstepCounters& counters) {
    const double span = t_to - t_from;
    const int substeps = std::max(1, static_cast<int>(std::lround(span / spec.euler_step)));
    const double h = span / substeps;
    double t = t_from;
    for (int s = 0; s < substeps; ++s) {
        euler_substep(state, spec, t, h, rainfall_value, rng, counters);
        t = t_from + (s + 1) * h;
    }
}

}  // namespace

MalariaPath euler_maruyama_simulate(const MalariaSpec& spec, int months, std::uint64_t seed,
                                    const CovariateTable* rainfall) {
    spec.validate();
    if (months < 1) throw DomainError("euler_maruyama_simulate: need at least 1 month");

    MalariaPath path;
    path.states.resize(months + 1, kMalariaOdeDim);
    path.monthly_cases.resize(months);

    std::array<double, kMalariaOdeDim + 1> state{};
    for (int i = 0; i < 7; ++i) state[i] = spec.init_compartments[i];
    state[7] = spec.init_force;
    state[8] = spec.init_force;

    for (int i = 0; i < kMalariaOdeDim; ++i) path.states(0, i) = state[i];

    RngStream rng(seed, 0);
    SubstepCounters counters;
    for (int n = 1; n <= months; ++n) {
        state[kMalariaOdeDim] = 0.0;  // reset the case accumulator
        const double rain = rainfall ? rainfall->at(n - 1, 0) : 0.0;
        integrate_interval(state, spec, n - 1.0, static_cast<double>(n), rain, rng, counters);
        for (int i = 0; i < kMalariaOdeDim; ++i) path.states(n, i) = state[i];
        path.monthly_cases[n - 1] = state[kMalariaOdeDim];
    }
    path.clamp_events = counters.clamped;
    path.total_substeps = counters.total;
    path.clamp_warning = counters.clamped * 100 > counters.total;
    return path;
}

double negbin_logpdf(double y, double mean, double sigma_obs_sq) {
    if (!(y >= 0.0)) throw DomainError("negbin_logpdf: counts must be >= 0");
    if (mean < 0.0 || !std::isfinite(mean)) throw DomainError("negbin_logpdf: mean must be >= 0");
    if (sigma_obs_sq < 0.0) throw DomainError("negbin_logpdf: overdispersion must be >= 0");
    if (mean == 0.0) return kNegInf;  // zero-mean convention, even at y = 0
    if (sigma_obs_sq == 0.0)  // Poisson limit
        return y * std::log(mean) - mean - std::lgamma(y + 1.0);
    const double size = 1.0 / sigma_obs_sq;
    const double log_p = std::log(size) - std::log(size + mean);
    const double log_q = std::log(mean) - std::log(size + mean);
    return std::lgamma(y + size) - std::lgamma(size) - std::lgamma(y + 1.0) + size * log_p +
           y * log_q;
}

TimeSeriesData malaria_simulate_data(const MalariaSpec& spec, int months, std::uint64_t seed,
                                     const CovariateTable* rainfall) {
    const MalariaPath path =
        euler_maruyama_simulate(spec, months, derive_seed(seed, SeedTag::DataSim, 0), rainfall);

    RngStream obs_rng(derive_seed(seed, SeedTag::DataSim, 1), 0);
    TimeSeriesData data;
    data.t0 = 0.0;
    data.times.resize(months);
    data.observations.resize(months, 1);
    for (int n = 1; n <= months; ++n) {
        data.times[n - 1] = n;
        const double m = path.monthly_cases[n - 1];
        double y = 0.0;
        if (m > 0.0) {
            if (spec.sigma_obs == 0.0) {
                y = static_cast<double>(obs_rng.poisson(m));
            } else {
                const double size = 1.0 / (spec.sigma_obs * spec.sigma_obs);
                const double rate = obs_rng.gamma(size, m / size);
                y = static_cast<double>(obs_rng.poisson(rate));
            }
        }
        data.observations(n - 1, 0) = y;
    }
    if (rainfall) data.covariates = *rainfall;
    return data;
}

MalariaModel::MalariaModel(MalariaSpec base, std::optional<CovariateTable> rainfall)
    : base_(std::move(base)), rainfall_(std::move(rainfall)) {
    base_.validate();
    if (rainfall_) rainfall_->validate();
    std::vector<CoordTransform> coords(kParamDim);
    for (int i = 0; i <= 6; ++i) coords[i] = CoordTransform::log();        // rates
    for (int i = 7; i <= 9; ++i) coords[i] = CoordTransform::logit();      // a, b, q
    coords[10] = CoordTransform::log();                                    // tau_D
    for (int i = 11; i <= 17; ++i) coords[i] = CoordTransform::identity(); // b1..b6, b_rain
    coords[18] = CoordTransform::log();                                    // sigma_proc
    coords[19] = CoordTransform::logit();                                  // rho
    coords[20] = CoordTransform::log();                                    // sigma_obs
    for (int i = 21; i <= 27; ++i) coords[i] = CoordTransform::log();      // init weights
    coords[28] = CoordTransform::log();                                    // init force
    transform_ = ParamTransform(std::move(coords));
}

std::vector<std::string> MalariaModel::param_names() const {
    return {"delta", "mu_EI", "mu_IS", "mu_IQ", "mu_IH", "mu_HI", "mu_QS",
            "frac_a", "frac_b", "frac_q", "tau_D",
            "b1", "b2", "b3", "b4", "b5", "b6", "b_rain",
            "sigma_proc", "rho", "sigma_obs",
            "w_S", "w_E", "w_I", "w_Q", "w_H1", "w_H2", "w_H3", "init_force"};
}

std::vector<bool> MalariaModel::ivp_mask() const {
    std::vector<bool> mask(kParamDim, false);
    for (int i = 21; i <= 28; ++i) mask[i] = true;
    return mask;
}

Eigen::VectorXd MalariaModel::pack_params(const MalariaSpec& spec) const {
    Eigen::VectorXd theta(kParamDim);
    theta << spec.delta, spec.mu_EI, spec.mu_IS, spec.mu_IQ, spec.mu_IH, spec.mu_HI, spec.mu_QS,
        spec.frac_a, spec.frac_b, spec.frac_q, spec.tau_D,
        spec.spline_coeffs[0], spec.spline_coeffs[1], spec.spline_coeffs[2],
        spec.spline_coeffs[3], spec.spline_coeffs[4], spec.spline_coeffs[5], spec.rain_coeff,
        spec.sigma_proc, spec.report_rate, spec.sigma_obs,
        spec.init_compartments[0] / spec.population, spec.init_compartments[1] / spec.population,
        spec.init_compartments[2] / spec.population, spec.init_compartments[3] / spec.population,
        spec.init_compartments[4] / spec.population, spec.init_compartments[5] / spec.population,
        spec.init_compartments[6] / spec.population, spec.init_force;
    return theta;
}

MalariaSpec MalariaModel::unpack_params(std::span<const double> theta_nat) const {
    MalariaSpec spec = base_;  // population, euler_step carried over
    spec.delta = theta_nat[0];
    spec.mu_EI = theta_nat[1];
    spec.mu_IS = theta_nat[2];
    spec.mu_IQ = theta_nat[3];
    spec.mu_IH = theta_nat[4];
    spec.mu_HI = theta_nat[5];
    spec.mu_QS = theta_nat[6];
    spec.frac_a = theta_nat[7];
    spec.frac_b = theta_nat[8];
    spec.frac_q = theta_nat[9];
    spec.tau_D = theta_nat[10];
    for (int i = 0; i < 6; ++i) spec.spline_coeffs[i] = theta_nat[11 + i];
    spec.rain_coeff = theta_nat[17];
    spec.sigma_proc = theta_nat[18];
    spec.report_rate = theta_nat[19];
    spec.sigma_obs = theta_nat[20];
    double weight_sum = 0.0;
    for (int i = 0; i < 7; ++i) weight_sum += theta_nat[21 + i];
    for (int i = 0; i < 7; ++i)
        spec.init_compartments[i] = spec.population * theta_nat[21 + i] / weight_sum;
    spec.init_force = theta_nat[28];
    return spec;
}

double MalariaModel::rainfall_at(double t) const {
    return rainfall_ ? rainfall_->at(t, 0) : 0.0;
}

void MalariaModel::simulate_initial(std::span<const double> theta_nat, RngStream&,
                                    std::span<double> x0) const {
    const MalariaSpec spec = unpack_params(theta_nat);
    for (int i = 0; i < 7; ++i) x0[i] = spec.init_compartments[i];
    x0[7] = spec.init_force;
    x0[8] = spec.init_force;
    x0[9] = 0.0;
}

void MalariaModel::simulate_transition(std::span<const double> theta_nat, double t_prev,
                                       double t_next, std::span<const double> x_prev,
                                       RngStream& rng, std::span<double> x_next) const {
    const MalariaSpec spec = unpack_params(theta_nat);
    std::copy(x_prev.begin(), x_prev.end(), x_next.begin());
    x_next[kMalariaOdeDim] = 0.0;  // fresh case accumulator for this interval
    SubstepCounters counters;
    integrate_interval(x_next, spec, t_prev, t_next, rainfall_at(t_prev), rng, counters);
}

double MalariaModel::measurement_logpdf(std::span<const double> y, std::span<const double> x,
                                        std::span<const double> theta_nat, double) const {
    const double sigma_obs = theta_nat[20];
    return negbin_logpdf(y[0], x[kMalariaOdeDim], sigma_obs * sigma_obs);
}

}  // namespace aif
