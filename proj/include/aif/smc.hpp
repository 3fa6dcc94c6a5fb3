#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "aif/pomp_model.hpp"

namespace aif {

// Particle system at one time step. States (and, for perturbed-parameter
// filtering, per-particle parameters) are stored flat, particle-major.
struct ParticleCloud {
    int count = 0;      // J
    int state_dim = 0;  // d_x
    int param_dim = 0;  // p, 0 for plain filtering
    std::vector<double> states;      // J * d_x
    std::vector<double> params;      // J * p (estimation scale), empty when plain
    std::vector<double> logweights;  // J

    std::span<double> state(int j) {
        return {states.data() + static_cast<std::size_t>(j) * state_dim,
                static_cast<std::size_t>(state_dim)};
    }
    std::span<const double> state(int j) const {
        return {states.data() + static_cast<std::size_t>(j) * state_dim,
                static_cast<std::size_t>(state_dim)};
    }
    std::span<double> param(int j) {
        return {params.data() + static_cast<std::size_t>(j) * param_dim,
                static_cast<std::size_t>(param_dim)};
    }
    std::span<const double> param(int j) const {
        return {params.data() + static_cast<std::size_t>(j) * param_dim,
                static_cast<std::size_t>(param_dim)};
    }
};

// Random-walk perturbation settings for one estimation run. Scales live on
// the estimation scale; coordinates with sigma 0 are never perturbed and
// IVP coordinates are perturbed only at time zero.
struct PerturbSpec {
    Eigen::VectorXd sigmas;          // per-coordinate sd, length p
    double cooling_c = 0.95;         // geometric factor applied as c^(m-1)
    double init_multiplier = 1.0;    // C: time-zero scale is C * c^(m-1) * sigma
    std::vector<bool> ivp_mask;

    void validate(int param_dim) const;
    double cooled_scale(int iteration) const;  // c^(m-1), iteration m >= 1
};

struct FilterOutput {
    double loglik = 0.0;
    // N x p conditional means of the resampled parameter particles; 0x0 when
    // plain filtering was used.
    Eigen::MatrixXd param_filter_means;
    std::vector<double> ess_trace;      // length N, values in [1, J]
    std::vector<int> degeneracy_flags;  // observation indices with all -inf weights

    bool has_param_means() const { return param_filter_means.size() > 0; }
};

// Exp-normalizes log weights with a max shift. Returns the log mean
// unnormalized weight, log((1/J) sum exp(lw_j)); throws DegeneracyError
// (carrying time_index) when every entry is -inf.
double normalize_logweights(std::span<const double> logweights, std::span<double> weights,
                            int time_index = -1);

// Low-variance resampling from one uniform draw: grid points (u+j)/J, each
// mapped to the smallest index whose cumulative weight reaches the point.
// Offspring counts satisfy floor(J*w_i) <= N_i <= ceil(J*w_i).
void systematic_resample(std::span<const double> weights, RngStream& rng,
                         std::span<int> indices);

// Deterministic core with the uniform draw supplied by the caller.
void systematic_resample_with_u(std::span<const double> weights, double u,
                                std::span<int> indices);

// Plain bootstrap filter: propagate, weight by the measurement density,
// resample every step. theta on the NATURAL scale. Deterministic given seed.
FilterOutput bootstrap_filter(const PompModel& model, const Eigen::VectorXd& theta_nat,
                              const TimeSeriesData& data, int particles, std::uint64_t seed);

// Perturbed-parameter bootstrap filter (the iterated-filtering inner loop).
// theta_center on the ESTIMATION scale; parameter particles start at
// N(center, (C c^(m-1) sigma)^2), non-IVP coordinates take a random-walk step
// of sd c^(m-1) sigma before each propagation, and parameters are resampled
// jointly with states. Records per-time means of the resampled parameters.
FilterOutput perturbed_filter(const PompModel& model, const Eigen::VectorXd& theta_center_est,
                              const TimeSeriesData& data, int particles,
                              const PerturbSpec& spec, int iteration, std::uint64_t seed);

// Same inner loop, but parameter particles start from caller-supplied swarm
// values (J x p, estimation scale) re-perturbed at time zero; the swarm is
// replaced by the final-time resampled particles. Used by swarm-carrying
// estimators.
FilterOutput perturbed_filter_swarm(const PompModel& model, Eigen::MatrixXd& swarm,
                                    const TimeSeriesData& data, const PerturbSpec& spec,
                                    int iteration, std::uint64_t seed);

enum class ScoreMode { Sum, Averaged };

// Score estimate from perturbed-parameter filter means:
//   S = c^(-2(m-1)) Psi^{-1} sum_n (theta_bar_n - theta_ref)
// with Psi = diag(sigma_i^2) on perturbed non-IVP coordinates; other
// coordinates get score 0. Averaged mode divides by (N+1).
Eigen::VectorXd estimate_score(const FilterOutput& filter_out, const Eigen::VectorXd& theta_ref,
                               const PerturbSpec& spec, int iteration, ScoreMode mode);

}  // namespace aif
