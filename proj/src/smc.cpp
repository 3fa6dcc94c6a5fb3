#include "aif/smc.hpp"

#include <cmath>
#include <limits>

#include "aif/errors.hpp"
#include "aif/numeric.hpp"

namespace aif {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Particles are striped into fixed-size blocks, each with its own rng stream
// per time step, so results never depend on how blocks are scheduled.
constexpr int kBlockSize = 256;

int block_count(int particles) { return (particles + kBlockSize - 1) / kBlockSize; }

}  // namespace

void PerturbSpec::validate(int param_dim) const {
    if (sigmas.size() != param_dim)
        throw DimensionError("PerturbSpec: sigma length disagrees with parameter dimension");
    if (static_cast<int>(ivp_mask.size()) != param_dim)
        throw DimensionError("PerturbSpec: ivp_mask length disagrees with parameter dimension");
    for (int i = 0; i < sigmas.size(); ++i)
        if (!(sigmas[i] >= 0.0) || !std::isfinite(sigmas[i]))
            throw DomainError("PerturbSpec: sigma must be finite and >= 0 at index " +
                              std::to_string(i));
    // c = 1 means no cooling; useful for single-iteration checks.
    if (!(cooling_c > 0.0 && cooling_c <= 1.0))
        throw DomainError("PerturbSpec: cooling rate must lie in (0, 1]");
    if (!(init_multiplier > 0.0))
        throw DomainError("PerturbSpec: initial scale multiplier must be > 0");
}

double PerturbSpec::cooled_scale(int iteration) const {
    if (iteration < 1) throw DomainError("PerturbSpec: iteration must be >= 1");
    return std::pow(cooling_c, iteration - 1);
}

double normalize_logweights(std::span<const double> logweights, std::span<double> weights,
                            int time_index) {
    if (logweights.empty() || weights.size() != logweights.size())
        throw DimensionError("normalize_logweights: bad spans");
    double max_lw = kNegInf;
    for (double lw : logweights) max_lw = std::max(max_lw, lw);
    if (max_lw == kNegInf)
        throw DegeneracyError("all particle weights are -inf at n=" + std::to_string(time_index),
                              time_index);
    for (std::size_t j = 0; j < logweights.size(); ++j)
        weights[j] = std::exp(logweights[j] - max_lw);
    const double total = pairwise_sum({weights.data(), weights.size()});
    for (std::size_t j = 0; j < weights.size(); ++j) weights[j] /= total;
    return max_lw + std::log(total) - std::log(static_cast<double>(logweights.size()));
}

void systematic_resample_with_u(std::span<const double> weights, double u,
                                std::span<int> indices) {
    const int n = static_cast<int>(weights.size());
    if (n < 1 || static_cast<int>(indices.size()) != n)
        throw DimensionError("systematic_resample: bad spans");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw DomainError("systematic_resample: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw DomainError("systematic_resample: weights must sum to 1");

    double cumulative = weights[0];
    int i = 0;
    for (int j = 0; j < n; ++j) {
        const double point = (u + j) / n;
        while (cumulative < point && i < n - 1) {
            ++i;
            cumulative += weights[i];
        }
        indices[j] = i;
    }
}

void systematic_resample(std::span<const double> weights, RngStream& rng,
                         std::span<int> indices) {
    systematic_resample_with_u(weights, rng.uniform(), indices);
}

namespace {

// Shared bootstrap loop. Exactly one of theta_nat (plain filtering) or spec
// (perturbed-parameter filtering) drives the parameter handling; in perturbed
// mode the initial particle centers come from `center_est` or, when given,
// per-particle rows of `swarm_est` (which also receives the final particles).
//
// Stream discipline: one stream per (purpose, time step, particle block).
// Perturbation draws never share a stream with propagation draws, so a run
// with all sigmas zero consumes exactly the plain filter's streams and
// reproduces its log-likelihood bit for bit.
FilterOutput filter_core(const PompModel& model, const TimeSeriesData& data, int particles,
                         std::uint64_t seed, const Eigen::VectorXd* theta_nat,
                         const Eigen::VectorXd* center_est, Eigen::MatrixXd* swarm_est,
                         const PerturbSpec* spec, int iteration) {
    data.validate();
    if (particles < 2) throw DomainError("filter: need at least 2 particles");
    if (data.obs_dim() != model.obs_dim())
        throw DimensionError("filter: observation dimension mismatch");

    const int d_x = model.state_dim();
    const int p = model.param_dim();
    const int n_times = data.n_obs();
    const int J = particles;
    const bool perturbed = spec != nullptr;
    const int n_blocks = block_count(J);

    if (perturbed) {
        spec->validate(p);
        if (center_est && center_est->size() != p)
            throw DimensionError("filter: center dimension mismatch");
        if (swarm_est && (swarm_est->rows() != J || swarm_est->cols() != p))
            throw DimensionError("filter: swarm must be J x p");
    } else if (theta_nat->size() != p) {
        throw DimensionError("filter: parameter dimension mismatch");
    }

    ParticleCloud cloud;
    cloud.count = J;
    cloud.state_dim = d_x;
    cloud.param_dim = perturbed ? p : 0;
    cloud.states.resize(static_cast<std::size_t>(J) * d_x);
    cloud.logweights.resize(J);
    if (perturbed) cloud.params.resize(static_cast<std::size_t>(J) * p);

    std::vector<double> states_next(cloud.states.size());
    std::vector<double> params_next(cloud.params.size());
    std::vector<double> params_nat(cloud.params.size());
    std::vector<double> weights(J);
    std::vector<int> ancestors(J);
    std::vector<double> column(J);

    FilterOutput out;
    out.ess_trace.reserve(n_times);
    if (perturbed) out.param_filter_means.resize(n_times, p);

    const ParamTransform& transform = model.param_transform();
    const double scale = perturbed ? spec->cooled_scale(iteration) : 1.0;

    const auto nat_param = [&](int j) -> std::span<const double> {
        if (!perturbed)
            return {theta_nat->data(), static_cast<std::size_t>(p)};
        return {params_nat.data() + static_cast<std::size_t>(j) * p, static_cast<std::size_t>(p)};
    };
    const auto refresh_nat = [&](int j) {
        if (perturbed)
            transform.inverse_into(cloud.param(j),
                                   {params_nat.data() + static_cast<std::size_t>(j) * p,
                                    static_cast<std::size_t>(p)});
    };

    // Time zero: draw parameter particles, then initial states.
    if (perturbed) {
        for (int b = 0; b < n_blocks; ++b) {
            RngStream rng(seed, stream_id::make(stream_id::InitParam, 0, b));
            const int j_hi = std::min(J, (b + 1) * kBlockSize);
            for (int j = b * kBlockSize; j < j_hi; ++j) {
                auto theta_j = cloud.param(j);
                for (int i = 0; i < p; ++i) {
                    const double base = swarm_est ? (*swarm_est)(j, i) : (*center_est)[i];
                    const double sd0 = spec->init_multiplier * scale * spec->sigmas[i];
                    theta_j[i] = sd0 > 0.0 ? base + sd0 * rng.normal() : base;
                }
            }
        }
        for (int j = 0; j < J; ++j) refresh_nat(j);
    }
    for (int b = 0; b < n_blocks; ++b) {
        RngStream rng(seed, stream_id::make(stream_id::InitState, 0, b));
        const int j_hi = std::min(J, (b + 1) * kBlockSize);
        for (int j = b * kBlockSize; j < j_hi; ++j)
            model.simulate_initial(nat_param(j), rng, cloud.state(j));
    }

    double t_prev = data.t0;
    for (int n = 1; n <= n_times; ++n) {
        const double t = data.times[n - 1];

        // Random-walk step on non-IVP coordinates.
        if (perturbed) {
            for (int b = 0; b < n_blocks; ++b) {
                RngStream rng(seed, stream_id::make(stream_id::Perturb, n, b));
                const int j_hi = std::min(J, (b + 1) * kBlockSize);
                for (int j = b * kBlockSize; j < j_hi; ++j) {
                    auto theta_j = cloud.param(j);
                    for (int i = 0; i < p; ++i) {
                        if (spec->ivp_mask[i] || spec->sigmas[i] == 0.0) continue;
                        theta_j[i] += scale * spec->sigmas[i] * rng.normal();
                    }
                }
            }
            for (int j = 0; j < J; ++j) refresh_nat(j);
        }

        for (int b = 0; b < n_blocks; ++b) {
            RngStream rng(seed, stream_id::make(stream_id::Propagate, n, b));
            const int j_hi = std::min(J, (b + 1) * kBlockSize);
            for (int j = b * kBlockSize; j < j_hi; ++j)
                model.simulate_transition(nat_param(j), t_prev, t, cloud.state(j), rng,
                                          {states_next.data() + static_cast<std::size_t>(j) * d_x,
                                           static_cast<std::size_t>(d_x)});
        }
        cloud.states.swap(states_next);

        const Eigen::VectorXd y_row = data.observations.row(n - 1);
        const std::span<const double> y{y_row.data(), static_cast<std::size_t>(y_row.size())};
        for (int j = 0; j < J; ++j) {
            const double lp = model.measurement_logpdf(y, cloud.state(j), nat_param(j), t);
            if (std::isnan(lp))
                throw DomainError("measurement logpdf returned NaN at n=" + std::to_string(n));
            cloud.logweights[j] = lp;
        }

        double log_mean_weight;
        try {
            log_mean_weight = normalize_logweights(cloud.logweights, weights, n);
        } catch (DegeneracyError&) {
            out.degeneracy_flags.push_back(n);
            throw;
        }
        out.loglik += log_mean_weight;

        double sumsq = 0.0;
        for (double w : weights) sumsq += w * w;
        out.ess_trace.push_back(1.0 / sumsq);

        RngStream resample_rng(seed, stream_id::make(stream_id::Resample, n, 0));
        systematic_resample(weights, resample_rng, ancestors);
        for (int j = 0; j < J; ++j) {
            const int a = ancestors[j];
            std::copy_n(cloud.states.data() + static_cast<std::size_t>(a) * d_x, d_x,
                        states_next.data() + static_cast<std::size_t>(j) * d_x);
            if (perturbed)
                std::copy_n(cloud.params.data() + static_cast<std::size_t>(a) * p, p,
                            params_next.data() + static_cast<std::size_t>(j) * p);
        }
        cloud.states.swap(states_next);
        if (perturbed) {
            cloud.params.swap(params_next);
            for (int j = 0; j < J; ++j) refresh_nat(j);
            // Per-time filter mean of the resampled parameter particles,
            // centered on the first particle so a constant column (e.g. an
            // unperturbed coordinate) averages to its value exactly.
            for (int i = 0; i < p; ++i) {
                const double base = cloud.params[i];
                for (int j = 0; j < J; ++j)
                    column[j] = cloud.params[static_cast<std::size_t>(j) * p + i] - base;
                out.param_filter_means(n - 1, i) = base + pairwise_sum(column) / J;
            }
        }
        t_prev = t;
    }

    if (swarm_est)
        for (int j = 0; j < J; ++j)
            for (int i = 0; i < p; ++i) (*swarm_est)(j, i) = cloud.params[static_cast<std::size_t>(j) * p + i];

    return out;
}

}  // namespace

FilterOutput bootstrap_filter(const PompModel& model, const Eigen::VectorXd& theta_nat,
                              const TimeSeriesData& data, int particles, std::uint64_t seed) {
    return filter_core(model, data, particles, seed, &theta_nat, nullptr, nullptr, nullptr, 0);
}

FilterOutput perturbed_filter(const PompModel& model, const Eigen::VectorXd& theta_center_est,
                              const TimeSeriesData& data, int particles,
                              const PerturbSpec& spec, int iteration, std::uint64_t seed) {
    return filter_core(model, data, particles, seed, nullptr, &theta_center_est, nullptr, &spec,
                       iteration);
}

FilterOutput perturbed_filter_swarm(const PompModel& model, Eigen::MatrixXd& swarm,
                                    const TimeSeriesData& data, const PerturbSpec& spec,
                                    int iteration, std::uint64_t seed) {
    return filter_core(model, data, static_cast<int>(swarm.rows()), seed, nullptr, nullptr,
                       &swarm, &spec, iteration);
}

Eigen::VectorXd estimate_score(const FilterOutput& filter_out, const Eigen::VectorXd& theta_ref,
                               const PerturbSpec& spec, int iteration, ScoreMode mode) {
    if (!filter_out.has_param_means())
        throw DomainError("estimate_score: filter output carries no parameter filter means");
    const int p = static_cast<int>(theta_ref.size());
    const int n_times = static_cast<int>(filter_out.param_filter_means.rows());
    if (filter_out.param_filter_means.cols() != p)
        throw DimensionError("estimate_score: dimension mismatch");
    spec.validate(p);

    const double scale = spec.cooled_scale(iteration);
    Eigen::VectorXd score = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < p; ++i) {
        // Psi inversion is restricted to perturbed non-IVP coordinates.
        if (spec.ivp_mask[i] || spec.sigmas[i] == 0.0) continue;
        double acc = 0.0;
        for (int n = 0; n < n_times; ++n)
            acc += filter_out.param_filter_means(n, i) - theta_ref[i];
        score[i] = acc / (scale * scale * spec.sigmas[i] * spec.sigmas[i]);
    }
    if (mode == ScoreMode::Averaged) score /= static_cast<double>(n_times + 1);
    return score;
}

}  // namespace aif
