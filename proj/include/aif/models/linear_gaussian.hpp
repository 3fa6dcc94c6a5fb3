#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "aif/pomp_model.hpp"

namespace aif {

// Bivariate Gaussian autoregression:
//   X_n | X_{n-1} = x ~ N(alpha x, sigma^T sigma),  Y_n | X_n = x ~ N(x, obs_cov),
// with a fixed (point-mass) initial state. Cheap enough to filter exactly,
// which makes it the reference problem for every Monte Carlo check here.
struct LinearGaussianSpec {
    Eigen::Matrix2d alpha;
    Eigen::Matrix2d sigma;    // process noise factor; covariance is sigma^T sigma
    Eigen::Matrix2d obs_cov;
    Eigen::Vector2d x0;

    // The benchmark configuration: alpha = [0.8 -0.5; 0.3 0.9],
    // sigma = [3 0; -0.5 2], identity observation noise, x0 = (-3, 4).
    static LinearGaussianSpec benchmark();

    void validate() const;
};

struct KalmanResult {
    double loglik = 0.0;
    std::vector<Eigen::Vector2d> pred_means, filt_means;
    std::vector<Eigen::Matrix2d> pred_covs, filt_covs;
};

// Exact filtering recursion; loglik is the exact log marginal density of the
// observations. Throws on a singular innovation covariance.
KalmanResult kalman_loglik(const LinearGaussianSpec& spec, const TimeSeriesData& data);

// Exact simulation from the model; deterministic given seed. The latent
// states (n_times x 2) are exposed on request.
TimeSeriesData lg_simulate(const LinearGaussianSpec& spec, int n_times, std::uint64_t seed,
                           Eigen::MatrixXd* latent_states = nullptr);

// The estimated coordinates throughout: theta = (alpha2, alpha3), the
// off-diagonal entries of alpha (row-major numbering).
LinearGaussianSpec lg_with_theta(const LinearGaussianSpec& base, const Eigen::VectorXd& theta);

// Central finite differences of the exact log-likelihood in theta.
Eigen::VectorXd kalman_fd_gradient(const LinearGaussianSpec& base, const TimeSeriesData& data,
                                   const Eigen::VectorXd& theta, double fd_step = 1e-5);

struct KalmanMleResult {
    Eigen::VectorXd theta;
    double loglik = 0.0;
    double grad_norm = 0.0;
};

// Reference maximizer of the exact likelihood over theta: accelerated-gradient
// runs on the finite-difference gradient from a grid of starts, driven until
// the gradient norm drops below grad_tol.
KalmanMleResult kalman_mle(const LinearGaussianSpec& base, const TimeSeriesData& data,
                           double fd_step = 1e-5, double grad_tol = 1e-6,
                           int max_rounds = 40);

class LinearGaussianModel : public PompModel {
public:
    explicit LinearGaussianModel(LinearGaussianSpec base);

    int param_dim() const override { return 2; }
    int state_dim() const override { return 2; }
    int obs_dim() const override { return 2; }
    const ParamTransform& param_transform() const override { return transform_; }
    std::vector<std::string> param_names() const override { return {"alpha2", "alpha3"}; }

    void simulate_initial(std::span<const double> theta_nat, RngStream& rng,
                          std::span<double> x0) const override;
    void simulate_transition(std::span<const double> theta_nat, double t_prev, double t_next,
                             std::span<const double> x_prev, RngStream& rng,
                             std::span<double> x_next) const override;
    double measurement_logpdf(std::span<const double> y, std::span<const double> x,
                              std::span<const double> theta_nat, double t) const override;

    const LinearGaussianSpec& base() const { return base_; }

private:
    LinearGaussianSpec base_;
    ParamTransform transform_;
    Eigen::Matrix2d noise_factor_;   // sigma^T: noise = sigma^T z, z ~ N(0, I)
    Eigen::Matrix2d obs_cov_inv_;
    double obs_logdet_ = 0.0;
};

}  // namespace aif
