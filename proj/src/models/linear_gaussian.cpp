#include "aif/models/linear_gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "aif/aig.hpp"
#include "aif/errors.hpp"
#include "aif/numeric.hpp"

namespace aif {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double mvn2_logpdf(const Eigen::Vector2d& x, const Eigen::Vector2d& mean,
                   const Eigen::Matrix2d& cov) {
    const double det = cov.determinant();
    if (!(det > 0.0)) throw DomainError("singular 2x2 covariance");
    const Eigen::Vector2d d = x - mean;
    const double quad = d.dot(cov.inverse() * d);
    return -kLog2Pi - 0.5 * std::log(det) - 0.5 * quad;
}

}  // namespace

LinearGaussianSpec LinearGaussianSpec::benchmark() {
    LinearGaussianSpec s;
    s.alpha << 0.8, -0.5, 0.3, 0.9;
    s.sigma << 3.0, 0.0, -0.5, 2.0;
    s.obs_cov = Eigen::Matrix2d::Identity();
    s.x0 << -3.0, 4.0;
    return s;
}

void LinearGaussianSpec::validate() const {
    const Eigen::Matrix2d q = sigma.transpose() * sigma;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(q);
    if (es.eigenvalues().minCoeff() < -1e-12)
        throw DomainError("LinearGaussianSpec: process covariance not PSD");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eo(obs_cov);
    // PSD suffices for simulation; the filter separately rejects singular
    // innovation covariances.
    if (eo.eigenvalues().minCoeff() < -1e-12)
        throw DomainError("LinearGaussianSpec: observation covariance not PSD");
}

KalmanResult kalman_loglik(const LinearGaussianSpec& spec, const TimeSeriesData& data) {
    spec.validate();
    if (data.n_obs() > 0 && data.obs_dim() != 2)
        throw DimensionError("kalman_loglik: observation dimension must be 2");

    const Eigen::Matrix2d q = spec.sigma.transpose() * spec.sigma;
    KalmanResult result;
    Eigen::Vector2d m = spec.x0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();  // point-mass initial state

    for (int n = 0; n < data.n_obs(); ++n) {
        const Eigen::Vector2d m_pred = spec.alpha * m;
        const Eigen::Matrix2d p_pred = spec.alpha * cov * spec.alpha.transpose() + q;
        const Eigen::Matrix2d innov_cov = p_pred + spec.obs_cov;
        const double det = innov_cov.determinant();
        if (!(det > 0.0) || !std::isfinite(det))
            throw DomainError("kalman_loglik: singular innovation covariance at n=" +
                              std::to_string(n + 1));

        const Eigen::Vector2d y = data.observations.row(n);
        result.loglik += mvn2_logpdf(y, m_pred, innov_cov);

        const Eigen::Matrix2d gain = p_pred * innov_cov.inverse();
        m = m_pred + gain * (y - m_pred);
        cov = p_pred - gain * p_pred;
        cov = 0.5 * (cov + cov.transpose());  // keep symmetric

        result.pred_means.push_back(m_pred);
        result.pred_covs.push_back(p_pred);
        result.filt_means.push_back(m);
        result.filt_covs.push_back(cov);
    }
    return result;
}

TimeSeriesData lg_simulate(const LinearGaussianSpec& spec, int n_times, std::uint64_t seed,
                           Eigen::MatrixXd* latent_states) {
    spec.validate();
    if (n_times < 1) throw DomainError("lg_simulate: need at least one time point");

    // Symmetric square root handles PSD (possibly singular) observation noise.
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eo(spec.obs_cov);
    const Eigen::Matrix2d obs_factor =
        eo.eigenvectors() *
        eo.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
        eo.eigenvectors().transpose();

    TimeSeriesData data;
    data.t0 = 0.0;
    data.times.resize(n_times);
    data.observations.resize(n_times, 2);
    if (latent_states) latent_states->resize(n_times, 2);

    RngStream rng(derive_seed(seed, SeedTag::DataSim, 0), 0);
    Eigen::Vector2d x = spec.x0;
    for (int n = 1; n <= n_times; ++n) {
        const Eigen::Vector2d z{rng.normal(), rng.normal()};
        x = spec.alpha * x + spec.sigma.transpose() * z;
        const Eigen::Vector2d e{rng.normal(), rng.normal()};
        const Eigen::Vector2d y = x + obs_factor * e;
        data.times[n - 1] = n;
        data.observations.row(n - 1) = y;
        if (latent_states) latent_states->row(n - 1) = x;
    }
    return data;
}

LinearGaussianSpec lg_with_theta(const LinearGaussianSpec& base, const Eigen::VectorXd& theta) {
    if (theta.size() != 2) throw DimensionError("lg_with_theta: theta must have dimension 2");
    LinearGaussianSpec spec = base;
    spec.alpha(0, 1) = theta[0];  // alpha2
    spec.alpha(1, 0) = theta[1];  // alpha3
    return spec;
}

Eigen::VectorXd kalman_fd_gradient(const LinearGaussianSpec& base, const TimeSeriesData& data,
                                   const Eigen::VectorXd& theta, double fd_step) {
    if (!(fd_step > 0.0)) throw DomainError("kalman_fd_gradient: step must be > 0");
    return central_fd_gradient(
        [&](const Eigen::VectorXd& th) { return kalman_loglik(lg_with_theta(base, th), data).loglik; },
        theta, fd_step);
}

KalmanMleResult kalman_mle(const LinearGaussianSpec& base, const TimeSeriesData& data,
                           double fd_step, double grad_tol, int max_rounds) {
    const auto grad_fn = [&](const Eigen::VectorXd& th) {
        return kalman_fd_gradient(base, data, th, fd_step);
    };
    const Eigen::VectorXd lower = Eigen::Vector2d(-1.0, -1.0);
    const Eigen::VectorXd upper = Eigen::Vector2d(1.0, 1.0);
    const double lipschitz = estimate_lipschitz(grad_fn, lower, upper, /*seed=*/1234);

    const GradientOracle oracle = [&](const Eigen::VectorXd& th, int) {
        return OracleResult{grad_fn(th), std::nullopt};
    };

    KalmanMleResult best;
    best.loglik = -std::numeric_limits<double>::infinity();
    best.grad_norm = std::numeric_limits<double>::infinity();

    for (int gi = 0; gi < 3; ++gi) {
        for (int gj = 0; gj < 3; ++gj) {
            Eigen::VectorXd point = Eigen::Vector2d(-0.6 + 0.6 * gi, -0.6 + 0.6 * gj);
            double gnorm = grad_fn(point).norm();
            // Repeated fixed-horizon runs, each continuing from the best
            // iterate of the previous one, until the gradient is flat.
            for (int round = 0; round < max_rounds && gnorm > grad_tol; ++round) {
                const AigSchedule schedule = build_schedule_convex(400, lipschitz, 1.0);
                const AigRunResult run =
                    aig_run(oracle, point, schedule, OptimizeSense::Maximize);
                if (run.best_grad_norm >= gnorm) break;  // no further progress
                point = run.best_point;
                gnorm = run.best_grad_norm;
            }
            const double ll = kalman_loglik(lg_with_theta(base, point), data).loglik;
            if (ll > best.loglik) {
                best.theta = point;
                best.loglik = ll;
                best.grad_norm = gnorm;
            }
        }
    }
    return best;
}

LinearGaussianModel::LinearGaussianModel(LinearGaussianSpec base)
    : base_(std::move(base)), transform_(ParamTransform::identity(2)) {
    base_.validate();
    noise_factor_ = base_.sigma.transpose();
    obs_cov_inv_ = base_.obs_cov.inverse();
    obs_logdet_ = std::log(base_.obs_cov.determinant());
}

void LinearGaussianModel::simulate_initial(std::span<const double>, RngStream&,
                                           std::span<double> x0) const {
    x0[0] = base_.x0[0];
    x0[1] = base_.x0[1];
}

void LinearGaussianModel::simulate_transition(std::span<const double> theta_nat, double,
                                              double, std::span<const double> x_prev,
                                              RngStream& rng, std::span<double> x_next) const {
    // alpha with the two estimated off-diagonal entries substituted
    const double a11 = base_.alpha(0, 0), a12 = theta_nat[0];
    const double a21 = theta_nat[1], a22 = base_.alpha(1, 1);
    const double z0 = rng.normal(), z1 = rng.normal();
    const double w0 = noise_factor_(0, 0) * z0 + noise_factor_(0, 1) * z1;
    const double w1 = noise_factor_(1, 0) * z0 + noise_factor_(1, 1) * z1;
    x_next[0] = a11 * x_prev[0] + a12 * x_prev[1] + w0;
    x_next[1] = a21 * x_prev[0] + a22 * x_prev[1] + w1;
}

double LinearGaussianModel::measurement_logpdf(std::span<const double> y,
                                               std::span<const double> x,
                                               std::span<const double>, double) const {
    const double d0 = y[0] - x[0], d1 = y[1] - x[1];
    const double quad = d0 * (obs_cov_inv_(0, 0) * d0 + obs_cov_inv_(0, 1) * d1) +
                        d1 * (obs_cov_inv_(1, 0) * d0 + obs_cov_inv_(1, 1) * d1);
    return -kLog2Pi - 0.5 * obs_logdet_ - 0.5 * quad;
}

}  // namespace aif
