#pragma once

// Shared test-only oracles, kept independent of the library code paths they
// check.

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "aif/models/linear_gaussian.hpp"

namespace aif_test {

// Exact joint density of the stacked observations as one 2N-dimensional
// Gaussian; brute-force alternative to the filtering recursion (N small).
inline double joint_gaussian_loglik(const aif::LinearGaussianSpec& spec,
                                    const aif::TimeSeriesData& data) {
    const int n = data.n_obs();
    const Eigen::Matrix2d q = spec.sigma.transpose() * spec.sigma;

    std::vector<Eigen::Vector2d> means(n);
    std::vector<Eigen::Matrix2d> state_covs(n);
    Eigen::Vector2d m = spec.x0;
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (int k = 0; k < n; ++k) {
        m = spec.alpha * m;
        cov = spec.alpha * cov * spec.alpha.transpose() + q;
        means[k] = m;
        state_covs[k] = cov;
    }

    Eigen::VectorXd mu(2 * n);
    Eigen::MatrixXd big = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int r = 0; r < n; ++r) {
        mu.segment<2>(2 * r) = means[r];
        for (int c = r; c < n; ++c) {
            Eigen::Matrix2d prop = Eigen::Matrix2d::Identity();
            for (int k = 0; k < c - r; ++k) prop = spec.alpha * prop;
            Eigen::Matrix2d block = state_covs[r] * prop.transpose();
            if (r == c) block += spec.obs_cov;
            big.block<2, 2>(2 * r, 2 * c) = block;
            if (r != c) big.block<2, 2>(2 * c, 2 * r) = block.transpose();
        }
    }

    Eigen::VectorXd y(2 * n);
    for (int r = 0; r < n; ++r) y.segment<2>(2 * r) = data.observations.row(r);

    const Eigen::LLT<Eigen::MatrixXd> llt(big);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("joint_gaussian_loglik: covariance not PD");
    const Eigen::VectorXd d = y - mu;
    double logdet = 0.0;
    for (int i = 0; i < 2 * n; ++i) logdet += 2.0 * std::log(llt.matrixL()(i, i));
    return -0.5 * (2 * n) * std::log(2.0 * M_PI) - 0.5 * logdet - 0.5 * d.dot(llt.solve(d));
}

}  // namespace aif_test
