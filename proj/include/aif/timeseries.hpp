#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace aif {

// Time-indexed covariates with piecewise-constant lookup (the row with the
// largest time <= t; the first row before the series starts).
struct CovariateTable {
    std::vector<double> times;
    Eigen::MatrixXd values;  // rows align with times

    int dim() const { return static_cast<int>(values.cols()); }
    double at(double t, int col) const;

    void validate() const;
};

struct TimeSeriesData {
    double t0 = 0.0;                // initial time, before the first observation
    std::vector<double> times;      // strictly increasing, length N
    Eigen::MatrixXd observations;   // N x d_y
    std::optional<CovariateTable> covariates;

    int n_obs() const { return static_cast<int>(times.size()); }
    int obs_dim() const { return static_cast<int>(observations.cols()); }

    void validate() const;
};

}  // namespace aif
