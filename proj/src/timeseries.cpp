#include "aif/timeseries.hpp"

#include <algorithm>
#include <cmath>

#include "aif/errors.hpp"

namespace aif {

double CovariateTable::at(double t, int col) const {
    // last row with time <= t
    auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::ptrdiff_t row = std::max<std::ptrdiff_t>(0, (it - times.begin()) - 1);
    return values(row, col);
}

void CovariateTable::validate() const {
    if (times.empty()) throw DimensionError("CovariateTable: empty");
    if (static_cast<int>(times.size()) != values.rows())
        throw DimensionError("CovariateTable: times/values row mismatch");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw DomainError("CovariateTable: times must be strictly increasing");
}

void TimeSeriesData::validate() const {
    const int n = n_obs();
    if (n < 1) throw DimensionError("TimeSeriesData: no observations");
    if (observations.rows() != n)
        throw DimensionError("TimeSeriesData: times/observations row mismatch");
    double prev = t0;
    for (int i = 0; i < n; ++i) {
        if (!(times[i] > prev))
            throw DomainError("TimeSeriesData: times must be strictly increasing from t0");
        prev = times[i];
    }
    for (int i = 0; i < observations.rows(); ++i)
        for (int j = 0; j < observations.cols(); ++j)
            if (std::isnan(observations(i, j)))
                throw DomainError("TimeSeriesData: missing observation at row " +
                                  std::to_string(i));
    if (covariates) covariates->validate();
}

}  // namespace aif
