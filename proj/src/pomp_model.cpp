#include "aif/pomp_model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "aif/errors.hpp"

namespace aif {

std::vector<std::string> PompModel::param_names() const {
    std::vector<std::string> names(param_dim());
    for (int i = 0; i < param_dim(); ++i) names[i] = "p" + std::to_string(i + 1);
    return names;
}

std::vector<bool> PompModel::ivp_mask() const { return std::vector<bool>(param_dim(), false); }

std::string ValidationReport::to_string() const {
    std::ostringstream out;
    out << (ok ? "ok" : "failed") << ", " << evaluations << " evaluations";
    for (const auto& issue : issues) out << "\n  " << issue;
    return out.str();
}

ValidationReport validate_model(const PompModel& model, const ParameterVector& theta_nat,
                                const TimeSeriesData& data, std::uint64_t seed) {
    theta_nat.validate();
    data.validate();
    if (theta_nat.dim() != model.param_dim())
        throw DimensionError("validate_model: parameter dimension mismatch");
    if (data.obs_dim() != model.obs_dim())
        throw DimensionError("validate_model: observation dimension mismatch");

    ValidationReport report;
    const int d_x = model.state_dim();
    std::vector<double> x(d_x), x_next(d_x);
    std::span<const double> theta{theta_nat.values.data(),
                                  static_cast<std::size_t>(theta_nat.dim())};

    const std::uint64_t run_seed = derive_seed(seed, SeedTag::Validate, 0);
    RngStream init_rng(run_seed, stream_id::make(stream_id::InitState, 0, 0));
    model.simulate_initial(theta, init_rng, x);
    for (int i = 0; i < d_x; ++i)
        if (!std::isfinite(x[i]))
            report.issues.push_back("non-finite initial state component " + std::to_string(i));

    double t_prev = data.t0;
    for (int n = 1; n <= data.n_obs(); ++n) {
        const double t = data.times[n - 1];
        RngStream rng(run_seed, stream_id::make(stream_id::Propagate, n, 0));
        model.simulate_transition(theta, t_prev, t, x, rng, x_next);
        std::swap(x, x_next);
        for (int i = 0; i < d_x; ++i)
            if (!std::isfinite(x[i])) {
                report.issues.push_back("non-finite state component " + std::to_string(i) +
                                        " at n=" + std::to_string(n));
                report.evaluations = n - 1;
                return report;
            }

        const Eigen::VectorXd y_row = data.observations.row(n - 1);
        const double lp = model.measurement_logpdf(
            {y_row.data(), static_cast<std::size_t>(y_row.size())}, x, theta, t);
        ++report.evaluations;
        if (std::isnan(lp)) {
            report.issues.push_back("measurement logpdf is NaN at n=" + std::to_string(n));
            return report;
        }
        if (lp == -std::numeric_limits<double>::infinity())
            report.issues.push_back("measurement logpdf is -inf at n=" + std::to_string(n));
        t_prev = t;
    }
    report.ok = report.issues.empty();
    return report;
}

}  // namespace aif
