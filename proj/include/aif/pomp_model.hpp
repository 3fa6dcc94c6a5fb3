#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "aif/params.hpp"
#include "aif/rng.hpp"
#include "aif/timeseries.hpp"

namespace aif {

// Partially observed Markov process model: an initial-state simulator, a
// transition simulator and a measurement log-density, plus the parameter
// conventions (names, transform, IVP labels).
//
// All callbacks receive parameters on the NATURAL scale and must be pure
// functions of their inputs and the rng stream state: bit-reproducible given
// a seed, safe for concurrent invocation, never returning NaN from
// measurement_logpdf (finite or -inf).
class PompModel {
public:
    virtual ~PompModel() = default;

    virtual int param_dim() const = 0;
    virtual int state_dim() const = 0;
    virtual int obs_dim() const = 0;

    virtual const ParamTransform& param_transform() const = 0;
    virtual std::vector<std::string> param_names() const;
    // IVPs affect only the initial state; perturbed only at time zero.
    virtual std::vector<bool> ivp_mask() const;

    virtual void simulate_initial(std::span<const double> theta_nat, RngStream& rng,
                                  std::span<double> x0) const = 0;

    virtual void simulate_transition(std::span<const double> theta_nat, double t_prev,
                                     double t_next, std::span<const double> x_prev,
                                     RngStream& rng, std::span<double> x_next) const = 0;

    virtual double measurement_logpdf(std::span<const double> y, std::span<const double> x,
                                      std::span<const double> theta_nat, double t) const = 0;
};

struct ValidationReport {
    bool ok = false;
    int evaluations = 0;
    std::vector<std::string> issues;

    std::string to_string() const;
};

// Simulates one trajectory at theta (natural scale) and evaluates the
// measurement log-density against every observation, reporting any non-finite
// value with its time index. Identical seed gives a byte-identical report.
ValidationReport validate_model(const PompModel& model, const ParameterVector& theta_nat,
                                const TimeSeriesData& data, std::uint64_t seed);

}  // namespace aif
