#pragma once

#include <string>
#include <vector>

#include "aif/aig.hpp"
#include "aif/estimators.hpp"
#include "aif/models/linear_gaussian.hpp"
#include "aif/smc.hpp"
#include "aif/timeseries.hpp"

namespace aif::io {

// Every CSV starts with a '# schema <tag>' comment line; readers check it.
inline constexpr const char* kDatasetSchema = "aif.dataset.v1";
inline constexpr const char* kCovariateSchema = "aif.covariates.v1";
inline constexpr const char* kFilterSchema = "aif.filter.v1";
inline constexpr const char* kKalmanSchema = "aif.kalman.v1";
inline constexpr const char* kAigTraceSchema = "aif.aig-trace.v1";
inline constexpr const char* kEstimationTraceSchema = "aif.estimation-trace.v1";
inline constexpr const char* kExperimentSchema = "aif.experiment.v1";
inline constexpr const char* kBenchmarkSchema = "aif.benchmark.v1";
inline constexpr const char* kSummarySchema = "aif.summary.v1";
inline constexpr const char* kDensitySchema = "aif.density.v1";

// Shortest round-trip-exact decimal representation.
std::string format_double(double value);

void write_dataset_csv(const std::string& path, const TimeSeriesData& data);
TimeSeriesData read_dataset_csv(const std::string& path);

void write_covariates_csv(const std::string& path, const CovariateTable& table);
CovariateTable read_covariates_csv(const std::string& path);

// Columns (n, ess, theta_bar_1..p); the header comment carries the loglik.
void write_filter_csv(const std::string& path, const FilterOutput& out,
                      const std::vector<std::string>& param_names);

void write_kalman_csv(const std::string& path, const KalmanResult& result);

// Columns (k, theta_1..p, theta_ag_1..p, grad_norm, objective_if_available).
void write_aig_trace_csv(const std::string& path, const AigRunResult& result,
                         const std::vector<std::string>& param_names);

void write_estimation_trace_csv(const std::string& path, const EstimationTrace& trace,
                                const std::vector<std::string>& param_names);

// Columns (method, rep, seed, start_1..p, final_1..p, loglik, wall_seconds).
void write_experiment_csv(const std::string& path, const ExperimentResult& result,
                          const std::vector<std::string>& param_names);

struct ExperimentRowView {
    std::string method;
    double loglik = 0.0;
};
// Reads back the columns summarization needs; errors name the file and the
// missing column.
std::vector<ExperimentRowView> read_experiment_csv(const std::string& path);

}  // namespace aif::io
