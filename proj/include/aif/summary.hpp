#pragma once

#include <optional>
#include <string>
#include <vector>

namespace aif {

struct MethodSummary {
    std::string method;
    int count = 0;
    double loglik_q25 = 0.0;
    double loglik_median = 0.0;
    double loglik_q75 = 0.0;
    // fraction of runs within `threshold` log units of the reference maximum;
    // NaN without a reference
    double success_fraction = 0.0;
};

struct SummaryResult {
    std::vector<MethodSummary> methods;                     // sorted by method tag
    std::vector<std::pair<std::string, double>> density;    // (method, loglik) pairs
};

// Joins experiment result CSVs into per-method loglik quantiles and the
// density-plot-ready (method, loglik) list. Failed rows (NaN loglik) are
// dropped from quantiles but counted against the success fraction.
SummaryResult summarize_experiments(const std::vector<std::string>& csv_paths,
                                    std::optional<double> reference_loglik, double threshold);

void write_summary_csv(const std::string& path, const SummaryResult& summary);
void write_density_csv(const std::string& path, const SummaryResult& summary);

}  // namespace aif
