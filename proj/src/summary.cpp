#include "aif/summary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "aif/errors.hpp"
#include "aif/io/csv.hpp"
#include "aif/numeric.hpp"

namespace aif {

SummaryResult summarize_experiments(const std::vector<std::string>& csv_paths,
                                    std::optional<double> reference_loglik, double threshold) {
    std::map<std::string, std::vector<double>> by_method;  // finite logliks
    std::map<std::string, int> totals;                     // all rows

    SummaryResult summary;
    for (const auto& path : csv_paths) {
        for (const auto& row : io::read_experiment_csv(path)) {
            ++totals[row.method];
            if (std::isfinite(row.loglik)) {
                by_method[row.method].push_back(row.loglik);
                summary.density.emplace_back(row.method, row.loglik);
            }
        }
    }
    if (totals.empty()) throw IoError("summarize: no rows in any input file");

    for (const auto& [method, total] : totals) {
        MethodSummary ms;
        ms.method = method;
        ms.count = total;
        const auto& lls = by_method[method];
        if (!lls.empty()) {
            ms.loglik_q25 = quantile(lls, 0.25);
            ms.loglik_median = median(lls);
            ms.loglik_q75 = quantile(lls, 0.75);
        } else {
            ms.loglik_q25 = ms.loglik_median = ms.loglik_q75 = std::nan("");
        }
        if (reference_loglik) {
            int hits = 0;
            for (double ll : lls)
                if (ll >= *reference_loglik - threshold) ++hits;
            ms.success_fraction = static_cast<double>(hits) / total;
        } else {
            ms.success_fraction = std::nan("");
        }
        summary.methods.push_back(std::move(ms));
    }
    return summary;
}

void write_summary_csv(const std::string& path, const SummaryResult& summary) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "# schema " << io::kSummarySchema << "\n";
    out << "method,count,loglik_q25,loglik_median,loglik_q75,success_fraction\n";
    for (const auto& ms : summary.methods)
        out << ms.method << "," << ms.count << "," << io::format_double(ms.loglik_q25) << ","
            << io::format_double(ms.loglik_median) << "," << io::format_double(ms.loglik_q75)
            << "," << io::format_double(ms.success_fraction) << "\n";
}

void write_density_csv(const std::string& path, const SummaryResult& summary) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "# schema " << io::kDensitySchema << "\n";
    out << "method,loglik\n";
    for (const auto& [method, loglik] : summary.density)
        out << method << "," << io::format_double(loglik) << "\n";
}

}  // namespace aif
