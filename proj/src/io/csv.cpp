#include "aif/io/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "aif/errors.hpp"

namespace aif::io {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.exceptions(std::ios::failbit | std::ios::badbit);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

// Reads comment lines (verifying the schema tag) and then the header row.
std::vector<std::string> read_header(std::ifstream& in, const std::string& path,
                                     const std::string& schema) {
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("# schema ") == 0) {
                const std::string tag = line.substr(9, line.find(' ', 9) - 9);
                if (tag != schema)
                    throw IoError(path + ": expected schema " + schema + ", found " + tag);
            }
            continue;
        }
        return split_csv_line(line);
    }
    throw IoError(path + ": missing header row");
}

int column_index(const std::vector<std::string>& header, const std::string& name,
                 const std::string& path) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    throw IoError(path + ": missing column '" + name + "'");
}

double parse_double(const std::string& s) {
    if (s.empty() || s == "nan") return std::nan("");
    return std::stod(s);
}

}  // namespace

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void write_dataset_csv(const std::string& path, const TimeSeriesData& data) {
    auto out = open_out(path);
    out << "# schema " << kDatasetSchema << " t0=" << format_double(data.t0) << "\n";
    out << "time";
    for (int j = 0; j < data.obs_dim(); ++j) out << ",y_" << j + 1;
    out << "\n";
    for (int n = 0; n < data.n_obs(); ++n) {
        out << format_double(data.times[n]);
        for (int j = 0; j < data.obs_dim(); ++j)
            out << "," << format_double(data.observations(n, j));
        out << "\n";
    }
}

TimeSeriesData read_dataset_csv(const std::string& path) {
    auto in = open_in(path);
    // recover t0 from the schema comment
    double t0 = 0.0;
    {
        std::ifstream peek = open_in(path);
        std::string line;
        while (std::getline(peek, line)) {
            const auto pos = line.find("t0=");
            if (line.rfind("# schema ", 0) == 0 && pos != std::string::npos) {
                t0 = parse_double(line.substr(pos + 3));
                break;
            }
            if (!line.empty() && line[0] != '#') break;
        }
    }
    const auto header = read_header(in, path, kDatasetSchema);
    column_index(header, "time", path);
    const int d_y = static_cast<int>(header.size()) - 1;
    if (d_y < 1) throw IoError(path + ": no observation columns");

    std::vector<double> times;
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != d_y + 1)
            throw IoError(path + ": ragged row with " + std::to_string(fields.size()) +
                          " fields");
        times.push_back(parse_double(fields[0]));
        for (int j = 1; j <= d_y; ++j) values.push_back(parse_double(fields[j]));
    }
    TimeSeriesData data;
    data.t0 = t0;
    data.times = std::move(times);
    data.observations.resize(static_cast<int>(data.times.size()), d_y);
    for (int n = 0; n < data.n_obs(); ++n)
        for (int j = 0; j < d_y; ++j)
            data.observations(n, j) = values[static_cast<std::size_t>(n) * d_y + j];
    data.validate();
    return data;
}

void write_covariates_csv(const std::string& path, const CovariateTable& table) {
    auto out = open_out(path);
    out << "# schema " << kCovariateSchema << "\n";
    out << "time";
    for (int j = 0; j < table.dim(); ++j) out << ",c_" << j + 1;
    out << "\n";
    for (std::size_t n = 0; n < table.times.size(); ++n) {
        out << format_double(table.times[n]);
        for (int j = 0; j < table.dim(); ++j)
            out << "," << format_double(table.values(static_cast<int>(n), j));
        out << "\n";
    }
}

CovariateTable read_covariates_csv(const std::string& path) {
    auto in = open_in(path);
    const auto header = read_header(in, path, kCovariateSchema);
    column_index(header, "time", path);
    const int dim = static_cast<int>(header.size()) - 1;
    if (dim < 1) throw IoError(path + ": no covariate columns");
    CovariateTable table;
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != dim + 1)
            throw IoError(path + ": ragged covariate row");
        table.times.push_back(parse_double(fields[0]));
        for (int j = 1; j <= dim; ++j) values.push_back(parse_double(fields[j]));
    }
    table.values.resize(static_cast<int>(table.times.size()), dim);
    for (int n = 0; n < table.values.rows(); ++n)
        for (int j = 0; j < dim; ++j)
            table.values(n, j) = values[static_cast<std::size_t>(n) * dim + j];
    table.validate();
    return table;
}

void write_filter_csv(const std::string& path, const FilterOutput& out_data,
                      const std::vector<std::string>& param_names) {
    auto out = open_out(path);
    out << "# schema " << kFilterSchema << " loglik=" << format_double(out_data.loglik) << "\n";
    out << "n,ess";
    if (out_data.has_param_means())
        for (const auto& name : param_names) out << ",theta_bar_" << name;
    out << "\n";
    for (std::size_t n = 0; n < out_data.ess_trace.size(); ++n) {
        out << n + 1 << "," << format_double(out_data.ess_trace[n]);
        if (out_data.has_param_means())
            for (int i = 0; i < out_data.param_filter_means.cols(); ++i)
                out << "," << format_double(out_data.param_filter_means(static_cast<int>(n), i));
        out << "\n";
    }
}

void write_kalman_csv(const std::string& path, const KalmanResult& result) {
    auto out = open_out(path);
    out << "# schema " << kKalmanSchema << " loglik=" << format_double(result.loglik) << "\n";
    out << "n,pred_mean_1,pred_mean_2,filt_mean_1,filt_mean_2\n";
    for (std::size_t n = 0; n < result.filt_means.size(); ++n)
        out << n + 1 << "," << format_double(result.pred_means[n][0]) << ","
            << format_double(result.pred_means[n][1]) << ","
            << format_double(result.filt_means[n][0]) << ","
            << format_double(result.filt_means[n][1]) << "\n";
}

void write_aig_trace_csv(const std::string& path, const AigRunResult& result,
                         const std::vector<std::string>& param_names) {
    auto out = open_out(path);
    out << "# schema " << kAigTraceSchema << "\n";
    out << "k";
    for (const auto& n : param_names) out << ",theta_" << n;
    for (const auto& n : param_names) out << ",theta_ag_" << n;
    out << ",grad_norm,objective\n";
    for (const auto& rec : result.trace) {
        out << rec.step;
        for (int i = 0; i < rec.theta.size(); ++i) out << "," << format_double(rec.theta[i]);
        for (int i = 0; i < rec.theta_ag.size(); ++i)
            out << "," << format_double(rec.theta_ag[i]);
        out << "," << format_double(rec.grad_norm) << ","
            << (rec.objective ? format_double(*rec.objective) : "") << "\n";
    }
}

void write_estimation_trace_csv(const std::string& path, const EstimationTrace& trace,
                                const std::vector<std::string>& param_names) {
    auto out = open_out(path);
    out << "# schema " << kEstimationTraceSchema << " method=" << trace.method << "\n";
    out << "m";
    for (const auto& n : param_names) out << ",theta_" << n;
    for (const auto& n : param_names) out << ",theta_ag_" << n;
    for (const auto& n : param_names) out << ",theta_md_" << n;
    for (const auto& n : param_names) out << ",score_" << n;
    out << ",loglik,wall_seconds\n";
    for (const auto& s : trace.steps) {
        out << s.iteration;
        for (int i = 0; i < s.theta.size(); ++i) out << "," << format_double(s.theta[i]);
        for (int i = 0; i < s.theta_ag.size(); ++i) out << "," << format_double(s.theta_ag[i]);
        for (int i = 0; i < s.theta_md.size(); ++i) out << "," << format_double(s.theta_md[i]);
        for (int i = 0; i < s.score.size(); ++i) out << "," << format_double(s.score[i]);
        out << "," << format_double(s.loglik) << "," << format_double(s.wall_seconds) << "\n";
    }
}

void write_experiment_csv(const std::string& path, const ExperimentResult& result,
                          const std::vector<std::string>& param_names) {
    auto out = open_out(path);
    out << "# schema " << kExperimentSchema << "\n";
    out << "method,rep,seed";
    for (const auto& n : param_names) out << ",start_" << n;
    for (const auto& n : param_names) out << ",final_" << n;
    out << ",loglik,wall_seconds\n";
    for (const auto& row : result.rows) {
        out << row.method << "," << row.replication << "," << row.seed;
        for (int i = 0; i < row.start.size(); ++i) out << "," << format_double(row.start[i]);
        for (int i = 0; i < row.final.size(); ++i) out << "," << format_double(row.final[i]);
        out << "," << format_double(row.loglik) << "," << format_double(row.wall_seconds)
            << "\n";
        if (!row.ok) out << "# failed rep=" << row.replication << ": " << row.message << "\n";
    }
}

std::vector<ExperimentRowView> read_experiment_csv(const std::string& path) {
    auto in = open_in(path);
    const auto header = read_header(in, path, kExperimentSchema);
    const int method_col = column_index(header, "method", path);
    const int loglik_col = column_index(header, "loglik", path);

    std::vector<ExperimentRowView> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != static_cast<int>(header.size()))
            throw IoError(path + ": ragged row");
        rows.push_back({fields[method_col], parse_double(fields[loglik_col])});
    }
    return rows;
}

}  // namespace aif::io
