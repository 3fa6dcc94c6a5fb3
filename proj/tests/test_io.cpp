#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"

#include "aif/errors.hpp"
#include "aif/io/csv.hpp"
#include "aif/models/linear_gaussian.hpp"
#include "aif/numeric.hpp"
#include "aif/summary.hpp"

using namespace aif;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("aif_io_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

ExperimentResult sample_experiment() {
    ExperimentResult result;
    for (int r = 0; r < 4; ++r) {
        ReplicationRow row;
        row.method = r % 2 == 0 ? "aif" : "if1";
        row.replication = r;
        row.seed = 100 + r;
        row.start = Eigen::Vector2d(0.1 * r, -0.1 * r);
        row.final = Eigen::Vector2d(-0.5, 0.3);
        row.loglik = -450.0 - r;
        row.wall_seconds = 0.5;
        row.ok = true;
        result.rows.push_back(row);
    }
    return result;
}

}  // namespace

TEST_CASE("dataset round trip") {
    TempDir dir;
    const auto spec = LinearGaussianSpec::benchmark();
    const auto data = lg_simulate(spec, 25, 5);
    const auto path = dir.file("data.csv");
    io::write_dataset_csv(path, data);
    const auto back = io::read_dataset_csv(path);
    REQUIRE(back.n_obs() == data.n_obs());
    CHECK(back.t0 == data.t0);
    for (int n = 0; n < data.n_obs(); ++n) {
        CHECK(back.times[n] == data.times[n]);
        for (int j = 0; j < 2; ++j) CHECK(back.observations(n, j) == data.observations(n, j));
    }
}

TEST_CASE("dataset writer is deterministic") {
    TempDir dir;
    const auto data = lg_simulate(LinearGaussianSpec::benchmark(), 10, 6);
    io::write_dataset_csv(dir.file("a.csv"), data);
    io::write_dataset_csv(dir.file("b.csv"), data);
    CHECK(fnv1a_file(dir.file("a.csv")) == fnv1a_file(dir.file("b.csv")));
}

TEST_CASE("covariate round trip and lookup") {
    TempDir dir;
    CovariateTable table;
    table.times = {0.0, 1.0, 2.0};
    table.values.resize(3, 1);
    table.values << 10.0, 20.0, 30.0;
    const auto path = dir.file("rain.csv");
    io::write_covariates_csv(path, table);
    const auto back = io::read_covariates_csv(path);
    CHECK(back.at(-5.0, 0) == 10.0);   // before the series: first row
    CHECK(back.at(0.5, 0) == 10.0);    // piecewise constant
    CHECK(back.at(1.0, 0) == 20.0);
    CHECK(back.at(99.0, 0) == 30.0);
}

TEST_CASE("filter output CSV carries the schema line and loglik") {
    TempDir dir;
    FilterOutput out;
    out.loglik = -123.5;
    out.ess_trace = {10.0, 9.5};
    out.param_filter_means = Eigen::MatrixXd::Constant(2, 2, 0.25);
    const auto path = dir.file("filter.csv");
    io::write_filter_csv(path, out, {"alpha2", "alpha3"});

    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first.find("# schema aif.filter.v1") == 0);
    CHECK(first.find("loglik=-123.5") != std::string::npos);
    std::string header;
    std::getline(in, header);
    CHECK(header == "n,ess,theta_bar_alpha2,theta_bar_alpha3");
}

TEST_CASE("experiment CSV round trip into summaries") {
    TempDir dir;
    const auto result = sample_experiment();
    const auto path = dir.file("exp.csv");
    io::write_experiment_csv(path, result, {"alpha2", "alpha3"});
    const auto rows = io::read_experiment_csv(path);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].method == "aif");
    CHECK(rows[0].loglik == -450.0);

    const auto summary = summarize_experiments({path}, -450.0, 2.0);
    REQUIRE(summary.methods.size() == 2);  // sorted: aif, if1
    CHECK(summary.methods[0].method == "aif");
    CHECK(summary.methods[0].count == 2);
    CHECK(summary.methods[0].loglik_median == -451.0);
    CHECK(summary.methods[0].success_fraction == 1.0);
    CHECK(summary.methods[1].method == "if1");
    CHECK(summary.methods[1].success_fraction == 0.5);  // -453 misses the -452 cut
    CHECK(summary.density.size() == 4);
}

TEST_CASE("identical result files summarize identically") {
    TempDir dir;
    const auto result = sample_experiment();
    io::write_experiment_csv(dir.file("a.csv"), result, {"p1", "p2"});
    io::write_experiment_csv(dir.file("b.csv"), result, {"p1", "p2"});
    const auto sa = summarize_experiments({dir.file("a.csv")}, std::nullopt, 3.0);
    const auto sb = summarize_experiments({dir.file("b.csv")}, std::nullopt, 3.0);
    REQUIRE(sa.methods.size() == sb.methods.size());
    for (std::size_t i = 0; i < sa.methods.size(); ++i) {
        CHECK(sa.methods[i].loglik_median == sb.methods[i].loglik_median);
        CHECK(sa.methods[i].loglik_q25 == sb.methods[i].loglik_q25);
    }
}

TEST_CASE("schema and column mismatches are reported by name") {
    TempDir dir;
    const auto path = dir.file("bad.csv");
    {
        std::ofstream out(path);
        out << "# schema aif.experiment.v1\n";
        out << "method,rep\naif,0\n";
    }
    try {
        io::read_experiment_csv(path);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        const std::string what = e.what();
        CHECK(what.find(path) != std::string::npos);
        CHECK(what.find("loglik") != std::string::npos);
    }

    const auto wrong_schema = dir.file("wrong.csv");
    {
        std::ofstream out(wrong_schema);
        out << "# schema aif.dataset.v1\nmethod,loglik\n";
    }
    CHECK_THROWS_AS(io::read_experiment_csv(wrong_schema), IoError);
}

TEST_CASE("failed rows round trip as NaN logliks") {
    TempDir dir;
    ExperimentResult result;
    ReplicationRow row;
    row.method = "aif";
    row.replication = 0;
    row.seed = 1;
    row.start = Eigen::Vector2d(0, 0);
    row.final = Eigen::Vector2d(std::nan(""), std::nan(""));
    row.loglik = std::nan("");
    row.ok = false;
    row.message = "degeneracy";
    result.rows.push_back(row);
    const auto path = dir.file("failed.csv");
    io::write_experiment_csv(path, result, {"p1", "p2"});
    const auto rows = io::read_experiment_csv(path);
    REQUIRE(rows.size() == 1);
    CHECK(std::isnan(rows[0].loglik));
}
