#include <cmath>
#include <limits>

#include "doctest.h"

#include "aif/errors.hpp"
#include "aif/models/linear_gaussian.hpp"
#include "aif/params.hpp"
#include "aif/pomp_model.hpp"
#include "aif/rng.hpp"

using namespace aif;

TEST_CASE("identity transform leaves values alone") {
    const auto t = ParamTransform::identity(2);
    const auto theta = ParameterVector::plain(Eigen::Vector2d(0.8, -0.5));
    const auto est = transform_params(theta, t);
    CHECK(est.values[0] == 0.8);
    CHECK(est.values[1] == -0.5);
}

TEST_CASE("log transform of 1 is 0") {
    const ParamTransform t({CoordTransform::log()});
    Eigen::VectorXd v(1);
    v << 1.0;
    CHECK(transform_params(ParameterVector::plain(v), t).values[0] == 0.0);
}

TEST_CASE("logit transform at the midpoint is 0") {
    const ParamTransform t({CoordTransform::logit(0.0, 1.0)});
    Eigen::VectorXd v(1);
    v << 0.5;
    CHECK(transform_params(ParameterVector::plain(v), t).values[0] == 0.0);
}

TEST_CASE("transform round trip over random in-domain points") {
    RngStream rng(99, 0);
    const CoordTransform transforms[] = {CoordTransform::identity(), CoordTransform::log(),
                                         CoordTransform::logit(-2.0, 5.0)};
    for (const auto& ct : transforms) {
        for (int i = 0; i < 1000; ++i) {
            double x = 0.0;
            switch (ct.kind) {
                case TransformKind::Identity: x = rng.uniform(-50.0, 50.0); break;
                case TransformKind::Log: x = std::exp(rng.uniform(-8.0, 8.0)); break;
                case TransformKind::Logit:
                    x = rng.uniform(ct.lower + 1e-6, ct.upper - 1e-6);
                    break;
            }
            const double back = ct.inverse(ct.forward(x));
            CHECK(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        }
    }
}

TEST_CASE("domain violations name the coordinate") {
    const ParamTransform t({CoordTransform::identity(), CoordTransform::log()});
    auto theta = ParameterVector::make(Eigen::Vector2d(1.0, -0.5), {"alpha", "rate"},
                                       {false, false});
    try {
        transform_params(theta, t);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("rate") != std::string::npos);
    }
}

TEST_CASE("parameter vector invariants") {
    CHECK_THROWS_AS(ParameterVector::make(Eigen::VectorXd(), {}, {}), DimensionError);
    Eigen::VectorXd bad(1);
    bad << std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(ParameterVector::make(bad, {"x"}, {false}), DomainError);
    CHECK_THROWS_AS(
        ParameterVector::make(Eigen::Vector2d(1, 2), {"x"}, {false, false}), DimensionError);
}

namespace {

// Model whose measurement density is NaN everywhere; exercises validation.
class NanMeasurementModel : public PompModel {
public:
    int param_dim() const override { return 1; }
    int state_dim() const override { return 1; }
    int obs_dim() const override { return 1; }
    const ParamTransform& param_transform() const override { return transform_; }
    void simulate_initial(std::span<const double>, RngStream&,
                          std::span<double> x0) const override {
        x0[0] = 0.0;
    }
    void simulate_transition(std::span<const double>, double, double,
                             std::span<const double> x_prev, RngStream&,
                             std::span<double> x_next) const override {
        x_next[0] = x_prev[0];
    }
    double measurement_logpdf(std::span<const double>, std::span<const double>,
                              std::span<const double>, double) const override {
        return std::numeric_limits<double>::quiet_NaN();
    }

private:
    ParamTransform transform_ = ParamTransform::identity(1);
};

}  // namespace

TEST_CASE("validate_model passes the benchmark model at true parameters") {
    const auto spec = LinearGaussianSpec::benchmark();
    const LinearGaussianModel model(spec);
    const auto data = lg_simulate(spec, 100, 1);
    const auto theta = ParameterVector::make(Eigen::Vector2d(-0.5, 0.3), {"alpha2", "alpha3"},
                                             {false, false});
    const auto report = validate_model(model, theta, data, 1);
    CHECK(report.ok);
    CHECK(report.evaluations == 100);
    CHECK(report.to_string().substr(0, 2) == "ok");
}

TEST_CASE("validate_model reports a NaN measurement density at n=1") {
    NanMeasurementModel model;
    TimeSeriesData data;
    data.times = {1.0, 2.0};
    data.observations = Eigen::MatrixXd::Zero(2, 1);
    Eigen::VectorXd v(1);
    v << 0.0;
    const auto report =
        validate_model(model, ParameterVector::plain(v), data, 3);
    CHECK_FALSE(report.ok);
    REQUIRE(report.issues.size() == 1);
    CHECK(report.issues[0].find("n=1") != std::string::npos);
}

TEST_CASE("validation reports are byte-identical under one seed") {
    const auto spec = LinearGaussianSpec::benchmark();
    const LinearGaussianModel model(spec);
    const auto data = lg_simulate(spec, 50, 2);
    const auto theta = ParameterVector::make(Eigen::Vector2d(-0.5, 0.3), {"alpha2", "alpha3"},
                                             {false, false});
    const auto a = validate_model(model, theta, data, 7);
    const auto b = validate_model(model, theta, data, 7);
    CHECK(a.to_string() == b.to_string());
}
