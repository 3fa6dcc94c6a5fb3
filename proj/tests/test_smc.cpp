#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "aif/errors.hpp"
#include "aif/models/linear_gaussian.hpp"
#include "aif/numeric.hpp"
#include "aif/smc.hpp"

using namespace aif;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

// X_1 = alpha x_0 with no process noise; Y ~ N(x, 1). All particles identical.
class DeterministicScalarModel : public PompModel {
public:
    DeterministicScalarModel(double x0, double alpha) : x0_(x0), alpha_(alpha) {}
    int param_dim() const override { return 1; }
    int state_dim() const override { return 1; }
    int obs_dim() const override { return 1; }
    const ParamTransform& param_transform() const override { return transform_; }
    void simulate_initial(std::span<const double>, RngStream&, std::span<double> x) const override {
        x[0] = x0_;
    }
    void simulate_transition(std::span<const double>, double, double,
                             std::span<const double> x_prev, RngStream&,
                             std::span<double> x_next) const override {
        x_next[0] = alpha_ * x_prev[0];
    }
    double measurement_logpdf(std::span<const double> y, std::span<const double> x,
                              std::span<const double>, double) const override {
        const double d = y[0] - x[0];
        return -0.5 * kLog2Pi - 0.5 * d * d;
    }

private:
    double x0_, alpha_;
    ParamTransform transform_ = ParamTransform::identity(1);
};

// x_0 = 0 fixed; X_1 ~ N(0, sd^2); Y ~ N(x, 1). Marginally Y_1 ~ N(0, sd^2+1).
class NoisyScalarModel : public PompModel {
public:
    explicit NoisyScalarModel(double sd) : sd_(sd) {}
    int param_dim() const override { return 1; }
    int state_dim() const override { return 1; }
    int obs_dim() const override { return 1; }
    const ParamTransform& param_transform() const override { return transform_; }
    void simulate_initial(std::span<const double>, RngStream&, std::span<double> x) const override {
        x[0] = 0.0;
    }
    void simulate_transition(std::span<const double>, double, double, std::span<const double>,
                             RngStream& rng, std::span<double> x_next) const override {
        x_next[0] = sd_ * rng.normal();
    }
    double measurement_logpdf(std::span<const double> y, std::span<const double> x,
                              std::span<const double>, double) const override {
        const double d = y[0] - x[0];
        return -0.5 * kLog2Pi - 0.5 * d * d;
    }

private:
    double sd_;
    ParamTransform transform_ = ParamTransform::identity(1);
};

// Flat measurement density: every particle weight equal, so systematic
// resampling is the identity permutation and parameter trajectories are
// directly observable through the final swarm.
class FlatModel : public PompModel {
public:
    int param_dim() const override { return 2; }
    int state_dim() const override { return 1; }
    int obs_dim() const override { return 1; }
    const ParamTransform& param_transform() const override { return transform_; }
    std::vector<bool> ivp_mask() const override { return {false, true}; }
    void simulate_initial(std::span<const double>, RngStream&, std::span<double> x) const override {
        x[0] = 0.0;
    }
    void simulate_transition(std::span<const double>, double, double, std::span<const double>,
                             RngStream&, std::span<double> x_next) const override {
        x_next[0] = 0.0;
    }
    double measurement_logpdf(std::span<const double>, std::span<const double>,
                              std::span<const double>, double) const override {
        return 0.0;
    }

private:
    ParamTransform transform_ = ParamTransform::identity(2);
};

class AllInfModel : public DeterministicScalarModel {
public:
    AllInfModel() : DeterministicScalarModel(0.0, 1.0) {}
    double measurement_logpdf(std::span<const double>, std::span<const double>,
                              std::span<const double>, double) const override {
        return -kInf;
    }
};

TimeSeriesData single_obs(double y) {
    TimeSeriesData data;
    data.times = {1.0};
    data.observations.resize(1, 1);
    data.observations(0, 0) = y;
    return data;
}

PerturbSpec flat_spec(double sigma0, double sigma1, double c = 0.95) {
    PerturbSpec spec;
    spec.sigmas = Eigen::Vector2d(sigma0, sigma1);
    spec.cooling_c = c;
    spec.init_multiplier = 1.0;
    spec.ivp_mask = {false, true};
    return spec;
}

}  // namespace

TEST_CASE("normalize_logweights: equal weights") {
    std::vector<double> lw(4, 0.0), w(4);
    const double lmw = normalize_logweights(lw, w);
    for (double x : w) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lmw == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("normalize_logweights: shift property") {
    for (double c : {-7.5, 0.3, 42.0}) {
        std::vector<double> lw(4, c), w(4);
        const double lmw = normalize_logweights(lw, w);
        for (double x : w) CHECK(x == doctest::Approx(0.25).epsilon(1e-15));
        CHECK(lmw == doctest::Approx(c).epsilon(1e-14));
    }
}

TEST_CASE("normalize_logweights: hand-computed two-particle case") {
    std::vector<double> lw{std::log(3.0), std::log(1.0)}, w(2);
    const double lmw = normalize_logweights(lw, w);
    CHECK(w[0] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(w[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(lmw == doctest::Approx(std::log(2.0)).epsilon(1e-15));  // (3+1)/2
}

TEST_CASE("normalize_logweights: total degeneracy raises with the time index") {
    std::vector<double> lw(3, -kInf), w(3);
    try {
        normalize_logweights(lw, w, 17);
        FAIL("expected DegeneracyError");
    } catch (const DegeneracyError& e) {
        CHECK(e.time_index == 17);
    }
}

TEST_CASE("systematic_resample: equal weights give one offspring each") {
    std::vector<double> w(4, 0.25);
    std::vector<int> idx(4);
    systematic_resample_with_u(w, 0.2, idx);  // any u < 0.25 once scaled
    CHECK(idx == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("systematic_resample: degenerate weight vector") {
    std::vector<double> w{1.0, 0.0, 0.0};
    std::vector<int> idx(3);
    for (double u : {0.0, 0.31, 0.99}) {
        systematic_resample_with_u(w, u, idx);
        CHECK(idx == std::vector<int>{0, 0, 0});
    }
}

TEST_CASE("systematic_resample: worked example at u = 0.5") {
    // cumulative (0.5, 0.8, 1.0); points (0.1, 0.3, 0.5, 0.7, 0.9)
    std::vector<double> w{0.5, 0.3, 0.2};
    std::vector<int> idx(5);
    CHECK_THROWS_AS(systematic_resample_with_u(w, 0.5, idx), DimensionError);
    std::vector<double> w5{0.5, 0.3, 0.2, 0.0, 0.0};
    systematic_resample_with_u(w5, 0.5, idx);
    CHECK(idx == std::vector<int>{0, 0, 0, 1, 2});
}

TEST_CASE("systematic_resample rejects negative weights") {
    std::vector<double> w{1.2, -0.2};
    std::vector<int> idx(2);
    CHECK_THROWS_AS(systematic_resample_with_u(w, 0.1, idx), DomainError);
}

TEST_CASE("offspring counts stay within floor/ceil of J*w") {
    RngStream rng(2024, 0);
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform() * 49);
        std::vector<double> w(n);
        double total = 0.0;
        for (auto& x : w) total += (x = -std::log(rng.uniform_pos()));
        for (auto& x : w) x /= total;
        std::vector<int> idx(n);
        systematic_resample(w, rng, idx);
        std::vector<int> count(n, 0);
        for (int i : idx) ++count[i];
        for (int i = 0; i < n; ++i) {
            CHECK(count[i] >= std::floor(n * w[i]) - 1e-9);
            CHECK(count[i] <= std::ceil(n * w[i]) + 1e-9);
        }
    }
}

TEST_CASE("bootstrap filter is exact for a deterministic state") {
    const DeterministicScalarModel model(1.0, 0.5);
    const auto data = single_obs(0.5);  // y equals the propagated state
    Eigen::VectorXd theta(1);
    theta << 0.0;
    for (int particles : {2, 64}) {
        for (std::uint64_t seed : {1ULL, 99ULL}) {
            const auto out = bootstrap_filter(model, theta, data, particles, seed);
            CHECK(out.loglik == doctest::Approx(-0.5 * kLog2Pi).epsilon(1e-15));
            CHECK(out.ess_trace[0] == doctest::Approx(particles).epsilon(1e-12));
        }
    }
}

TEST_CASE("bootstrap filter matches the analytic one-step marginal") {
    const NoisyScalarModel model(3.0);
    const auto data = single_obs(0.0);
    Eigen::VectorXd theta(1);
    theta << 0.0;
    const double analytic = -0.5 * std::log(2.0 * M_PI * 10.0);  // Y_1 ~ N(0, 10)
    std::vector<double> estimates(20);
    for (int s = 0; s < 20; ++s)
        estimates[s] = bootstrap_filter(model, theta, data, 10000, 1000 + s).loglik;
    CHECK(std::abs(mean(estimates) - analytic) < 0.05);
}

TEST_CASE("bootstrap filter is bit-reproducible") {
    const auto spec = LinearGaussianSpec::benchmark();
    const LinearGaussianModel model(spec);
    const auto data = lg_simulate(spec, 40, 5);
    const Eigen::VectorXd theta = Eigen::Vector2d(-0.5, 0.3);
    const auto a = bootstrap_filter(model, theta, data, 300, 11);
    const auto b = bootstrap_filter(model, theta, data, 300, 11);
    CHECK(a.loglik == b.loglik);
    CHECK(a.ess_trace == b.ess_trace);
    for (double ess : a.ess_trace) {
        CHECK(ess >= 1.0);
        CHECK(ess <= 300.0);
    }
}

TEST_CASE("a fully degenerate step raises with its observation index") {
    const AllInfModel model;
    auto data = single_obs(0.0);
    Eigen::VectorXd theta(1);
    theta << 0.0;
    try {
        bootstrap_filter(model, theta, data, 8, 1);
        FAIL("expected DegeneracyError");
    } catch (const DegeneracyError& e) {
        CHECK(e.time_index == 1);
    }
}

TEST_CASE("zero perturbation collapses the perturbed filter onto the plain one") {
    const auto spec = LinearGaussianSpec::benchmark();
    const LinearGaussianModel model(spec);
    const auto data = lg_simulate(spec, 30, 6);
    const Eigen::VectorXd center = Eigen::Vector2d(-0.5, 0.3);

    PerturbSpec pspec;
    pspec.sigmas = Eigen::Vector2d::Zero();
    pspec.cooling_c = 0.95;
    pspec.init_multiplier = 1.0;
    pspec.ivp_mask = {false, false};

    const auto perturbed = perturbed_filter(model, center, data, 400, pspec, 1, 77);
    const auto plain = bootstrap_filter(model, center, data, 400, 77);
    CHECK(perturbed.loglik == plain.loglik);
    REQUIRE(perturbed.has_param_means());
    for (int n = 0; n < perturbed.param_filter_means.rows(); ++n)
        for (int i = 0; i < 2; ++i)
            CHECK(perturbed.param_filter_means(n, i) == center[i]);
}

TEST_CASE("IVP coordinates are perturbed only at time zero") {
    const FlatModel model;
    TimeSeriesData data;
    const int n_times = 50;
    data.times.resize(n_times);
    for (int n = 0; n < n_times; ++n) data.times[n] = n + 1;
    data.observations = Eigen::MatrixXd::Zero(n_times, 1);

    const auto spec = flat_spec(1.0, 1.0);
    const int particles = 512;  // two blocks
    const std::uint64_t seed = 31;

    Eigen::MatrixXd swarm(particles, 2);
    for (int j = 0; j < particles; ++j) swarm.row(j) = Eigen::Vector2d(0.0, 0.0);
    perturbed_filter_swarm(model, swarm, data, spec, 1, seed);

    // With flat weights the resampling permutation is the identity, so each
    // final particle is its own trajectory. The IVP coordinate must match the
    // time-zero draw exactly; reproduce those draws stream for stream.
    int j = 0;
    for (int b = 0; b < 2; ++b) {
        RngStream rng(seed, stream_id::make(stream_id::InitParam, 0, b));
        for (int in_block = 0; in_block < 256 && j < particles; ++in_block, ++j) {
            const double draw0 = rng.normal();  // non-IVP coordinate, sd 1
            const double draw1 = rng.normal();  // IVP coordinate, sd 1
            CHECK(swarm(j, 1) == draw1);
            CHECK(swarm(j, 0) != draw0);  // random walk moved it afterwards
        }
    }

    // Dispersion check: the random-walk coordinate accumulates variance
    // 1 + n_times while the IVP coordinate keeps variance 1.
    std::vector<double> walk(particles), ivp(particles);
    for (int i = 0; i < particles; ++i) {
        walk[i] = swarm(i, 0);
        ivp[i] = swarm(i, 1);
    }
    CHECK(std::sqrt(sample_variance(ivp)) == doctest::Approx(1.0).epsilon(0.15));
    CHECK(std::sqrt(sample_variance(walk)) ==
          doctest::Approx(std::sqrt(1.0 + n_times)).epsilon(0.15));
}

TEST_CASE("score is zero under zero displacement") {
    FilterOutput out;
    out.param_filter_means = Eigen::MatrixXd::Constant(10, 2, 0.4);
    out.ess_trace.assign(10, 100.0);
    const Eigen::VectorXd ref = Eigen::Vector2d(0.4, 0.4);
    const auto spec = flat_spec(0.02, 0.02, 1.0);
    const auto score = estimate_score(out, ref, spec, 1, ScoreMode::Sum);
    CHECK(score[0] == 0.0);
    CHECK(score[1] == 0.0);  // IVP coordinate always 0
}

TEST_CASE("score scales as the inverse perturbation covariance") {
    FilterOutput out;
    out.param_filter_means = Eigen::MatrixXd::Constant(5, 2, 1.0);
    out.ess_trace.assign(5, 100.0);
    const Eigen::VectorXd ref = Eigen::Vector2d(0.0, 0.0);

    PerturbSpec spec;
    spec.cooling_c = 1.0;
    spec.init_multiplier = 1.0;
    spec.ivp_mask = {false, false};
    spec.sigmas = Eigen::Vector2d(0.1, 0.1);
    const auto s1 = estimate_score(out, ref, spec, 1, ScoreMode::Sum);
    spec.sigmas = Eigen::Vector2d(0.2, 0.2);
    const auto s2 = estimate_score(out, ref, spec, 1, ScoreMode::Sum);
    CHECK(s2[0] == doctest::Approx(s1[0] / 4.0).epsilon(1e-14));
    CHECK(s2[1] == doctest::Approx(s1[1] / 4.0).epsilon(1e-14));

    // averaged mode divides the sum by N+1
    const auto avg = estimate_score(out, ref, spec, 1, ScoreMode::Averaged);
    CHECK(avg[0] == doctest::Approx(s2[0] / 6.0).epsilon(1e-14));
}

TEST_CASE("unperturbed non-IVP coordinates get score zero, not a division blowup") {
    FilterOutput out;
    out.param_filter_means = Eigen::MatrixXd::Constant(5, 2, 1.0);
    out.ess_trace.assign(5, 100.0);
    PerturbSpec spec = flat_spec(0.0, 0.1, 1.0);
    spec.ivp_mask = {false, false};
    const auto s = estimate_score(out, Eigen::Vector2d(0.0, 0.0), spec, 1, ScoreMode::Sum);
    CHECK(s[0] == 0.0);
    CHECK(s[1] != 0.0);
}

TEST_CASE("perturbed filter drifts the parameter means uphill") {
    // Regression against the exact-filter finite-difference gradient: the
    // sign of the mean displacement matches per coordinate for >= 8 of 10
    // seeds at a point away from the optimum.
    const auto spec = LinearGaussianSpec::benchmark();
    const LinearGaussianModel model(spec);
    const auto data = lg_simulate(spec, 100, 42);
    const Eigen::VectorXd center = Eigen::Vector2d(-0.3, 0.1);
    const Eigen::VectorXd grad = kalman_fd_gradient(spec, data, center);

    PerturbSpec pspec;
    pspec.sigmas = Eigen::Vector2d(0.02, 0.02);
    pspec.cooling_c = 0.95;
    pspec.init_multiplier = 1.0;
    pspec.ivp_mask = {false, false};

    int match0 = 0, match1 = 0;
    for (int s = 0; s < 10; ++s) {
        const auto out = perturbed_filter(model, center, data, 1000, pspec, 1, 300 + s);
        Eigen::Vector2d drift = Eigen::Vector2d::Zero();
        for (int n = 0; n < out.param_filter_means.rows(); ++n)
            drift += out.param_filter_means.row(n).transpose() - center;
        drift /= out.param_filter_means.rows();
        if (drift[0] * grad[0] > 0) ++match0;
        if (drift[1] * grad[1] > 0) ++match1;
    }
    CHECK(match0 >= 8);
    CHECK(match1 >= 8);
}
