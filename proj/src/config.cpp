#include "aif/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"

#include "aif/errors.hpp"
#include "aif/io/csv.hpp"

namespace aif {

namespace {

using nlohmann::json;

json load_json(const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path);
    std::ifstream in(path);
    try {
        return json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse " + path + ": " + e.what());
    }
}

Eigen::Matrix2d parse_matrix2(const json& j, const char* key) {
    const auto& rows = j.at(key);
    if (!rows.is_array() || rows.size() != 2 || rows[0].size() != 2 || rows[1].size() != 2)
        throw ConfigError(std::string("expected 2x2 array for '") + key + "'");
    Eigen::Matrix2d m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = rows[r][c].get<double>();
    return m;
}

LinearGaussianSpec parse_lg_spec(const json& model) {
    LinearGaussianSpec spec = LinearGaussianSpec::benchmark();
    if (model.contains("alpha")) spec.alpha = parse_matrix2(model, "alpha");
    if (model.contains("sigma")) spec.sigma = parse_matrix2(model, "sigma");
    if (model.contains("obs_cov")) spec.obs_cov = parse_matrix2(model, "obs_cov");
    if (model.contains("x0")) {
        const auto& v = model.at("x0");
        spec.x0 << v.at(0).get<double>(), v.at(1).get<double>();
    }
    if (model.contains("theta")) {
        const auto& v = model.at("theta");
        spec.alpha(0, 1) = v.at(0).get<double>();
        spec.alpha(1, 0) = v.at(1).get<double>();
    }
    spec.validate();
    return spec;
}

MalariaSpec parse_malaria_spec(const json& model) {
    MalariaSpec spec = MalariaSpec::synthetic_benchmark();
    if (!model.contains("params")) return spec;
    const auto& params = model.at("params");
    const auto get = [&](const char* key, double& slot) {
        if (params.contains(key)) slot = params.at(key).get<double>();
    };
    get("delta", spec.delta);
    get("mu_EI", spec.mu_EI);
    get("mu_IS", spec.mu_IS);
    get("mu_IQ", spec.mu_IQ);
    get("mu_IH", spec.mu_IH);
    get("mu_HI", spec.mu_HI);
    get("mu_QS", spec.mu_QS);
    get("frac_a", spec.frac_a);
    get("frac_b", spec.frac_b);
    get("frac_q", spec.frac_q);
    get("tau_D", spec.tau_D);
    for (int i = 0; i < 6; ++i)
        get(("b" + std::to_string(i + 1)).c_str(), spec.spline_coeffs[i]);
    get("b_rain", spec.rain_coeff);
    get("sigma_proc", spec.sigma_proc);
    get("rho", spec.report_rate);
    get("sigma_obs", spec.sigma_obs);
    get("population", spec.population);
    get("init_force", spec.init_force);
    static const char* kCompartments[] = {"S0", "E0", "I0", "Q0", "H1_0", "H2_0", "H3_0"};
    for (int i = 0; i < 7; ++i) get(kCompartments[i], spec.init_compartments[i]);
    spec.validate();
    return spec;
}

// sigma spec: a number (all non-IVP coordinates), an array of length p, or a
// name -> value map (absent names get 0).
Eigen::VectorXd parse_sigmas(const json& j, const PompModel& model) {
    const int p = model.param_dim();
    const auto names = model.param_names();
    const auto ivp = model.ivp_mask();
    Eigen::VectorXd sigmas = Eigen::VectorXd::Zero(p);
    if (j.is_number()) {
        for (int i = 0; i < p; ++i) sigmas[i] = ivp[i] ? 0.0 : j.get<double>();
    } else if (j.is_array()) {
        if (static_cast<int>(j.size()) != p)
            throw ConfigError("sigma array length must equal the parameter dimension");
        for (int i = 0; i < p; ++i) sigmas[i] = j.at(i).get<double>();
    } else if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            const auto it = std::find(names.begin(), names.end(), key);
            if (it == names.end())
                throw ConfigError("sigma refers to unknown parameter '" + key + "'");
            sigmas[it - names.begin()] = value.get<double>();
        }
    } else {
        throw ConfigError("sigma must be a number, array, or name map");
    }
    return sigmas;
}

// Box bounds are given on the natural scale (number for both coordinates of a
// 2-d model, array of length p, or a name map); coordinates left out stay
// pinned at the config's parameter point.
void parse_box_side(const json& j, const PompModel& model, const Eigen::VectorXd& theta_nat,
                    Eigen::VectorXd& side_nat) {
    side_nat = theta_nat;
    const auto names = model.param_names();
    if (j.is_number()) {
        side_nat.setConstant(j.get<double>());
    } else if (j.is_array()) {
        if (static_cast<int>(j.size()) != theta_nat.size())
            throw ConfigError("start_box array length must equal the parameter dimension");
        for (int i = 0; i < side_nat.size(); ++i) side_nat[i] = j.at(i).get<double>();
    } else if (j.is_object()) {
        for (const auto& [key, value] : j.items()) {
            const auto it = std::find(names.begin(), names.end(), key);
            if (it == names.end())
                throw ConfigError("start_box refers to unknown parameter '" + key + "'");
            side_nat[it - names.begin()] = value.get<double>();
        }
    } else {
        throw ConfigError("start_box bounds must be a number, array, or name map");
    }
}

ScoreMode parse_score_mode(const std::string& s) {
    if (s == "sum") return ScoreMode::Sum;
    if (s == "averaged") return ScoreMode::Averaged;
    throw ConfigError("score_mode must be 'sum' or 'averaged'");
}

SchedulePolicy parse_policy(const std::string& s) {
    if (s == "nonconvex") return SchedulePolicy::Nonconvex;
    if (s == "convex") return SchedulePolicy::Convex;
    throw ConfigError("policy must be 'nonconvex' or 'convex'");
}

}  // namespace

Eigen::VectorXd LoadedRun::theta_est() const {
    const auto names = model->param_names();
    return model->param_transform().forward(theta_nat, &names);
}

LoadedRun load_run_config(const std::string& path, const CliOverrides& overrides) {
    const json root = load_json(path);
    LoadedRun run;

    run.method = root.value("method", "aif");
    static const std::set<std::string> kMethods{"aif", "if1", "if2", "pf-only", "kalman"};
    if (!kMethods.count(run.method)) throw ConfigError("unknown method '" + run.method + "'");

    // --- model ---
    const json model_cfg = root.value("model", json::object());
    run.model_id = model_cfg.value("id", "lg");
    std::optional<CovariateTable> covariates;
    if (run.model_id == "lg") {
        run.lg_spec = parse_lg_spec(model_cfg);
        run.theta_nat = Eigen::Vector2d(run.lg_spec.alpha(0, 1), run.lg_spec.alpha(1, 0));
        run.model = std::make_shared<LinearGaussianModel>(run.lg_spec);
        run.sim_length = 100;
    } else if (run.model_id == "malaria") {
        run.malaria_spec = parse_malaria_spec(model_cfg);
        if (model_cfg.contains("rain_path")) {
            const std::string rain_path = model_cfg.at("rain_path").get<std::string>();
            if (!std::filesystem::exists(rain_path))
                throw ConfigError("rainfall covariate file not found: " + rain_path);
            covariates = io::read_covariates_csv(rain_path);
        }
        auto malaria = std::make_shared<MalariaModel>(run.malaria_spec, covariates);
        run.theta_nat = malaria->pack_params(run.malaria_spec);
        run.model = malaria;
        run.sim_length = 240;
    } else {
        throw ConfigError("unknown model id '" + run.model_id + "'");
    }
    if (run.method == "kalman" && run.model_id != "lg")
        throw ConfigError("the kalman method applies only to the linear-Gaussian model");

    // --- harness options ---
    run.master_seed = root.value("seed", 0ULL);
    run.workers = root.value("workers", 1);
    run.out_dir = root.value("out_dir", ".");
    if (overrides.seed) run.master_seed = *overrides.seed;
    if (overrides.workers) run.workers = *overrides.workers;
    if (overrides.out_dir) run.out_dir = *overrides.out_dir;
    if (run.workers < 1) throw ConfigError("workers must be >= 1");

    // --- data ---
    const json data_cfg = root.value("data", json::object());
    if (data_cfg.contains("path")) {
        const std::string data_path = data_cfg.at("path").get<std::string>();
        if (!std::filesystem::exists(data_path))
            throw ConfigError("data file not found: " + data_path);
        run.data = io::read_dataset_csv(data_path);
        if (covariates) run.data.covariates = covariates;
    } else {
        const json sim = data_cfg.value("simulate", json::object());
        run.data_from_simulation = true;
        run.data_seed = sim.value("seed", 42ULL);
        run.sim_length = sim.value(run.model_id == "malaria" ? "months" : "n_times",
                                   run.sim_length);
        if (run.sim_length < 1)
            throw ConfigError("simulation length must be >= 1");
        if (run.model_id == "lg") {
            run.data = lg_simulate(run.lg_spec, run.sim_length, run.data_seed);
        } else {
            run.data = malaria_simulate_data(run.malaria_spec, run.sim_length, run.data_seed,
                                             covariates ? &*covariates : nullptr);
        }
    }

    // --- estimation settings ---
    const json est = root.value("estimation", json::object());
    run.mif.particles = est.value("particles", 1000);
    run.mif.iterations = est.value("iterations", 25);
    run.mif.perturb.ivp_mask = run.model->ivp_mask();
    run.mif.perturb.sigmas = est.contains("sigma")
                                 ? parse_sigmas(est.at("sigma"), *run.model)
                                 : Eigen::VectorXd::Zero(run.model->param_dim());
    run.mif.perturb.cooling_c = est.value("cooling", 0.95);
    run.mif.perturb.init_multiplier = est.value("init_multiplier", 1.0);
    run.mif.policy = parse_policy(est.value("policy", "nonconvex"));
    run.mif.lipschitz = est.value("lipschitz", 1.0);
    run.mif.delta = est.value("delta", 1.0);
    run.mif.lambda_excess = est.value("lambda_excess", 0.0);
    run.mif.step_cooling = est.value("step_cooling", false);
    run.mif.score_mode = parse_score_mode(est.value("score_mode", "sum"));
    run.mif.score_center = est.value("score_center", "current_md") == std::string("previous_md")
                               ? ScoreCenter::PreviousMd
                               : ScoreCenter::CurrentMd;
    run.mif.step_indexing = est.value("step_indexing", "current") == std::string("previous")
                                ? StepIndexing::Previous
                                : StepIndexing::Current;
    if (est.contains("if1_step")) run.mif.if1_step = est.at("if1_step").get<double>();
    run.mif.ivp_lag = est.value("ivp_lag", 0);
    run.mif.seed = run.master_seed;

    // --- replication ---
    run.replicate.replications = root.value("replications", 1);
    run.replicate.eval_particles = est.value("eval_particles", 0);
    run.replicate.eval_reps = est.value("eval_reps", 10);
    run.replicate.workers = run.workers;
    run.replicate.master_seed = run.master_seed;

    // --- start box ---
    const auto theta_est = run.theta_est();
    run.box.lower = theta_est;
    run.box.upper = theta_est;
    if (root.contains("start_box")) {
        const auto& box_cfg = root.at("start_box");
        Eigen::VectorXd lower_nat, upper_nat;
        parse_box_side(box_cfg.at("lower"), *run.model, run.theta_nat, lower_nat);
        parse_box_side(box_cfg.at("upper"), *run.model, run.theta_nat, upper_nat);
        const auto names = run.model->param_names();
        run.box.lower = run.model->param_transform().forward(lower_nat, &names);
        run.box.upper = run.model->param_transform().forward(upper_nat, &names);
    }

    // --- summaries & benchmark ---
    const json summary = root.value("summarize", json::object());
    run.summary_threshold = summary.value("threshold", 3.0);
    if (summary.contains("reference_loglik")) {
        const auto& ref = summary.at("reference_loglik");
        if (ref.is_number()) {
            run.reference_loglik = ref.get<double>();
        } else if (ref.is_string() && ref.get<std::string>() == "kalman") {
            if (run.model_id != "lg")
                throw ConfigError("reference_loglik 'kalman' needs the linear-Gaussian model");
            run.reference_loglik = kalman_mle(run.lg_spec, run.data).loglik;
        } else {
            throw ConfigError("reference_loglik must be a number or 'kalman'");
        }
    }
    const json bench = root.value("benchmark", json::object());
    if (bench.contains("particle_counts"))
        run.benchmark_particle_counts = bench.at("particle_counts").get<std::vector<int>>();
    run.benchmark_runs = bench.value("runs", 5);

    return run;
}

}  // namespace aif
