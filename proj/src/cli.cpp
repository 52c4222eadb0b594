#include "calib/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "calib/calibration.hpp"
#include "calib/csv.hpp"
#include "calib/decisions.hpp"
#include "calib/frequentist.hpp"
#include "calib/grid_posterior.hpp"
#include "calib/hypothesis.hpp"
#include "calib/limits.hpp"
#include "calib/model_family.hpp"
#include "calib/predictive.hpp"

namespace calib::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const json& require_field(const json& j, const char* key, const std::string& ctx) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError("missing field '" + std::string(key) + "' in " + ctx);
    return j.at(key);
}

double require_number(const json& j, const char* key, const std::string& ctx) {
    const json& v = require_field(j, key, ctx);
    if (!v.is_number()) throw ConfigError("field '" + std::string(key) + "' in " + ctx + " must be a number");
    return v.get<double>();
}

std::size_t require_uint(const json& j, const char* key, const std::string& ctx) {
    const json& v = require_field(j, key, ctx);
    if (!v.is_number_unsigned())
        throw ConfigError("field '" + std::string(key) + "' in " + ctx + " must be a non-negative integer");
    return v.get<std::size_t>();
}

std::string require_string(const json& j, const char* key, const std::string& ctx) {
    const json& v = require_field(j, key, ctx);
    if (!v.is_string()) throw ConfigError("field '" + std::string(key) + "' in " + ctx + " must be a string");
    return v.get<std::string>();
}

double optional_number(const json& j, const char* key, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_number()) throw ConfigError("field '" + std::string(key) + "' must be a number");
    return j.at(key).get<double>();
}

bool optional_bool(const json& j, const char* key, bool fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    if (!j.at(key).is_boolean()) throw ConfigError("field '" + std::string(key) + "' must be a boolean");
    return j.at(key).get<bool>();
}

std::vector<double> require_number_array(const json& j, const char* key, const std::string& ctx) {
    const json& v = require_field(j, key, ctx);
    if (!v.is_array() || v.empty())
        throw ConfigError("field '" + std::string(key) + "' in " + ctx + " must be a non-empty array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const json& e : v) {
        if (!e.is_number())
            throw ConfigError("field '" + std::string(key) + "' in " + ctx + " must contain numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

ModelFamily build_model(const json& j) {
    const std::string name = require_string(j, "name", "model");
    const std::size_t n_obs = require_uint(j, "n_obs", "model");
    if (n_obs == 0) throw ConfigError("field 'n_obs' in model must be at least 1");

    ModelFamily model;
    if (name == "normal_mean") {
        const double sigma = require_number(j, "sigma", "model");
        if (!(sigma > 0.0)) throw ConfigError("field 'sigma' in model must be positive");
        const double lo = optional_number(j, "mu_lo", -std::numeric_limits<double>::infinity());
        const double hi = optional_number(j, "mu_hi", std::numeric_limits<double>::infinity());
        if (!(lo < hi)) throw ConfigError("model bounds need mu_lo < mu_hi");
        model = normal_mean_family(sigma, n_obs, lo, hi);
    } else if (name == "gaussian_signal_background") {
        model = gaussian_signal_background(n_obs, optional_bool(j, "positive_signal", false));
    } else {
        throw ConfigError("unknown model name '" + name + "' (expected 'normal_mean' or "
                          "'gaussian_signal_background')");
    }

    if (j.contains("fix")) {
        const json& f = j.at("fix");
        const json& idx = require_field(f, "indices", "model.fix");
        std::vector<std::size_t> indices;
        if (!idx.is_array()) throw ConfigError("field 'indices' in model.fix must be an array");
        for (const json& e : idx) {
            if (!e.is_number_unsigned())
                throw ConfigError("field 'indices' in model.fix must contain non-negative integers");
            indices.push_back(e.get<std::size_t>());
        }
        const std::vector<double> values = require_number_array(f, "values", "model.fix");
        try {
            model = fix_components(model, indices, values);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model.fix rejected: ") + e.what());
        }
    }
    return model;
}

Prior build_prior(const json& j, const ParamSpace& space) {
    const json& comps = require_field(j, "components", "prior");
    if (!comps.is_array() || comps.size() != space.size())
        throw ConfigError("prior.components must list one entry per parameter component");
    std::vector<PriorComponent> parsed;
    parsed.reserve(comps.size());
    for (const json& c : comps) {
        const std::string kind = require_string(c, "kind", "prior component");
        try {
            if (kind == "normal")
                parsed.push_back(normal_component(require_number(c, "mean", "prior component"),
                                                  require_number(c, "sd", "prior component")));
            else if (kind == "uniform")
                parsed.push_back(uniform_component(require_number(c, "lo", "prior component"),
                                                   require_number(c, "hi", "prior component")));
            else if (kind == "point")
                parsed.push_back(point_component(require_number(c, "value", "prior component")));
            else
                throw ConfigError("unknown prior component kind '" + kind + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(std::string("invalid prior component: ") + e.what());
        }
    }
    try {
        return independent_prior(space, std::move(parsed));
    } catch (const std::exception& e) {
        throw ConfigError(std::string("prior rejected: ") + e.what());
    }
}

GridSpec build_grid(const json& j, const ParamSpace& space) {
    const json& axes = require_field(j, "axes", "grid");
    if (!axes.is_array() || axes.empty()) throw ConfigError("grid.axes must be a non-empty array");
    GridSpec grid;
    for (const json& a : axes) {
        GridAxis axis;
        axis.lo = require_number(a, "lo", "grid axis");
        axis.hi = require_number(a, "hi", "grid axis");
        axis.nodes = require_uint(a, "nodes", "grid axis");
        grid.axes.push_back(axis);
    }
    try {
        require_grid_in_bounds(space, grid);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("grid rejected: ") + e.what());
    }
    return grid;
}

ParamPoint build_point(const json& j, const char* key, const std::string& ctx,
                       const ParamSpace& space) {
    ParamPoint p;
    p.values = require_number_array(j, key, ctx);
    try {
        space.require_in_bounds(p);
    } catch (const std::exception& e) {
        throw ConfigError("field '" + std::string(key) + "' in " + ctx + " rejected: " + e.what());
    }
    return p;
}

Hypothesis build_hypothesis(const json& j, const std::string& ctx) {
    ModelFamily model = build_model(require_field(j, "model", ctx));
    const double prior_prob = optional_number(j, "prior_prob", 0.5);
    try {
        if (j.contains("point")) {
            ParamPoint p;
            p.values = require_number_array(j, "point", ctx);
            return point_hypothesis(std::move(model), std::move(p), prior_prob);
        }
        Prior prior = build_prior(require_field(j, "prior", ctx), model.param_space);
        GridSpec grid = build_grid(require_field(j, "grid", ctx), model.param_space);
        return model_hypothesis(std::move(model), std::move(prior), std::move(grid), prior_prob);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(ctx + " rejected: " + e.what());
    }
}

struct StudyContext {
    json cfg;
    fs::path out_dir;
    unsigned workers = 1;
    RngKey key;
    json outputs = json::object(); // file -> data row count
};

void emit(StudyContext& ctx, const std::string& name, const std::string& content,
          std::size_t data_rows) {
    write_file_atomic(ctx.out_dir / name, content);
    ctx.outputs[name] = data_rows;
}

std::size_t study_n_rep(const json& cfg) {
    const std::size_t n = require_uint(cfg, "n_rep", "config");
    if (n < 1) throw ConfigError("field 'n_rep' in config must be at least 1");
    return n;
}

std::vector<std::string> theta_headers(const ParamSpace& space) {
    std::vector<std::string> h;
    h.reserve(space.size());
    for (const std::string& n : space.names) h.push_back("theta_" + n);
    return h;
}

// ---- study runners ------------------------------------------------------

void run_sbc(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const Prior prior = build_prior(require_field(ctx.cfg, "prior", "config"), model.param_space);
    const GridSpec grid = build_grid(require_field(ctx.cfg, "grid", "config"), model.param_space);
    const std::size_t n_rep = study_n_rep(ctx.cfg);

    const CalibrationStudy study = run_calibration_study(model, prior, grid, n_rep, ctx.key,
                                                         nullptr, nullptr, ctx.workers,
                                                         ctx.cfg.dump());
    const EyeChart chart = eye_chart_dataset(study);
    const std::size_t dim = model.param_space.size();
    emit(ctx, "records.csv", calibration_records_csv(study), study.records.size() * dim);
    emit(ctx, "summary.csv", calibration_summary_csv(study), study.records.empty() ? 0 : dim);
    emit(ctx, "eye_chart.csv", eye_chart_csv(chart), chart.rows.size());
}

void run_power(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const ParamSpace& space = model.param_space;
    const ParamPoint theta_null = build_point(ctx.cfg, "theta_null", "config", space);
    const double alpha = require_number(ctx.cfg, "alpha", "config");
    const bool two_sided = optional_bool(ctx.cfg, "two_sided", false);
    const double target = optional_number(ctx.cfg, "target", 0.999);
    const std::size_t n_rep = study_n_rep(ctx.cfg);

    std::vector<double> phenom_values;
    if (ctx.cfg.contains("phenom_values")) {
        phenom_values = require_number_array(ctx.cfg, "phenom_values", "config");
    } else {
        const json& g = require_field(ctx.cfg, "phenom_grid", "config (phenom_values or phenom_grid)");
        const double lo = require_number(g, "lo", "phenom_grid");
        const double hi = require_number(g, "hi", "phenom_grid");
        const std::size_t count = require_uint(g, "count", "phenom_grid");
        if (count < 1) throw ConfigError("field 'count' in phenom_grid must be at least 1");
        if (count == 1) {
            phenom_values.push_back(lo);
        } else {
            for (std::size_t i = 0; i < count; ++i)
                phenom_values.push_back(lo + (hi - lo) * static_cast<double>(i) /
                                                 static_cast<double>(count - 1));
        }
    }
    if (space.phenom_indices().size() != 1)
        throw ConfigError("power study needs exactly one phenomenological component");

    std::vector<ParamPoint> alternatives;
    alternatives.reserve(phenom_values.size());
    for (double v : phenom_values) {
        const double ph[1] = {v};
        alternatives.push_back(with_phenom(space, theta_null, ph));
    }

    const PowerCurve curve = power_curve(model, theta_null, alternatives, alpha, n_rep, ctx.key,
                                         target, two_sided, ctx.workers);

    std::vector<std::string> header = theta_headers(space);
    header.insert(header.end(), {"power", "se", "n_rep"});
    CsvBuilder csv(header);
    for (const PowerPoint& pt : curve.points) {
        csv.begin_row();
        for (double v : pt.theta.values) csv.add(v);
        csv.add(pt.power);
        csv.add(pt.std_error);
        csv.add(pt.n_rep);
        csv.end_row();
    }
    emit(ctx, "power_curve.csv", csv.str(), curve.points.size());
}

void run_coverage(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const double level = require_number(ctx.cfg, "level", "config");
    const std::vector<double> thetas = require_number_array(ctx.cfg, "theta_values", "config");
    const std::size_t n_rep = study_n_rep(ctx.cfg);
    if (model.param_space.size() != 1)
        throw ConfigError("coverage study needs a single-component model");

    SetEstimator interval = normal_mean_interval(model, level);
    std::vector<std::string> header = theta_headers(model.param_space);
    header.insert(header.end(), {"coverage", "se", "n_rep"});
    CsvBuilder csv(header);
    for (double v : thetas) {
        const ParamPoint truth{{v}};
        const RiskEstimate r = coverage(model, truth, interval, n_rep, ctx.key, ctx.workers);
        csv.begin_row();
        csv.add(v);
        csv.add(r.value);
        csv.add(r.std_error);
        csv.add(r.n_replications);
        csv.end_row();
    }
    emit(ctx, "coverage.csv", csv.str(), thetas.size());
}

void run_minimax(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const std::vector<double> factors = require_number_array(ctx.cfg, "factors", "config");
    const std::vector<double> thetas = require_number_array(ctx.cfg, "theta_values", "config");
    const double loss_p = optional_number(ctx.cfg, "loss_p", 2.0);
    const std::size_t n_rep = study_n_rep(ctx.cfg);
    if (model.param_space.size() != 1)
        throw ConfigError("minimax study needs a single-component model");

    std::vector<PointEstimator> estimators;
    estimators.reserve(factors.size());
    for (double c : factors) estimators.push_back(scaled_mean_estimator(c));
    std::vector<ParamPoint> grid;
    grid.reserve(thetas.size());
    for (double v : thetas) grid.push_back(ParamPoint{{v}});

    const MinimaxSelection sel =
        minimax_select(model, estimators, grid, lp_loss(loss_p), n_rep, ctx.key, ctx.workers);

    {
        std::vector<std::string> header = {"estimator"};
        for (const std::string& h : theta_headers(model.param_space)) header.push_back(h);
        header.insert(header.end(), {"risk", "se"});
        CsvBuilder csv(header);
        for (std::size_t e = 0; e < estimators.size(); ++e) {
            const WorstRisk& w = sel.per_estimator[e];
            for (std::size_t g = 0; g < grid.size(); ++g) {
                csv.begin_row();
                csv.add(estimators[e].name);
                csv.add(grid[g][0]);
                csv.add(w.per_point[g].value);
                csv.add(w.per_point[g].std_error);
                csv.end_row();
            }
        }
        emit(ctx, "risk_grid.csv", csv.str(), estimators.size() * grid.size());
    }
    {
        CsvBuilder csv({"estimator", "minimax_risk", "se", "worst_theta"});
        csv.begin_row();
        csv.add(sel.name);
        csv.add(sel.worst.risk.value);
        csv.add(sel.worst.risk.std_error);
        csv.add(sel.worst.at[0]);
        csv.end_row();
        emit(ctx, "selection.csv", csv.str(), 1);
    }
}

DecisionRule build_rule(const json& j, const ModelFamily& model, const Prior& prior,
                        StudyContext& ctx) {
    const std::string kind = require_string(j, "kind", "rule");
    try {
        if (kind == "nhst") {
            return nhst_rule(model, build_point(j, "theta_null", "rule", model.param_space),
                             require_number(j, "alpha", "rule"), optional_bool(j, "two_sided", false));
        }
        if (kind == "rope") {
            return rope_rule(model, prior, build_grid(require_field(j, "grid", "rule"), model.param_space),
                             require_number(j, "theta0", "rule"), require_number(j, "alpha", "rule"));
        }
        if (kind == "bayes_factor") {
            return bayes_factor_rule(build_hypothesis(require_field(j, "absence", "rule"), "rule.absence"),
                                     build_hypothesis(require_field(j, "presence", "rule"), "rule.presence"));
        }
        if (kind == "predictive_score") {
            const Hypothesis absence = build_hypothesis(require_field(j, "absence", "rule"), "rule.absence");
            const Hypothesis presence = build_hypothesis(require_field(j, "presence", "rule"), "rule.presence");
            const json& h = require_field(j, "holdout", "rule");
            const ParamPoint theta = build_point(h, "theta", "rule.holdout", model.param_space);
            const std::size_t n_rows = require_uint(h, "n_rows", "rule.holdout");
            if (n_rows == 0) throw ConfigError("field 'n_rows' in rule.holdout must be at least 1");
            RngStream rng = ctx.key.derive(0x484F4Cu).stream(0);
            Observation holdout;
            holdout.n_rows = n_rows;
            holdout.row_dim = model.obs_dim;
            holdout.data.resize(n_rows * model.obs_dim);
            for (std::size_t i = 0; i < n_rows; ++i)
                model.row_sampler(theta, rng, {holdout.data.data() + i * model.obs_dim, model.obs_dim});
            return predictive_score_rule(absence, presence, std::move(holdout));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("rule rejected: ") + e.what());
    }
    throw ConfigError("unknown rule kind '" + kind + "'");
}

void run_discovery(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const Prior prior = build_prior(require_field(ctx.cfg, "prior", "config"), model.param_space);
    const DecisionRule rule = build_rule(require_field(ctx.cfg, "rule", "config"), model, prior, ctx);

    RateTableRequest req;
    req.n_rep = study_n_rep(ctx.cfg);
    req.theta0 = optional_number(ctx.cfg, "theta0", 0.0);
    req.workers = ctx.workers;
    const std::string mode = require_string(ctx.cfg, "mode", "config");
    if (mode == "conditional") {
        req.mode = RateTableMode::ConditionalOnPhenom;
        req.absence_phenom = require_number_array(ctx.cfg, "absence_phenom", "config");
        req.presence_phenom = require_number_array(ctx.cfg, "presence_phenom", "config");
    } else if (mode == "model_prior") {
        req.mode = RateTableMode::ModelPrior;
    } else {
        throw ConfigError("unknown mode '" + mode + "' (expected 'conditional' or 'model_prior')");
    }

    const RateTable table = estimate_rate_table(model, prior, rule, req, ctx.key);
    std::string out;
    append_rate_table_csv(table, out);
    std::size_t rows = 0;
    for (std::size_t rowi = 0; rowi < 2; ++rowi)
        if (table.row_defined[rowi]) rows += 3;
    emit(ctx, "rate_table.csv", out, rows);
    for (std::size_t rowi = 0; rowi < 2; ++rowi)
        if (!table.row_defined[rowi])
            std::cerr << "warning: truth row " << (rowi == 0 ? "absence" : "presence")
                      << " received no replications; its rates are undefined\n";
}

void run_limits(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const Prior prior = build_prior(require_field(ctx.cfg, "prior", "config"), model.param_space);
    const GridSpec grid = build_grid(require_field(ctx.cfg, "grid", "config"), model.param_space);
    const double alpha = require_number(ctx.cfg, "alpha", "config");
    const std::size_t n_rep = study_n_rep(ctx.cfg);

    const LimitStudy study = limit_sensitivity(model, prior, alpha, n_rep, grid, ctx.key, ctx.workers);
    emit(ctx, "limits.csv", limit_records_csv(study), study.limits.size());
    emit(ctx, "limit_band.csv", limit_band_csv(study.band), 5);
}

void run_predictive(StudyContext& ctx) {
    const ModelFamily model = build_model(require_field(ctx.cfg, "model", "config"));
    const ParamPoint theta_true = build_point(ctx.cfg, "theta_true", "config", model.param_space);
    const std::size_t n_holdout = require_uint(ctx.cfg, "n_holdout", "config");
    if (n_holdout == 0) throw ConfigError("field 'n_holdout' in config must be at least 1");
    const std::size_t n_mc_kl = ctx.cfg.contains("n_mc_kl")
                                    ? require_uint(ctx.cfg, "n_mc_kl", "config")
                                    : 10000;
    const json& hyps = require_field(ctx.cfg, "hypotheses", "config");
    if (!hyps.is_array() || hyps.empty())
        throw ConfigError("field 'hypotheses' in config must be a non-empty array");

    Observation holdout;
    holdout.n_rows = n_holdout;
    holdout.row_dim = model.obs_dim;
    holdout.data.resize(n_holdout * model.obs_dim);
    {
        RngStream rng = ctx.key.derive(1).stream(0);
        for (std::size_t i = 0; i < n_holdout; ++i)
            model.row_sampler(theta_true, rng, {holdout.data.data() + i * model.obs_dim, model.obs_dim});
    }
    const ParamPoint theta_train = ctx.cfg.contains("theta_train")
                                       ? build_point(ctx.cfg, "theta_train", "config", model.param_space)
                                       : theta_true;
    Observation train;
    {
        RngStream rng = ctx.key.derive(2).stream(0);
        train = sample_observation(model, theta_train, rng);
    }

    CsvBuilder csv({"hypothesis", "kind", "score", "score_se", "kl", "kl_se"});
    std::size_t index = 0;
    for (const json& hj : hyps) {
        const Hypothesis h = build_hypothesis(hj, "hypotheses[" + std::to_string(index) + "]");
        if (h.model.obs_dim != model.obs_dim)
            throw ConfigError("hypothesis observation dimension mismatch");
        const PredictiveDistribution pred = fit_predictive(h, train);
        const ScoreEstimate score = predictive_score(pred, holdout);
        const ScoreEstimate kl =
            kl_divergence_mc(model, theta_true, pred, n_mc_kl, ctx.key.derive(3 + index));
        const char* kind = pred.kind == PredictiveKind::Plugin ? "plugin" : "posterior_predictive";
        csv.begin_row();
        csv.add(hj.contains("label") ? require_string(hj, "label", "hypothesis")
                                     : "hypothesis_" + std::to_string(index));
        csv.add(kind);
        csv.add(score.value);
        csv.add(score.std_error);
        csv.add(kl.value);
        csv.add(kl.std_error);
        csv.end_row();
        ++index;
    }
    emit(ctx, "predictive.csv", csv.str(), index);
}

// ---- config validation ---------------------------------------------------

const char* kKnownKinds[] = {"sbc", "power", "coverage", "minimax", "discovery", "limits",
                             "predictive"};

void check_config(const json& cfg, std::vector<std::string>& diags) {
    if (!cfg.is_object()) {
        diags.push_back("config root must be a JSON object");
        return;
    }
    std::string kind;
    try {
        kind = require_string(cfg, "kind", "config");
        bool known = false;
        for (const char* k : kKnownKinds) known = known || kind == k;
        if (!known) diags.push_back("unknown study kind '" + kind + "' in field 'kind'");
    } catch (const std::exception& e) {
        diags.push_back(e.what());
    }
    try {
        require_uint(cfg, "seed", "config"); // mandatory, no wall-clock default
    } catch (const std::exception& e) {
        diags.push_back(e.what());
    }
    try {
        study_n_rep(cfg);
    } catch (const std::exception& e) {
        if (kind != "predictive") diags.push_back(e.what());
    }

    ModelFamily model;
    bool have_model = false;
    try {
        model = build_model(require_field(cfg, "model", "config"));
        have_model = true;
    } catch (const std::exception& e) {
        diags.push_back(e.what());
    }
    if (!have_model || kind.empty()) return;

    const bool needs_prior = kind == "sbc" || kind == "discovery" || kind == "limits";
    const bool needs_grid = kind == "sbc" || kind == "limits";
    try {
        if (needs_prior) build_prior(require_field(cfg, "prior", "config"), model.param_space);
    } catch (const std::exception& e) {
        diags.push_back(e.what());
    }
    try {
        if (needs_grid) build_grid(require_field(cfg, "grid", "config"), model.param_space);
    } catch (const std::exception& e) {
        diags.push_back(e.what());
    }
    try {
        if (kind == "power") {
            build_point(cfg, "theta_null", "config", model.param_space);
            require_number(cfg, "alpha", "config");
            if (!cfg.contains("phenom_values") && !cfg.contains("phenom_grid"))
                diags.push_back("power study needs 'phenom_values' or 'phenom_grid'");
        } else if (kind == "coverage") {
            require_number(cfg, "level", "config");
            require_number_array(cfg, "theta_values", "config");
        } else if (kind == "minimax") {
            require_number_array(cfg, "factors", "config");
            require_number_array(cfg, "theta_values", "config");
        } else if (kind == "discovery") {
            require_field(cfg, "rule", "config");
            const std::string mode = require_string(cfg, "mode", "config");
            if (mode != "conditional" && mode != "model_prior")
                diags.push_back("unknown mode '" + mode + "'");
            if (mode == "conditional") {
                require_number_array(cfg, "absence_phenom", "config");
                require_number_array(cfg, "presence_phenom", "config");
            }
        } else if (kind == "limits") {
            require_number(cfg, "alpha", "config");
        } else if (kind == "predictive") {
            build_point(cfg, "theta_true", "config", model.param_space);
            require_uint(cfg, "n_holdout", "config");
            require_field(cfg, "hypotheses", "config");
        }
    } catch (const std::exception& e) {
        diags.push_back(e.what());
    }
}

unsigned resolve_workers(const json& cfg, const Overrides& overrides) {
    if (overrides.workers) {
        if (*overrides.workers < 1) throw ConfigError("--workers must be at least 1");
        return *overrides.workers;
    }
    if (const char* env = std::getenv("CALIB_WORKERS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("CALIB_WORKERS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    if (cfg.contains("workers")) {
        if (!cfg.at("workers").is_number_unsigned() || cfg.at("workers").get<unsigned>() < 1)
            throw ConfigError("field 'workers' in config must be a positive integer");
        return cfg.at("workers").get<unsigned>();
    }
    return 1;
}

} // namespace

std::vector<std::string> validate_config_text(const std::string& json_text) {
    std::vector<std::string> diags;
    json cfg;
    try {
        cfg = json::parse(json_text);
    } catch (const std::exception& e) {
        diags.push_back(std::string("config is not valid JSON: ") + e.what());
        return diags;
    }
    check_config(cfg, diags);
    return diags;
}

int run_study(const std::string& config_path, const Overrides& overrides) {
    json cfg;
    StudyContext ctx;
    std::string kind;
    try {
        std::ifstream in(config_path, std::ios::binary);
        if (!in) throw ConfigError("cannot read config file " + config_path);
        std::ostringstream buf;
        buf << in.rdbuf();
        const std::string text = buf.str();

        const std::vector<std::string> diags = validate_config_text(text);
        if (!diags.empty()) {
            for (const std::string& d : diags) std::cerr << "config error: " << d << "\n";
            return kExitConfigError;
        }
        cfg = json::parse(text);

        ctx.cfg = cfg;
        ctx.key = RngKey{require_uint(cfg, "seed", "config")};
        ctx.workers = resolve_workers(cfg, overrides);
        kind = require_string(cfg, "kind", "config");

        std::string out_dir = overrides.out_dir
                                  ? *overrides.out_dir
                                  : (cfg.contains("out_dir") ? require_string(cfg, "out_dir", "config")
                                                             : std::string("."));
        ctx.out_dir = out_dir;
        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        if (ec) throw ConfigError("cannot create output directory " + out_dir);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        if (kind == "sbc")
            run_sbc(ctx);
        else if (kind == "power")
            run_power(ctx);
        else if (kind == "coverage")
            run_coverage(ctx);
        else if (kind == "minimax")
            run_minimax(ctx);
        else if (kind == "discovery")
            run_discovery(ctx);
        else if (kind == "limits")
            run_limits(ctx);
        else if (kind == "predictive")
            run_predictive(ctx);
        else {
            std::cerr << "config error: unknown study kind '" << kind << "'\n";
            return kExitConfigError;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalError;
    }
    const auto stop = std::chrono::steady_clock::now();

    try {
        json manifest;
        manifest["version"] = kVersion;
        manifest["kind"] = kind;
        manifest["seed"] = cfg.at("seed");
        manifest["workers"] = ctx.workers;
        manifest["wall_time_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();
        manifest["outputs"] = ctx.outputs;
        manifest["config"] = cfg;
        write_file_atomic(ctx.out_dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalError;
    }
    return kExitOk;
}

int validate_config(const std::string& config_path) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "config error: cannot read config file " << config_path << "\n";
        return kExitConfigError;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::vector<std::string> diags = validate_config_text(buf.str());
    for (const std::string& d : diags) std::cerr << "config error: " << d << "\n";
    return diags.empty() ? kExitOk : kExitConfigError;
}

} // namespace calib::cli
