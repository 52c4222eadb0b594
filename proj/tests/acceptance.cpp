// Acceptance gate: twelve end-to-end checks of the toolkit against
// closed-form oracles, each reported as a single PASS/FAIL line with its
// measured value and the tolerance pinned here in code.  Exit status is the
// number of failed checks.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "calib/calibration.hpp"
#include "calib/cli.hpp"
#include "calib/decisions.hpp"
#include "calib/frequentist.hpp"
#include "calib/grid_posterior.hpp"
#include "calib/hypothesis.hpp"
#include "calib/limits.hpp"
#include "calib/model_family.hpp"
#include "calib/parallel.hpp"
#include "calib/predictive.hpp"
#include "calib/rng.hpp"
#include "calib/stats.hpp"

using namespace calib;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int index, const char* name, bool pass, const std::string& detail) {
    std::printf("criterion %2d %s  %s: %s\n", index, pass ? "PASS" : "FAIL", name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// Known-mean family with background mean and sigma pinned: the null
// hypothesis device used by the first two checks.
ModelFamily signal_only_family(std::size_t n_obs) {
    const ModelFamily full = gaussian_signal_background(n_obs);
    const std::size_t idx[] = {1, 2};
    const double vals[] = {0.0, 1.0};
    return fix_components(full, idx, vals);
}

// 1. Size of the test equals the advertised false discovery rate 1 - alpha.
void criterion_nhst_fdr() {
    const double alpha = 0.95;
    const std::size_t n_rep = 10000;
    const double tol = 3.0 * std::sqrt(0.05 * 0.95 / 10000.0); // 0.006538
    try {
        const ModelFamily model = signal_only_family(10);
        const ParamPoint null{{0.0}};
        const PowerPoint size = power(model, null, null, alpha, n_rep, RngKey{1001}, false, 4);
        const bool pass = std::abs(size.power - 0.05) < tol;
        report(1, "nhst false discovery rate", pass,
               fmt("fdr=%.6f target 0.05 within %.6f", size.power, tol));
    } catch (const std::exception& e) {
        report(1, "nhst false discovery rate", false, e.what());
    }
}

// 2. Power at the alternative sitting exactly on the critical value is 1/2.
void criterion_power_oracle() {
    const double z95 = 1.6448536269514722;
    const double tol = 3.0 * std::sqrt(0.25 / 10000.0); // 0.015
    try {
        const ModelFamily model = signal_only_family(1);
        const PowerPoint p = power(model, ParamPoint{{0.0}}, ParamPoint{{z95}}, 0.95, 10000,
                                   RngKey{1002}, false, 4);
        const bool pass = std::abs(p.power - 0.5) < tol;
        report(2, "power at the critical alternative", pass,
               fmt("power=%.6f target 0.5 within %.6f", p.power, tol));
    } catch (const std::exception& e) {
        report(2, "power at the critical alternative", false, e.what());
    }
}

// 3. Null distribution of -2 log lambda approaches chi-squared with one
// degree of freedom.
void criterion_wilks() {
    const std::size_t n_rep = 2000;
    const double ks_tol = 0.05;
    try {
        const ModelFamily model = normal_mean_family(1.0, 100, -5.0, 5.0);
        BoxSpec box;
        box.lo = {-5.0};
        box.hi = {5.0};
        std::vector<double> stats(n_rep);
        const RngKey key{1003};
        parallel_for(n_rep, 4, [&](std::size_t r) {
            RngStream rng = key.stream(r);
            const Observation y = sample_observation(model, ParamPoint{{0.0}}, rng);
            const double phenom_null[] = {0.0};
            stats[r] = likelihood_ratio_statistic(model, phenom_null, y, box).minus2log;
        });
        std::sort(stats.begin(), stats.end());
        const double ks =
            ks_distance(stats, [](double x) { return 1.0 - chi_squared_tail(x, 1); });
        const bool pass = ks < ks_tol;
        report(3, "wilks null calibration", pass, fmt("ks=%.6f bound %.2f", ks, ks_tol));
    } catch (const std::exception& e) {
        report(3, "wilks null calibration", false, e.what());
    }
}

// 4. The exact normal interval covers at its nominal level at every truth.
void criterion_coverage() {
    const std::size_t n_rep = 10000;
    const double tol = 3.0 * std::sqrt(0.95 * 0.05 / 10000.0); // 0.006538
    try {
        const ModelFamily model = normal_mean_family(1.0, 4);
        const SetEstimator interval = normal_mean_interval(model, 0.95);
        bool pass = true;
        std::string detail;
        for (double truth : {-2.0, 0.0, 2.0}) {
            const RiskEstimate r =
                coverage(model, ParamPoint{{truth}}, interval, n_rep, RngKey{1004}, 4);
            pass = pass && std::abs(r.value - 0.95) < tol;
            detail += fmt("%scov(%g)=%.4f", detail.empty() ? "" : " ", truth, r.value);
        }
        report(4, "interval coverage", pass, detail + fmt(" target 0.95 within %.6f", tol));
    } catch (const std::exception& e) {
        report(4, "interval coverage", false, e.what());
    }
}

// 5. Minimax selection over the shrinkage family recovers c = 0.5.
void criterion_minimax() {
    const double risk_tol = 0.05;
    try {
        const ModelFamily model = normal_mean_family(1.0, 1, -50.0, 50.0);
        std::vector<PointEstimator> estimators;
        for (int i = 0; i <= 10; ++i)
            estimators.push_back(scaled_mean_estimator(static_cast<double>(i) / 10.0));
        std::vector<ParamPoint> grid;
        for (int i = 0; i < 21; ++i)
            grid.push_back(ParamPoint{{-1.0 + 2.0 * static_cast<double>(i) / 20.0}});
        const MinimaxSelection sel =
            minimax_select(model, estimators, grid, lp_loss(2.0), 10000, RngKey{1005}, 4);
        const bool pass =
            sel.name == "scaled_mean_0.5" && std::abs(sel.worst.risk.value - 0.5) < risk_tol;
        report(5, "minimax estimator recovery", pass,
               fmt("selected %s worst_risk=%.4f target 0.5 within %.2f", sel.name.c_str(),
                   sel.worst.risk.value, risk_tol));
    } catch (const std::exception& e) {
        report(5, "minimax estimator recovery", false, e.what());
    }
}

// 6. Grid posterior reproduces the conjugate mean, sd, and evidence.
void criterion_grid_accuracy() {
    const double rel_tol = 1e-3;
    try {
        const ModelFamily model = normal_mean_family(1.0, 1);
        const Prior prior = independent_prior(model.param_space, {normal_component(0.0, 1.0)});
        GridSpec grid;
        grid.axes = {GridAxis{-6.0, 6.0, 1001}};
        const Observation y = make_observation(1, 1, {2.0});
        const GridPosterior gp = build_grid_posterior(model, prior, y, grid);
        const MeanSd ms = posterior_mean_sd(gp, 0);
        const double sd_exact = std::sqrt(0.5);
        const double ev_exact = -2.2655121234846454;
        const double em = std::abs(ms.mean - 1.0) / 1.0;
        const double es = std::abs(ms.sd - sd_exact) / sd_exact;
        const double ee = std::abs(gp.log_evidence - ev_exact) / std::abs(ev_exact);
        const bool pass = em < rel_tol && es < rel_tol && ee < rel_tol;
        report(6, "conjugate grid posterior accuracy", pass,
               fmt("rel errors mean=%.2e sd=%.2e evidence=%.2e bound %.0e", em, es, ee,
                   rel_tol));
    } catch (const std::exception& e) {
        report(6, "conjugate grid posterior accuracy", false, e.what());
    }
}

// 7. Self-consistent simulation: uniform ranks, normal z, exact shrinkage.
void criterion_sbc() {
    const double chi2_bar = 43.82019596451753; // chi-squared(19) 0.999 quantile
    const double z_frac_exact = 0.9544997361036416;
    const double z_tol = 3.0 * std::sqrt(z_frac_exact * (1.0 - z_frac_exact) / 2000.0);
    const double shrink_tol = 0.02;
    try {
        const ModelFamily model = normal_mean_family(1.0, 1);
        const Prior prior = independent_prior(model.param_space, {normal_component(0.0, 1.0)});
        GridSpec grid;
        grid.axes = {GridAxis{-8.0, 8.0, 801}};
        const CalibrationStudy study =
            run_calibration_study(model, prior, grid, 2000, RngKey{1007}, nullptr, nullptr, 4);
        std::vector<double> ranks;
        std::size_t z_below = 0;
        for (const CalibrationRecord& r : study.records) {
            ranks.push_back(r.rank[0]);
            if (r.z[0] < 2.0) ++z_below;
        }
        const double chi2 = rank_uniformity_chi2(ranks);
        const double z_frac =
            static_cast<double>(z_below) / static_cast<double>(study.records.size());
        const EyeChart chart = eye_chart_dataset(study);
        const bool pass = chi2 < chi2_bar && std::abs(z_frac - z_frac_exact) < z_tol &&
                          std::abs(chart.median_shrinkage - 0.5) < shrink_tol;
        report(7, "simulation-based calibration uniformity", pass,
               fmt("chi2=%.2f (<%.2f) z_frac=%.4f (0.9545 within %.4f) median_s=%.4f "
                   "(0.5 within %.2f)",
                   chi2, chi2_bar, z_frac, z_tol, chart.median_shrinkage, shrink_tol));
    } catch (const std::exception& e) {
        report(7, "simulation-based calibration uniformity", false, e.what());
    }
}

// 8. Interval-null rate table: operating rates beat the 0.10/0.90 bars and
// match the normal-tail oracle fixed before the build.
void criterion_rope_rates() {
    // Decision boundary |ybar| = 1.6607403, giving these rates in closed form.
    const double fdr_exact = 0.018842040110575574;
    const double tdr_exact = 0.9708874433305428;
    const double fdr_tol = 3.0 * std::sqrt(fdr_exact * (1.0 - fdr_exact) / 2000.0);
    const double tdr_tol = 3.0 * std::sqrt(tdr_exact * (1.0 - tdr_exact) / 2000.0);
    try {
        const ModelFamily model = normal_mean_family(1.0, 2, -60.0, 60.0);
        const Prior prior =
            independent_prior(model.param_space, {normal_component(0.0, 10.0)});
        GridSpec grid;
        grid.axes = {GridAxis{-40.0, 40.0, 2001}};
        const DecisionRule rule = rope_rule(model, prior, grid, 0.5, 0.95);
        RateTableRequest req;
        req.mode = RateTableMode::ConditionalOnPhenom;
        req.n_rep = 2000;
        req.absence_phenom = {0.0};
        req.presence_phenom = {3.0};
        req.theta0 = 0.5;
        req.workers = 4;
        const RateTable table = estimate_rate_table(model, prior, rule, req, RngKey{1008});
        const bool bars = table.fdr() < 0.10 && table.tdr() > 0.90;
        const bool oracle = std::abs(table.fdr() - fdr_exact) < fdr_tol &&
                            std::abs(table.tdr() - tdr_exact) < tdr_tol;
        report(8, "interval-null decision rates", bars && oracle,
               fmt("fdr=%.4f+-%.4f (oracle %.4f within %.4f) tdr=%.4f+-%.4f (oracle %.4f "
                   "within %.4f)",
                   table.fdr(), table.cells[0][1].std_error, fdr_exact, fdr_tol, table.tdr(),
                   table.cells[1][1].std_error, tdr_exact, tdr_tol));
    } catch (const std::exception& e) {
        report(8, "interval-null decision rates", false, e.what());
    }
}

// 9. Evidence-ratio selection between two point models matches the normal
// tail probabilities of its y = 1.5 decision boundary.
void criterion_bayes_factor_rates() {
    const double fdr_exact = 0.06680720126885807;  // P(y > 1.5 | mean 0)
    const double tdr_exact = 0.9331927987311419;   // P(y > 1.5 | mean 3)
    const double tol = 3.0 * std::sqrt(fdr_exact * (1.0 - fdr_exact) / 10000.0);
    try {
        const ModelFamily model = normal_mean_family(1.0, 1, -50.0, 50.0);
        const Prior prior = independent_prior(model.param_space, {normal_component(0.0, 10.0)});
        const Hypothesis absence = point_hypothesis(model, ParamPoint{{0.0}}, 0.5);
        const Hypothesis presence = point_hypothesis(model, ParamPoint{{3.0}}, 0.5);
        const DecisionRule rule = bayes_factor_rule(absence, presence);
        RateTableRequest req;
        req.mode = RateTableMode::ConditionalOnPhenom;
        req.n_rep = 10000;
        req.absence_phenom = {0.0};
        req.presence_phenom = {3.0};
        req.workers = 4;
        const RateTable table = estimate_rate_table(model, prior, rule, req, RngKey{1009});
        const bool pass = std::abs(table.fdr() - fdr_exact) < tol &&
                          std::abs(table.tdr() - tdr_exact) < tol;
        report(9, "evidence-ratio decision rates", pass,
               fmt("fdr=%.4f (oracle %.4f) tdr=%.4f (oracle %.4f) both within %.4f",
                   table.fdr(), fdr_exact, table.tdr(), tdr_exact, tol));
    } catch (const std::exception& e) {
        report(9, "evidence-ratio decision rates", false, e.what());
    }
}

// 10. Posterior limits shrink as 1/sqrt(n); the anchored interval never
// under-covers.
void criterion_limits() {
    const double median_exact = 1.9599639845400545; // times 1/sqrt(n)
    const double rel_tol = 0.15;
    const std::size_t cov_rep = 10000;
    const double cov_floor = 0.95 - 3.0 * std::sqrt(0.95 * 0.05 / 10000.0);
    try {
        bool pass = true;
        std::string detail;
        for (std::size_t n : {1u, 4u, 16u, 100u}) {
            const ModelFamily model = normal_mean_family(1.0, n, 0.0, 8.0);
            const Prior prior =
                independent_prior(model.param_space, {uniform_component(0.0, 8.0)});
            GridSpec grid;
            grid.axes = {GridAxis{0.0, 8.0, 2001}};
            const LimitStudy study =
                limit_sensitivity(model, prior, 0.05, 500, grid, RngKey{1010}, 4);
            const double scaled = study.band.quantiles[2] * std::sqrt(static_cast<double>(n));
            pass = pass && std::abs(scaled - median_exact) / median_exact < rel_tol;
            detail += fmt("%sn=%zu:%.3f", detail.empty() ? "medians*sqrt(n) " : " ", n, scaled);
        }
        const ModelFamily model = normal_mean_family(1.0, 4, 0.0, 100.0);
        for (double truth : {0.0, 0.5, 2.0}) {
            std::vector<unsigned char> hit(cov_rep, 0);
            const RngKey key{1011};
            parallel_for(cov_rep, 4, [&](std::size_t r) {
                RngStream rng = key.stream(r);
                const Observation y = sample_observation(model, ParamPoint{{truth}}, rng);
                hit[r] = anchored_interval(model, y, 0.95).upper >= truth ? 1 : 0;
            });
            std::size_t covered = 0;
            for (unsigned char h : hit) covered += h;
            const double rate = static_cast<double>(covered) / static_cast<double>(cov_rep);
            pass = pass && rate >= cov_floor;
            detail += fmt(" cov(%g)=%.4f", truth, rate);
        }
        report(10, "limit scaling and anchored coverage", pass,
               detail + fmt(" (target %.4f within 15%%, floor %.4f)", median_exact, cov_floor));
    } catch (const std::exception& e) {
        report(10, "limit scaling and anchored coverage", false, e.what());
    }
}

// 11. Out-of-sample score gap above the truth's entropy estimates the
// divergence, which has a closed form of 0.5 here.
void criterion_kl_score() {
    const double kl_exact = 0.5;
    try {
        const std::size_t n = 20000;
        const ModelFamily truth_model = normal_mean_family(1.0, n);
        RngStream rng = RngKey{1012}.stream(0);
        const Observation holdout = sample_observation(truth_model, ParamPoint{{0.0}}, rng);

        const PredictiveDistribution pred = plugin_predictive(truth_model, ParamPoint{{1.0}});
        const PredictiveDistribution truth = plugin_predictive(truth_model, ParamPoint{{0.0}});
        // Per-row log ratio gives the score gap and its standard error in one
        // pass.
        std::vector<double> ratio(n);
        for (std::size_t i = 0; i < n; ++i)
            ratio[i] = truth.row_log_density(holdout.row(i)) -
                       pred.row_log_density(holdout.row(i));
        const MeanSd gap = mean_sd(ratio);
        const double gap_se = gap.sd / std::sqrt(static_cast<double>(n));

        const ScoreEstimate kl =
            kl_divergence_mc(truth_model, ParamPoint{{0.0}}, pred, n, RngKey{1013});
        const double combined = 3.0 * std::sqrt(gap_se * gap_se + kl.std_error * kl.std_error);
        const bool pass = std::abs(gap.mean - kl.value) < combined &&
                          std::abs(kl.value - kl_exact) < 3.0 * kl.std_error;
        report(11, "score gap equals divergence", pass,
               fmt("score_gap=%.4f kl_mc=%.4f (closed form 0.5) combined tol %.4f", gap.mean,
                   kl.value, combined));
    } catch (const std::exception& e) {
        report(11, "score gap equals divergence", false, e.what());
    }
}

// 12. Byte-identical outputs across reruns and worker counts for every study
// kind.
const char* kReproConfigs[][2] = {
    {"sbc", R"({"kind":"sbc","seed":5,"n_rep":40,
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":1,"mu_lo":-40,"mu_hi":40},
      "prior":{"components":[{"kind":"normal","mean":0.0,"sd":1.0}]},
      "grid":{"axes":[{"lo":-8.0,"hi":8.0,"nodes":201}]}})"},
    {"power", R"({"kind":"power","seed":5,"n_rep":400,"alpha":0.95,
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":2,"mu_lo":-40,"mu_hi":40},
      "theta_null":[0.0],"phenom_values":[0.0,1.0,2.0]})"},
    {"coverage", R"({"kind":"coverage","seed":5,"n_rep":400,"level":0.9,
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":2,"mu_lo":-40,"mu_hi":40},
      "theta_values":[-1.0,0.0,1.0]})"},
    {"minimax", R"({"kind":"minimax","seed":5,"n_rep":400,
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":1,"mu_lo":-40,"mu_hi":40},
      "factors":[0.0,0.5,1.0],"theta_values":[-1.0,0.0,1.0]})"},
    {"discovery", R"({"kind":"discovery","seed":5,"n_rep":400,"mode":"conditional",
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":2,"mu_lo":-60,"mu_hi":60},
      "prior":{"components":[{"kind":"normal","mean":0.0,"sd":10.0}]},
      "absence_phenom":[0.0],"presence_phenom":[3.0],
      "rule":{"kind":"nhst","alpha":0.95,"theta_null":[0.0]}})"},
    {"limits", R"({"kind":"limits","seed":5,"n_rep":60,"alpha":0.05,
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":4,"mu_lo":0.0,"mu_hi":8.0},
      "prior":{"components":[{"kind":"uniform","lo":0.0,"hi":8.0}]},
      "grid":{"axes":[{"lo":0.0,"hi":8.0,"nodes":501}]}})"},
    {"predictive", R"({"kind":"predictive","seed":5,"n_holdout":100,"n_mc_kl":500,
      "model":{"name":"normal_mean","sigma":1.0,"n_obs":10,"mu_lo":-40,"mu_hi":40},
      "theta_true":[0.0],
      "hypotheses":[{"label":"null","point":[0.0],
        "model":{"name":"normal_mean","sigma":1.0,"n_obs":10,"mu_lo":-40,"mu_hi":40}}]})"},
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

bool csv_outputs_identical(const fs::path& a, const fs::path& b) {
    std::size_t compared = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".csv") continue;
        ++compared;
        if (slurp(entry.path()) != slurp(b / entry.path().filename())) return false;
    }
    return compared > 0;
}

void criterion_reproducibility() {
    try {
        const fs::path root = fs::temp_directory_path() / "calib_acceptance_repro";
        fs::remove_all(root);
        fs::create_directories(root);
        bool pass = true;
        std::string detail;
        for (const auto& [kind, text] : kReproConfigs) {
            const fs::path cfg_path = root / (std::string(kind) + ".json");
            std::ofstream(cfg_path) << text;
            const fs::path d1 = root / (std::string(kind) + "_w1");
            const fs::path d4 = root / (std::string(kind) + "_w4");
            const fs::path d4b = root / (std::string(kind) + "_w4_rerun");
            cli::Overrides o1, o4, o4b;
            o1.workers = 1u;
            o1.out_dir = d1.string();
            o4.workers = 4u;
            o4.out_dir = d4.string();
            o4b.workers = 4u;
            o4b.out_dir = d4b.string();
            bool ok = cli::run_study(cfg_path.string(), o1) == cli::kExitOk &&
                      cli::run_study(cfg_path.string(), o4) == cli::kExitOk &&
                      cli::run_study(cfg_path.string(), o4b) == cli::kExitOk;
            ok = ok && csv_outputs_identical(d1, d4) && csv_outputs_identical(d4, d4b);
            pass = pass && ok;
            detail += fmt("%s%s:%s", detail.empty() ? "" : " ", kind, ok ? "ok" : "DIFF");
        }
        report(12, "byte-identical reproducibility", pass, detail);
    } catch (const std::exception& e) {
        report(12, "byte-identical reproducibility", false, e.what());
    }
}

} // namespace

int main() {
    criterion_nhst_fdr();
    criterion_power_oracle();
    criterion_wilks();
    criterion_coverage();
    criterion_minimax();
    criterion_grid_accuracy();
    criterion_sbc();
    criterion_rope_rates();
    criterion_bayes_factor_rates();
    criterion_limits();
    criterion_kl_score();
    criterion_reproducibility();
    if (failures == 0)
        std::printf("all 12 acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures;
}
