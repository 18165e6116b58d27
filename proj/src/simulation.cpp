#include "disagg/simulation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "disagg/aggregation.hpp"
#include "disagg/csv.hpp"

namespace disagg {

void SimulationConfig::validate() const {
    if (setting < 1 || setting > 4) throw std::invalid_argument("simulation setting must be 1..4");
    if (study != 1 && study != 2) throw std::invalid_argument("simulation study must be 1 or 2");
    if (T < 5) throw std::invalid_argument("simulation needs T >= 5 for 5-year records");
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
    if (study == 1 && !(obs_logit_sd >= 0.0)) throw std::invalid_argument("obs_logit_sd must be >= 0");
    if (study == 2 && !(design_effect >= 1.0))
        throw std::invalid_argument("design_effect must be >= 1");
    if (study == 2 && srs_m < 1) throw std::invalid_argument("srs_m must be >= 1");
    gp.validate();
}

std::string sim_tract_id(int row, int col) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t%02d%02d", row + 1, col + 1);
    return buf;
}

namespace {

ArealUnit square_unit(const std::string& id, AreaLevel level, double x0, double y0, double x1,
                      double y1) {
    ArealUnit u;
    u.area_id = id;
    u.level = level;
    u.rings = {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}}};
    u.centroid = {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
    return u;
}

std::string sim_puma_id(int row, int col) {
    const int region = (row / 5) * 2 + (col / 5);
    return "p" + std::to_string(region + 1);
}

std::string sim_county_id(const SimulationConfig& cfg, int row, int col) {
    if (cfg.county_layout == SimulationConfig::CountyLayout::regions)
        return "c" + sim_puma_id(row, col).substr(1);
    const int idx = (row / 2) * 5 + (col / 2);
    char buf[8];
    std::snprintf(buf, sizeof(buf), "c%02d", idx + 1);
    return buf;
}

}  // namespace

ArealHierarchy make_sim_hierarchy(const SimulationConfig& cfg) {
    cfg.validate();
    ArealHierarchy h;
    const double tract_pop = 1000.0;
    for (int row = 0; row < kSimGridSide; ++row)
        for (int col = 0; col < kSimGridSide; ++col) {
            const std::string id = sim_tract_id(row, col);
            h.tracts[id] = square_unit(id, AreaLevel::tract, col, row, col + 1, row + 1);
            h.tract_to_puma[id] = sim_puma_id(row, col);
            h.tract_to_county[id] = sim_county_id(cfg, row, col);
            for (int t = 1; t <= cfg.T; ++t) h.populations[{id, t}] = tract_pop;
        }
    for (int pr = 0; pr < 2; ++pr)
        for (int pc = 0; pc < 2; ++pc) {
            const std::string id = "p" + std::to_string(pr * 2 + pc + 1);
            h.pumas[id] = square_unit(id, AreaLevel::puma, pc * 5.0, pr * 5.0, pc * 5.0 + 5.0,
                                      pr * 5.0 + 5.0);
            for (int t = 1; t <= cfg.T; ++t) h.populations[{id, t}] = 25.0 * tract_pop;
        }
    return h;
}

Eigen::MatrixXd gen_true_proportions(const SimulationConfig& cfg, Rng& rng) {
    cfg.validate();
    const int G = kSimTracts;
    // grid centroids in sorted tract-id order, which is row-major
    std::vector<Point> cent(G);
    for (int row = 0; row < kSimGridSide; ++row)
        for (int col = 0; col < kSimGridSide; ++col)
            cent[row * kSimGridSide + col] = {col + 0.5, row + 0.5};

    Eigen::VectorXd x(G);
    for (int g = 0; g < G; ++g) x(g) = rng.normal(0.0, cfg.covariate_sd);

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(G);
    if (cfg.setting == 2 || cfg.setting == 4) {
        Eigen::MatrixXd cov(G, G);
        for (int a = 0; a < G; ++a)
            for (int b = a; b < G; ++b) {
                const double v =
                    matern_cov(std::hypot(cent[a].x - cent[b].x, cent[a].y - cent[b].y), cfg.gp);
                cov(a, b) = v;
                cov(b, a) = v;
            }
        cov.diagonal().array() += 1e-10;
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("simulation: spatial covariance not positive definite");
        Eigen::VectorXd z(G);
        for (int g = 0; g < G; ++g) z(g) = rng.normal();
        lambda = llt.matrixL() * z;
    }

    Eigen::MatrixXd pi(cfg.T, G);
    const bool trend = cfg.setting == 3 || cfg.setting == 4;
    for (int t = 1; t <= cfg.T; ++t)
        for (int g = 0; g < G; ++g) {
            double lin = x(g) + lambda(g) + rng.normal(0.0, cfg.noise_sd);
            if (trend) lin += cfg.trend_a0 + cfg.trend_a1 * t;
            pi(t - 1, g) = expit(lin);
        }
    return pi;
}

std::vector<SurveyEstimate> gen_observed(const SimulationConfig& cfg,
                                         const Eigen::MatrixXd& truths, Rng& rng) {
    cfg.validate();
    if (truths.rows() != cfg.T || truths.cols() != kSimTracts)
        throw std::invalid_argument("gen_observed: truth array has the wrong shape");
    const int G = kSimTracts, T = cfg.T;

    // per-cell logit noise variance and the delta-method variance of the
    // resulting estimate around the truth
    Eigen::MatrixXd z1(T, G), dvar(T, G);
    for (int t = 0; t < T; ++t)
        for (int g = 0; g < G; ++g) {
            const double pi = truths(t, g);
            double v;
            if (cfg.study == 1) {
                v = cfg.obs_logit_sd * cfg.obs_logit_sd;
            } else {
                v = logit_noise_variance(pi, {cfg.design_effect, cfg.srs_m});
            }
            z1(t, g) = expit(logit(pi) + rng.normal(0.0, std::sqrt(v)));
            const double slope = pi * (1.0 - pi);
            dvar(t, g) = v * slope * slope;
        }

    std::vector<SurveyEstimate> out;
    // 5-year tract estimates for windows fully inside [1, T]
    for (int t = 5; t <= T; ++t)
        for (int row = 0; row < kSimGridSide; ++row)
            for (int col = 0; col < kSimGridSide; ++col) {
                const int g = row * kSimGridSide + col;
                double zsum = 0.0, vsum = 0.0;
                for (int k = t - 4; k <= t; ++k) {
                    zsum += z1(k - 1, g);
                    vsum += dvar(k - 1, g);
                }
                SurveyEstimate e;
                e.area_id = sim_tract_id(row, col);
                e.period_len = 5;
                e.end_year = t;
                e.estimate = zsum / 5.0;
                e.std_error = std::sqrt(vsum / 25.0);
                if (cfg.study == 2) e.raw_sample_size = 5 * cfg.srs_m;
                out.push_back(std::move(e));
            }

    // 1-year region estimates for every t (equal populations)
    for (int t = 1; t <= T; ++t)
        for (int region = 0; region < 4; ++region) {
            double zsum = 0.0, vsum = 0.0;
            for (int row = 0; row < kSimGridSide; ++row)
                for (int col = 0; col < kSimGridSide; ++col) {
                    if ((row / 5) * 2 + (col / 5) != region) continue;
                    const int g = row * kSimGridSide + col;
                    zsum += z1(t - 1, g);
                    vsum += dvar(t - 1, g);
                }
            SurveyEstimate e;
            e.area_id = "p" + std::to_string(region + 1);
            e.period_len = 1;
            e.end_year = t;
            e.estimate = zsum / 25.0;
            e.std_error = std::sqrt(vsum / 625.0);
            if (cfg.study == 2) e.raw_sample_size = 25 * cfg.srs_m;
            out.push_back(std::move(e));
        }
    return out;
}

double StudyResult::overall(const std::vector<double>& per_t) const {
    double s = 0.0;
    for (double v : per_t) s += v;
    return per_t.empty() ? 0.0 : s / static_cast<double>(per_t.size());
}

StudyResult run_study(const SimulationConfig& cfg, const StudyFitConfig& fit, ModelChoice model) {
    cfg.validate();
    fit.priors.validate();
    const ArealHierarchy h = make_sim_hierarchy(cfg);
    const ModelFrame frame = make_frame(h, 1, cfg.T);
    const int G = frame.n_tracts(), T = frame.T;

    const Rect domain{0.0, 0.0, 10.0, 10.0};
    const KnotTree tree = build_knot_tree(domain, fit.M, fit.J, fit.r);
    std::vector<QuadratureSet> quads;
    quads.reserve(G);
    for (const auto& id : frame.tract_ids)
        quads.push_back(quadrature_points(h.tracts.at(id), fit.q, mix_seed(cfg.seed, 0x71)));

    StudyResult res;
    res.cov95_pt.assign(T, 0.0);
    res.cov50_pt.assign(T, 0.0);
    res.cov95_joint.assign(T, 0.0);
    res.cov50_joint.assign(T, 0.0);
    res.mse.assign(T, 0.0);
    res.mae.assign(T, 0.0);
    res.msre.assign(T, 0.0);
    res.mare.assign(T, 0.0);

    for (int rep = 0; rep < cfg.replicates; ++rep) {
        try {
            Rng gen_rng(mix_seed(cfg.seed, 0xda7a, rep));
            const Eigen::MatrixXd truth = gen_true_proportions(cfg, gen_rng);
            const auto ests = gen_observed(cfg, truth, gen_rng);
            const auto obs = assemble_observations(
                ests, h, frame, fit.eps,
                model == ModelChoice::proposed ? CountMode::effective : CountMode::raw);

            McmcOptions opt;
            opt.iters = fit.iters;
            opt.burnin = fit.burnin;
            opt.thin = fit.thin;
            opt.seed = mix_seed(cfg.seed, 0xf17, rep);
            opt.jitter = fit.jitter;
            Sampler sampler(frame, obs, tree, quads, fit.priors, opt);
            const PosteriorDraws draws = sampler.run();

            const int n = draws.n_draws();
            for (int t = 0; t < T; ++t) {
                std::vector<double> est_mean(G), tr(G);
                std::vector<Interval> ci95(G), ci50(G);
                Eigen::MatrixXd sub(n, G);
                for (int g = 0; g < G; ++g) {
                    const int col = g * T + t;
                    sub.col(g) = draws.pi.col(col);
                    std::vector<double> dcol(draws.pi.col(col).data(),
                                             draws.pi.col(col).data() + n);
                    est_mean[g] = mean_of(dcol);
                    ci95[g] = pointwise_ci(dcol, 0.95);
                    ci50[g] = pointwise_ci(dcol, 0.50);
                    tr[g] = truth(t, g);
                }
                res.cov95_pt[t] += coverage(ci95, tr);
                res.cov50_pt[t] += coverage(ci50, tr);
                const auto band95 = joint_band(sub, 0.95);
                const auto band50 = joint_band(sub, 0.50);
                res.cov95_joint[t] += coverage(band95, tr) == 1.0 ? 1.0 : 0.0;
                res.cov50_joint[t] += coverage(band50, tr) == 1.0 ? 1.0 : 0.0;
                const auto em = error_metrics(est_mean, tr);
                res.mse[t] += em.mse;
                res.mae[t] += em.mae;
                res.msre[t] += em.msre;
                res.mare[t] += em.mare;
            }
            res.replicates_used += 1;
        } catch (const std::exception&) {
            res.replicates_failed += 1;
        }
    }

    if (res.replicates_used == 0) throw std::runtime_error("run_study: every replicate failed");
    const double n = static_cast<double>(res.replicates_used);
    for (auto* v : {&res.cov95_pt, &res.cov50_pt, &res.cov95_joint, &res.cov50_joint, &res.mse,
                    &res.mae, &res.msre, &res.mare})
        for (double& x : *v) x /= n;
    return res;
}

void write_study_csv(const std::string& path, const StudyResult& res,
                     const std::vector<std::string>& comments) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t t = 0; t < res.mse.size(); ++t)
        rows.push_back({std::to_string(t + 1), fmt_double(res.cov95_pt[t]),
                        fmt_double(res.cov50_pt[t]), fmt_double(res.cov95_joint[t]),
                        fmt_double(res.cov50_joint[t]), fmt_double(res.mse[t]),
                        fmt_double(res.mae[t]), fmt_double(res.msre[t]), fmt_double(res.mare[t])});
    auto all_comments = comments;
    all_comments.push_back("# replicates_used=" + std::to_string(res.replicates_used) +
                           " replicates_failed=" + std::to_string(res.replicates_failed));
    write_csv(path, all_comments,
              {"t", "cov95_pointwise", "cov50_pointwise", "cov95_joint", "cov50_joint", "mse",
               "mae", "msre", "mare"},
              rows);
}

}  // namespace disagg
