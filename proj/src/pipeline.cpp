#include "disagg/pipeline.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "disagg/aggregation.hpp"
#include "disagg/common.hpp"
#include "disagg/csv.hpp"
#include "disagg/diagnostics.hpp"
#include "disagg/mcmc.hpp"
#include "disagg/model.hpp"
#include "disagg/simulation.hpp"

namespace disagg::cli {

namespace {

namespace fs = std::filesystem;

std::string provenance(const Config& cfg, std::uint64_t seed) {
    return "# config=" + to_hex(cfg.fingerprint()) + " seed=" + std::to_string(seed);
}

SimulationConfig sim_config_from(const Config& cfg) {
    SimulationConfig sc;
    sc.setting = static_cast<int>(cfg.get_long("sim.setting", 1));
    sc.study = static_cast<int>(cfg.get_long("sim.study", 1));
    sc.T = static_cast<int>(cfg.get_long("sim.T", 10));
    sc.replicates = static_cast<int>(cfg.get_long("sim.replicates", 30));
    sc.noise_sd = cfg.get_double("sim.noise_sd", 0.2);
    sc.trend_a0 = cfg.get_double("sim.trend_a0", -1.0);
    sc.trend_a1 = cfg.get_double("sim.trend_a1", 0.2);
    sc.gp.sigma2 = cfg.get_double("sim.gp_sigma2", 1.0);
    sc.gp.phi = cfg.get_double("sim.gp_phi", 0.5);
    sc.gp.nu = cfg.get_double("sim.gp_nu", 1.0);
    sc.obs_logit_sd = cfg.get_double("sim.obs_logit_sd", 0.15);
    sc.design_effect = cfg.get_double("sim.design_effect", 2.0);
    sc.srs_m = cfg.get_long("sim.srs_m", 100);
    const std::string layout = cfg.get_str("sim.county_layout", "regions");
    if (layout == "regions")
        sc.county_layout = SimulationConfig::CountyLayout::regions;
    else if (layout == "grid2x2")
        sc.county_layout = SimulationConfig::CountyLayout::grid2x2;
    else
        throw std::invalid_argument("sim.county_layout must be regions or grid2x2");
    sc.seed = static_cast<std::uint64_t>(cfg.get_long("seed", 1));
    return sc;
}

Priors priors_from(const Config& cfg) {
    Priors p;
    p.tau2_shape = cfg.get_double("priors.tau2_shape", 2.0);
    p.tau2_rate = cfg.get_double("priors.tau2_rate", 1.0);
    p.tauC2_shape = cfg.get_double("priors.tauC2_shape", 2.0);
    p.tauC2_rate = cfg.get_double("priors.tauC2_rate", 1.0);
    p.sigma2_shape = cfg.get_double("priors.sigma2_shape", 2.0);
    p.sigma2_rate = cfg.get_double("priors.sigma2_rate", 1.0);
    p.phi_shape = cfg.get_double("priors.phi_shape", 1.0);
    p.phi_rate = cfg.get_double("priors.phi_rate", 1.0);
    p.nu_lo = cfg.get_double("priors.nu_lo", 0.0);
    p.nu_hi = cfg.get_double("priors.nu_hi", 2.0);
    p.alpha_lo = cfg.get_double("priors.alpha_lo", 0.0);
    p.alpha_hi = cfg.get_double("priors.alpha_hi", 1.0);
    p.validate();
    return p;
}

}  // namespace

int cmd_simulate(const Config& cfg, const CommonOverrides& ov) {
    try {
        SimulationConfig sc = sim_config_from(cfg);
        if (ov.seed) sc.seed = *ov.seed;
        sc.validate();
        const std::string dir = ov.out_dir.value_or(cfg.get_str("paths.out_dir", "."));
        fs::create_directories(dir);
        const std::string prov = provenance(cfg, sc.seed);

        const ArealHierarchy h = make_sim_hierarchy(sc);
        Rng rng(mix_seed(sc.seed, 0xda7a, 0));
        const Eigen::MatrixXd truth = gen_true_proportions(sc, rng);
        const auto ests = gen_observed(sc, truth, rng);

        write_estimates_csv(dir + "/estimates.csv", ests, {prov});
        write_hierarchy_csv(dir + "/hierarchy.csv", h, {prov});
        write_populations_csv(dir + "/population.csv", h, {prov});
        std::vector<ArealUnit> units;
        for (const auto& [id, u] : h.tracts) units.push_back(u);
        for (const auto& [id, u] : h.pumas) units.push_back(u);
        write_geometry_json(dir + "/geometry.json", units);

        // held-out truth per (tract, year)
        {
            std::vector<std::vector<std::string>> rows;
            for (int row = 0; row < kSimGridSide; ++row)
                for (int col = 0; col < kSimGridSide; ++col)
                    for (int t = 1; t <= sc.T; ++t)
                        rows.push_back({sim_tract_id(row, col), std::to_string(t),
                                        fmt_double_full(truth(t - 1, row * kSimGridSide + col))});
            write_csv(dir + "/truth.csv", {prov}, {"tract_id", "year", "pi_true"}, rows);
        }

        // 3-year county supports and their aggregated held-out truths
        {
            std::vector<SupportSpec> specs;
            std::vector<std::vector<std::string>> truth_rows;
            const ModelFrame frame = make_frame(h, 1, sc.T);
            for (const auto& county : h.county_ids())
                for (int end = 3; end <= sc.T; ++end) {
                    SupportSpec spec = county_3yr_support(h, county, end, 1, sc.T);
                    double val = 0.0;
                    for (const auto& cell : spec.cells) {
                        const int g = frame.tract_index(cell.tract_id);
                        val += cell.weight * truth(cell.year - 1, g);
                    }
                    truth_rows.push_back({spec.name, fmt_double_full(val)});
                    specs.push_back(std::move(spec));
                }
            write_supports_csv(dir + "/supports_3yr_county.csv", specs, {prov});
            write_csv(dir + "/truth_supports.csv", {prov}, {"support_name", "truth"}, truth_rows);
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_fit(const Config& cfg, const CommonOverrides& ov) {
    ModelFrame frame;
    std::vector<ModelObservation> obs;
    KnotTree tree;
    std::vector<QuadratureSet> quads;
    Priors priors;
    McmcOptions opt;
    std::string dir;
    long ess_floor = 0;
    std::string prov;

    try {
        const std::string est_path = cfg.require_str("paths.estimates");
        const std::string hier_path = cfg.require_str("paths.hierarchy");
        const std::string pop_path = cfg.require_str("paths.population");
        const std::string geom_path = cfg.require_str("paths.geometry");
        dir = ov.out_dir.value_or(cfg.get_str("paths.out_dir", "."));
        fs::create_directories(dir);

        ArealHierarchy h;
        for (auto& u : load_geometry_json(geom_path)) {
            if (u.level == AreaLevel::tract)
                h.tracts[u.area_id] = std::move(u);
            else if (u.level == AreaLevel::puma)
                h.pumas[u.area_id] = std::move(u);
        }
        load_hierarchy_csv(hier_path, h);
        load_populations_csv(pop_path, h);
        const auto problems = validate_hierarchy(h);
        if (!problems.empty()) {
            for (const auto& p : problems) std::cerr << "fit: invalid hierarchy: " << p << "\n";
            return kExitInput;
        }

        const auto ests = load_estimates_csv(est_path);
        if (ests.empty()) {
            std::cerr << "fit: no estimates\n";
            return kExitInput;
        }
        int year0 = std::numeric_limits<int>::max(), year1 = std::numeric_limits<int>::min();
        for (const auto& e : ests) {
            year0 = std::min(year0, e.end_year - e.period_len + 1);
            year1 = std::max(year1, e.end_year);
        }
        year0 = static_cast<int>(cfg.get_long("model.year0", year0));
        year1 = static_cast<int>(cfg.get_long("model.year1", year1));
        frame = make_frame(h, year0, year1);

        const CountMode mode = ov.model == "standard-binomial" ? CountMode::raw
                                                               : CountMode::effective;
        const double eps = cfg.get_double("model.eps", kDefaultClampEps);
        obs = assemble_observations(ests, h, frame, eps, mode);

        // knot tree over the tract geometry bounding box
        Point lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
        Point hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
        for (const auto& [id, u] : h.tracts) {
            Point a, b;
            u.bounding_box(a, b);
            lo.x = std::min(lo.x, a.x);
            lo.y = std::min(lo.y, a.y);
            hi.x = std::max(hi.x, b.x);
            hi.y = std::max(hi.y, b.y);
        }
        tree = build_knot_tree({lo.x, lo.y, hi.x, hi.y},
                               static_cast<int>(cfg.get_long("model.M", 2)),
                               static_cast<int>(cfg.get_long("model.J", 4)),
                               static_cast<int>(cfg.get_long("model.r", 9)));
        const int q = static_cast<int>(cfg.get_long("model.q", 16));
        const std::uint64_t quad_seed = static_cast<std::uint64_t>(cfg.get_long("model.quad_seed", 20177));
        for (const auto& id : frame.tract_ids)
            quads.push_back(quadrature_points(h.tracts.at(id), q, quad_seed));

        priors = priors_from(cfg);
        opt.iters = cfg.get_long("mcmc.iters", 10000);
        opt.burnin = cfg.get_long("mcmc.burnin", 2000);
        opt.thin = cfg.get_long("mcmc.thin", 5);
        opt.seed = ov.seed ? *ov.seed : static_cast<std::uint64_t>(cfg.get_long("mcmc.seed", 1));
        opt.chains = ov.chains ? *ov.chains : static_cast<int>(cfg.get_long("mcmc.chains", 1));
        opt.jitter = cfg.get_double("model.jitter", 1e-8);
        opt.tn_exact_max = cfg.get_long("mcmc.tn_exact_max", 10000);
        opt.update_phi_nu = !cfg.get_bool("mcmc.fix_covariance", false);
        opt.init_phi = cfg.get_double("mcmc.init_phi", 1.0);
        opt.init_nu = cfg.get_double("mcmc.init_nu", 1.0);
        opt.config_fingerprint = cfg.fingerprint();
        ess_floor = cfg.get_long("mcmc.ess_floor", 1000);
        prov = provenance(cfg, opt.seed);
    } catch (const std::exception& e) {
        std::cerr << "fit: " << e.what() << "\n";
        return kExitInput;
    }

    try {
        const PosteriorDraws draws = run_chain(frame, obs, tree, quads, priors, opt);
        save_draws(dir + "/draws.bin", draws);
        write_summary_csv(dir + "/summary.csv", draws);
        write_acceptance_log_csv(dir + "/mh_log.csv", draws);

        std::vector<std::string> low;
        for (const auto& name : draws.scalar_names) {
            const double ess = chain_ess(draws.scalar_draws(name));
            if (ess < static_cast<double>(ess_floor)) low.push_back(name);
        }
        if (!low.empty()) {
            std::cerr << "fit: chain ESS below " << ess_floor << " for:";
            for (const auto& n : low) std::cerr << " " << n;
            std::cerr << "\n";
            return kExitEss;
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "fit: sampler aborted: " << e.what() << "\n";
        return kExitSampler;
    }
}

int cmd_predict(const std::string& draws_path, const std::string& supports_path,
                const std::string& out_path) {
    try {
        const PosteriorDraws draws = load_draws(draws_path);
        const auto specs = load_supports_csv(supports_path);
        std::vector<std::vector<std::string>> rows;
        for (const auto& spec : specs) {
            const auto d = custom_support(draws, spec);
            std::vector<double> sorted(d);
            std::sort(sorted.begin(), sorted.end());
            rows.push_back({spec.name, fmt_double(mean_of(d)), fmt_double(sd_of(d)),
                            fmt_double(quantile_sorted(sorted, 0.025)),
                            fmt_double(quantile_sorted(sorted, 0.975)),
                            fmt_double(quantile_sorted(sorted, 0.25)),
                            fmt_double(quantile_sorted(sorted, 0.75))});
        }
        write_csv(out_path,
                  {"# config=" + to_hex(draws.config_fingerprint) +
                   " seed=" + std::to_string(draws.seed)},
                  {"support_name", "mean", "sd", "q025", "q975", "q25", "q75"}, rows);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "predict: " << e.what() << "\n";
        return kExitInput;
    }
}

int cmd_validate(const std::string& predictions_path, const std::string& truth_path,
                 const std::string& out_path, const std::string& label) {
    try {
        const CsvTable pred = read_csv(predictions_path);
        const CsvTable truth = read_csv(truth_path);
        const auto p_name = pred.col("support_name");
        const auto p_mean = pred.col("mean");
        const auto p_lo95 = pred.col("q025");
        const auto p_hi95 = pred.col("q975");
        const auto p_lo50 = pred.col_opt("q25");
        const auto p_hi50 = pred.col_opt("q75");
        const auto t_name = truth.col("support_name");
        const auto t_val = truth.col_opt("truth") != CsvTable::npos ? truth.col("truth")
                                                                    : truth.col("value");

        std::map<std::string, double> truth_by_name;
        for (const auto& r : truth.rows) truth_by_name[r[t_name]] = std::stod(r[t_val]);

        double bias = 0.0, mspe = 0.0, mape = 0.0;
        long in50 = 0, in95 = 0, n = 0;
        const bool have50 = p_lo50 != CsvTable::npos && p_hi50 != CsvTable::npos;
        for (const auto& r : pred.rows) {
            auto it = truth_by_name.find(r[p_name]);
            if (it == truth_by_name.end())
                throw std::invalid_argument("no truth record for support " + r[p_name]);
            const double tr = it->second;
            const double err = std::stod(r[p_mean]) - tr;
            bias += err;
            mspe += err * err;
            mape += std::fabs(err);
            if (tr >= std::stod(r[p_lo95]) && tr <= std::stod(r[p_hi95])) ++in95;
            if (have50 && tr >= std::stod(r[p_lo50]) && tr <= std::stod(r[p_hi50])) ++in50;
            ++n;
        }
        if (n == 0) throw std::invalid_argument("no predictions to validate");
        const double dn = static_cast<double>(n);
        std::vector<std::string> row{label,
                                     std::to_string(n),
                                     fmt_double(bias / dn),
                                     fmt_double(mspe / dn),
                                     fmt_double(mape / dn),
                                     have50 ? fmt_double(static_cast<double>(in50) / dn) : "nan",
                                     fmt_double(static_cast<double>(in95) / dn)};
        write_csv(out_path, {},
                  {"model", "n_supports", "bias", "mspe", "mape", "coverage_50", "coverage_95"},
                  {row});
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "validate: " << e.what() << "\n";
        return kExitInput;
    }
}

namespace {

// truncated normal on [0,1] centred at the survey estimate
double truncnorm01_pdf(double x, double m, double s) {
    if (x < 0.0 || x > 1.0) return 0.0;
    const double z = norm_cdf((1.0 - m) / s) - norm_cdf((0.0 - m) / s);
    return norm_pdf((x - m) / s) / (s * z);
}

}  // namespace

int cmd_summarize(const std::string& draws_path, const std::string& targets,
                  const std::string& out_dir, const std::string& estimates_path) {
    try {
        const PosteriorDraws draws = load_draws(draws_path);
        fs::create_directories(out_dir);
        std::vector<SurveyEstimate> ests;
        if (!estimates_path.empty()) ests = load_estimates_csv(estimates_path);

        std::vector<std::string> target_list;
        {
            std::string cur;
            for (char c : targets + ",") {
                if (c == ',') {
                    if (!cur.empty()) target_list.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
        }
        if (target_list.empty()) throw std::invalid_argument("no targets given");

        std::vector<std::vector<std::string>> dens_rows, hist_rows;
        for (const auto& target : target_list) {
            std::vector<std::string> parts;
            std::string cur;
            for (char c : target + ":") {
                if (c == ':') {
                    parts.push_back(cur);
                    cur.clear();
                } else {
                    cur.push_back(c);
                }
            }
            std::vector<double> d;
            bool on_unit_interval = true;
            const SurveyEstimate* ref = nullptr;
            if (parts.size() == 3 && parts[0] == "pi") {
                d = draws.pi_draws(parts[1], std::stoi(parts[2]));
            } else if (parts.size() == 3 && parts[0] == "avg5") {
                SupportSpec spec;
                spec.name = target;
                const int end = std::stoi(parts[2]);
                for (int y = end - 4; y <= end; ++y) spec.cells.push_back({parts[1], y, 0.2});
                d = custom_support(draws, spec);
                for (const auto& e : ests)
                    if (e.area_id == parts[1] && e.period_len == 5 && e.end_year == end) ref = &e;
            } else if (parts.size() == 2 && parts[0] == "param") {
                d = draws.scalar_draws(parts[1]);
                on_unit_interval = false;
            } else {
                throw std::invalid_argument("unknown target " + target +
                                            " (use pi:<tract>:<year>, avg5:<tract>:<end_year>, "
                                            "param:<name>)");
            }

            double glo = 0.0, ghi = 1.0;
            if (!on_unit_interval) {
                glo = *std::min_element(d.begin(), d.end());
                ghi = *std::max_element(d.begin(), d.end());
                const double pad = 0.05 * std::max(ghi - glo, 1e-12);
                glo -= pad;
                ghi += pad;
            }

            // Gaussian KDE with Silverman bandwidth on a fixed grid
            const double sd = sd_of(d);
            const double bw = std::max(1.06 * sd * std::pow(static_cast<double>(d.size()), -0.2),
                                       1e-6 * (ghi - glo) + 1e-12);
            const int grid_n = 201;
            for (int i = 0; i < grid_n; ++i) {
                const double x = glo + (ghi - glo) * i / (grid_n - 1);
                double kde = 0.0;
                for (double v : d) kde += norm_pdf((x - v) / bw);
                kde /= bw * static_cast<double>(d.size());
                std::string refv = "";
                if (ref) refv = fmt_double(truncnorm01_pdf(x, ref->estimate, ref->std_error));
                dens_rows.push_back({target, fmt_double(x), fmt_double(kde), refv});
            }

            const int bins = 50;
            std::vector<long> counts(bins, 0);
            for (double v : d) {
                int b = static_cast<int>((v - glo) / (ghi - glo) * bins);
                b = std::clamp(b, 0, bins - 1);
                counts[b] += 1;
            }
            for (int b = 0; b < bins; ++b) {
                const double lo = glo + (ghi - glo) * b / bins;
                const double hi = glo + (ghi - glo) * (b + 1) / bins;
                hist_rows.push_back({target, fmt_double(lo), fmt_double(hi),
                                     std::to_string(counts[b]),
                                     fmt_double(static_cast<double>(counts[b]) / d.size())});
            }
        }
        const std::string prov = "# config=" + to_hex(draws.config_fingerprint) +
                                 " seed=" + std::to_string(draws.seed);
        write_csv(out_dir + "/density.csv", {prov}, {"target", "x", "kde", "truncnorm_ref"},
                  dens_rows);
        write_csv(out_dir + "/hist.csv", {prov}, {"target", "bin_lo", "bin_hi", "count", "freq"},
                  hist_rows);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "summarize: " << e.what() << "\n";
        return kExitInput;
    }
}

}  // namespace disagg::cli
