#include "disagg/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "disagg/common.hpp"

namespace disagg {

namespace {

// clamp the probit-scale predictor so Phi stays inside (0,1)
constexpr double kLpClamp = 37.0;

double safe_phi(double lp) {
    return norm_cdf(std::clamp(lp, -kLpClamp, kLpClamp));
}

}  // namespace

Sampler::Sampler(ModelFrame frame, std::vector<ModelObservation> obs, KnotTree tree,
                 std::vector<QuadratureSet> quads, Priors priors, McmcOptions opt)
    : frame_(std::move(frame)),
      obs_(std::move(obs)),
      tree_(std::move(tree)),
      quads_(std::move(quads)),
      priors_(priors),
      opt_(opt),
      rng_(opt.seed) {
    priors_.validate();
    if (static_cast<int>(quads_.size()) != frame_.n_tracts())
        throw std::invalid_argument("sampler: one quadrature set per tract required");
    if (opt_.burnin >= opt_.iters) throw std::invalid_argument("sampler: burnin >= iters");
    for (const auto& o : obs_) {
        if (o.enc < 0 || o.enc > o.ess)
            throw std::invalid_argument("sampler: counts out of range for " + o.area_id);
        double w = 0.0;
        for (double x : o.weights) w += x;
        if (std::fabs(w - 1.0) > 1e-9)
            throw std::invalid_argument("sampler: cell weights of " + o.area_id + " do not sum to 1");
    }
    init_state();
}

void Sampler::init_state() {
    st_.matern = {opt_.init_sigma2, opt_.init_phi, opt_.init_nu};
    st_.matern.validate();
    st_.tau2 = opt_.init_tau2;
    st_.tauC2 = opt_.init_tauC2;
    st_.chain.alpha = opt_.init_alpha;

    rebuild_basis(st_.matern.phi, st_.matern.nu, nullptr, basis_, B_);

    // support pattern is geometric, fixed across covariance proposals
    block_tracts_.assign(basis_->n_blocks(), {});
    const int r = tree_.r;
    for (int b = 0; b < basis_->n_blocks(); ++b)
        for (int g = 0; g < frame_.n_tracts(); ++g)
            if (B_.row(g).segment(b * r, r).cwiseAbs().maxCoeff() > 0.0)
                block_tracts_[b].push_back(g);

    st_.chain.eta.assign(frame_.T, std::vector<Eigen::VectorXd>(
                                       basis_->n_blocks(), Eigen::VectorXd::Zero(r)));
    st_.xi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(frame_.county_ids.size()));
    st_.eps_tilde = Eigen::VectorXd::Zero(frame_.n_cells());

    // level initialized at the probit of the pooled estimate mean
    double zbar = 0.5;
    if (!obs_.empty()) {
        double s = 0.0;
        for (const auto& o : obs_)
            s += o.ess > 0 ? static_cast<double>(o.enc) / static_cast<double>(o.ess) : 0.5;
        zbar = std::clamp(s / static_cast<double>(obs_.size()), 0.02, 0.98);
    }
    st_.mu = Eigen::VectorXd::Constant(frame_.T, norm_quantile(zbar));

    cell_n_ = Eigen::VectorXd::Zero(frame_.n_cells());
    cell_s_ = Eigen::VectorXd::Zero(frame_.n_cells());
    cell_succ_.assign(frame_.n_cells(), 0);
    cell_fail_.assign(frame_.n_cells(), 0);

    ad_phi_ = {"phi", std::log(opt_.init_scale_phi), 0, 0, 0};
    ad_nu_ = {"nu", std::log(opt_.init_scale_nu), 0, 0, 0};
    ad_alpha_ = {"alpha", std::log(opt_.init_scale_alpha), 0, 0, 0};
    acc_log_.clear();
    in_burnin_ = true;

    refresh_linear_predictor();
}

void Sampler::rebuild_basis(double phi, double nu, std::shared_ptr<const MaternCorrTable> table,
                            std::unique_ptr<BasisSystem>& sys, Eigen::MatrixXd& B) const {
    // blocks are kept at unit variance; sigma2 enters through the weight prior
    MaternParams p{1.0, phi, nu};
    sys = std::make_unique<BasisSystem>(tree_, p, opt_.jitter, std::move(table));
    B = areal_basis(*sys, quads_);
}

Eigen::VectorXd Sampler::linear_predictor_with(const Eigen::MatrixXd& B) const {
    const int G = frame_.n_tracts(), T = frame_.T, r = tree_.r;
    Eigen::VectorXd lp(frame_.n_cells());
    Eigen::VectorXd eta_flat(basis_->n_blocks() * r);
    for (int t = 0; t < T; ++t) {
        for (int b = 0; b < basis_->n_blocks(); ++b)
            eta_flat.segment(b * r, r) = st_.chain.eta[t][b];
        const Eigen::VectorXd field = B * eta_flat;
        for (int g = 0; g < G; ++g)
            lp(g * T + t) = st_.mu(t) + field(g) + st_.xi(frame_.tract_county[g]) +
                            st_.eps_tilde(g * T + t);
    }
    return lp;
}

void Sampler::refresh_linear_predictor() { st_.lp = linear_predictor_with(B_); }

void Sampler::set_latent_stats(const Eigen::VectorXd& n, const Eigen::VectorXd& s) {
    if (n.size() != frame_.n_cells() || s.size() != frame_.n_cells())
        throw std::invalid_argument("set_latent_stats: wrong cell count");
    cell_n_ = n;
    cell_s_ = s;
}

double Sampler::success_probability(const ModelObservation& obs) const {
    double p = 0.0;
    for (std::size_t i = 0; i < obs.cells.size(); ++i)
        p += obs.weights[i] * safe_phi(st_.lp(obs.cells[i]));
    return p;
}

// ---------------------------------------------------------------------------
// data augmentation
// ---------------------------------------------------------------------------

void Sampler::augment_latents(long iter) {
    std::fill(cell_succ_.begin(), cell_succ_.end(), 0L);
    std::fill(cell_fail_.begin(), cell_fail_.end(), 0L);

    std::vector<double> succ_w, fail_w;
    for (std::size_t oi = 0; oi < obs_.size(); ++oi) {
        const auto& o = obs_[oi];
        if (o.ess == 0) continue;
        const std::size_t nc = o.cells.size();
        succ_w.resize(nc);
        fail_w.resize(nc);
        double succ_tot = 0.0, fail_tot = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < nc; ++i) {
            const double lp = st_.lp(o.cells[i]);
            if (!std::isfinite(lp)) finite = false;
            const double p = safe_phi(lp);
            succ_w[i] = o.weights[i] * p;
            fail_w[i] = o.weights[i] * (1.0 - p);
            succ_tot += succ_w[i];
            fail_tot += fail_w[i];
        }
        if (!finite)
            throw std::runtime_error("augment: non-finite linear predictor for " + o.area_id);

        // log-space fallback when every mixture weight underflows
        auto logspace = [&](std::vector<double>& w, double& tot, bool success) {
            double mx = -std::numeric_limits<double>::infinity();
            std::vector<double> lw(nc);
            for (std::size_t i = 0; i < nc; ++i) {
                const double lp = st_.lp(o.cells[i]);
                lw[i] = std::log(o.weights[i]) +
                        (success ? log_norm_cdf(lp) : log_norm_sf(lp));
                mx = std::max(mx, lw[i]);
            }
            tot = 0.0;
            for (std::size_t i = 0; i < nc; ++i) {
                w[i] = std::exp(lw[i] - mx);
                tot += w[i];
            }
        };
        if (o.enc > 0 && succ_tot <= 0.0) logspace(succ_w, succ_tot, true);
        if (o.ess - o.enc > 0 && fail_tot <= 0.0) logspace(fail_w, fail_tot, false);

        Rng sub(mix_seed(opt_.seed, 2 * static_cast<std::uint64_t>(iter), oi + 1));
        auto allocate = [&](long trials, const std::vector<double>& w, double tot,
                            std::vector<long>& target) {
            long remaining = trials;
            double mass = tot;
            for (std::size_t i = 0; i + 1 < nc && remaining > 0; ++i) {
                const double p = std::clamp(mass > 0.0 ? w[i] / mass : 1.0, 0.0, 1.0);
                const long k = sub.binomial(remaining, p);
                target[o.cells[i]] += k;
                remaining -= k;
                mass -= w[i];
            }
            if (remaining > 0) target[o.cells[nc - 1]] += remaining;
        };
        if (o.enc > 0) allocate(o.enc, succ_w, succ_tot, cell_succ_);
        if (o.ess - o.enc > 0) allocate(o.ess - o.enc, fail_w, fail_tot, cell_fail_);
    }

    // per-cell truncated-normal sufficient statistics
    cell_n_.setZero();
    cell_s_.setZero();
    for (int c = 0; c < frame_.n_cells(); ++c) {
        const long ns = cell_succ_[c], nf = cell_fail_[c];
        if (ns == 0 && nf == 0) continue;
        const double lp = std::clamp(st_.lp(c), -kLpClamp, kLpClamp);
        Rng sub(mix_seed(opt_.seed, 2 * static_cast<std::uint64_t>(iter) + 1,
                         static_cast<std::uint64_t>(c) + 1));
        double s = 0.0;
        // success latents: lp + z with z > -lp; failures: lp - z with z > lp
        if (ns > 0)
            s += static_cast<double>(ns) * lp +
                 rtruncnorm_lower_sum(sub, ns, -lp, opt_.tn_exact_max);
        if (nf > 0)
            s += static_cast<double>(nf) * lp -
                 rtruncnorm_lower_sum(sub, nf, lp, opt_.tn_exact_max);
        cell_n_(c) = static_cast<double>(ns + nf);
        cell_s_(c) = s;
    }
}

// ---------------------------------------------------------------------------
// Gibbs updates
// ---------------------------------------------------------------------------

void Sampler::gibbs_eta() {
    const int r = tree_.r, T = frame_.T;
    const double sigma2 = st_.matern.sigma2;
    const double alpha = st_.chain.alpha;
    const double innov = 1.0 - alpha * alpha;
    Eigen::VectorXd z(r), info(r), bvec(r);
    Eigen::MatrixXd prec(r, r);

    for (int t = 0; t < T; ++t) {
        for (int b = 0; b < basis_->n_blocks(); ++b) {
            const Eigen::MatrixXd& kinv = basis_->K_inv_unit(b);
            auto& eta = st_.chain.eta[t][b];

            if (T == 1) {
                prec = kinv / sigma2;
                info.setZero();
            } else if (t == 0) {
                prec = kinv / (sigma2 * innov);
                info.noalias() = kinv * st_.chain.eta[1][b] * (alpha / (sigma2 * innov));
            } else if (t == T - 1) {
                prec = kinv / (sigma2 * innov);
                info.noalias() = kinv * st_.chain.eta[t - 1][b] * (alpha / (sigma2 * innov));
            } else {
                prec = kinv * ((1.0 + alpha * alpha) / (sigma2 * innov));
                info.noalias() = kinv * (st_.chain.eta[t - 1][b] + st_.chain.eta[t + 1][b]) *
                                 (alpha / (sigma2 * innov));
            }

            for (int g : block_tracts_[b]) {
                const int c = g * T + t;
                const double n = cell_n_(c);
                if (n == 0.0) continue;
                bvec = B_.row(g).segment(b * r, r);
                const double resid = cell_s_(c) - n * (st_.lp(c) - bvec.dot(eta));
                prec.noalias() += n * (bvec * bvec.transpose());
                info.noalias() += resid * bvec;
            }

            Eigen::LLT<Eigen::MatrixXd> llt(prec);
            if (llt.info() != Eigen::Success) {
                double jit = 1e-10;
                while (llt.info() != Eigen::Success && jit <= 1e-4) {
                    llt.compute(prec + jit * Eigen::MatrixXd::Identity(r, r));
                    jit *= 10.0;
                }
                if (llt.info() != Eigen::Success)
                    throw std::runtime_error("gibbs_eta: conditional precision not positive definite");
            }
            for (int k = 0; k < r; ++k) z(k) = rng_.normal();
            const Eigen::VectorXd mean = llt.solve(info);
            const Eigen::VectorXd draw = mean + llt.matrixU().solve(z);

            // maintain the predictor cache
            for (int g : block_tracts_[b]) {
                const int c = g * T + t;
                st_.lp(c) += B_.row(g).segment(b * r, r).dot(draw - eta);
            }
            eta = draw;
        }
    }
}

void Sampler::gibbs_mu() {
    const int T = frame_.T, G = frame_.n_tracts();
    for (int t = 0; t < T; ++t) {
        double prec = 0.0, info = 0.0;
        for (int g = 0; g < G; ++g) {
            const int c = g * T + t;
            const double n = cell_n_(c);
            if (n == 0.0) continue;
            prec += n;
            info += cell_s_(c) - n * (st_.lp(c) - st_.mu(t));
        }
        if (prec == 0.0) continue;  // flat prior, no data this year: leave unchanged
        const double mean = info / prec;
        const double draw = mean + rng_.normal() / std::sqrt(prec);
        const double delta = draw - st_.mu(t);
        st_.mu(t) = draw;
        for (int g = 0; g < G; ++g) st_.lp(g * T + t) += delta;
    }
}

void Sampler::gibbs_xi() {
    const int T = frame_.T, G = frame_.n_tracts();
    const int nc = static_cast<int>(frame_.county_ids.size());
    Eigen::VectorXd prec = Eigen::VectorXd::Constant(nc, 1.0 / st_.tauC2);
    Eigen::VectorXd info = Eigen::VectorXd::Zero(nc);
    for (int g = 0; g < G; ++g) {
        const int k = frame_.tract_county[g];
        for (int t = 0; t < T; ++t) {
            const int c = g * T + t;
            const double n = cell_n_(c);
            if (n == 0.0) continue;
            prec(k) += n;
            info(k) += cell_s_(c) - n * (st_.lp(c) - st_.xi(k));
        }
    }
    Eigen::VectorXd delta(nc);
    for (int k = 0; k < nc; ++k) {
        const double draw = info(k) / prec(k) + rng_.normal() / std::sqrt(prec(k));
        delta(k) = draw - st_.xi(k);
        st_.xi(k) = draw;
    }
    for (int g = 0; g < G; ++g) {
        const double d = delta(frame_.tract_county[g]);
        if (d != 0.0)
            for (int t = 0; t < T; ++t) st_.lp(g * T + t) += d;
    }
}

void Sampler::gibbs_eps() {
    const int n_cells = frame_.n_cells();
    const double prior_prec = 1.0 / st_.tau2;
    for (int c = 0; c < n_cells; ++c) {
        const double n = cell_n_(c);
        const double prec = prior_prec + n;
        const double info = n > 0.0 ? cell_s_(c) - n * (st_.lp(c) - st_.eps_tilde(c)) : 0.0;
        const double draw = info / prec + rng_.normal() / std::sqrt(prec);
        st_.lp(c) += draw - st_.eps_tilde(c);
        st_.eps_tilde(c) = draw;
    }
}

void Sampler::gibbs_variances() {
    // tau2 from the cell errors
    const double n_cells = static_cast<double>(frame_.n_cells());
    const double ss_eps = st_.eps_tilde.squaredNorm();
    st_.tau2 = rng_.inverse_gamma(priors_.tau2_shape + 0.5 * n_cells,
                                  priors_.tau2_rate + 0.5 * ss_eps);

    // tauC2 from the cluster effects
    const double n_counties = static_cast<double>(st_.xi.size());
    st_.tauC2 = rng_.inverse_gamma(priors_.tauC2_shape + 0.5 * n_counties,
                                   priors_.tauC2_rate + 0.5 * st_.xi.squaredNorm());

    // sigma2 from the weight chains; the blocks are unit variance so the
    // quadratic form is sigma2-free
    const double alpha = st_.chain.alpha;
    const double innov = 1.0 - alpha * alpha;
    double q = 0.0;
    long n_terms = 0;
    const int T = frame_.T;
    for (int b = 0; b < basis_->n_blocks(); ++b) {
        const Eigen::MatrixXd& kinv = basis_->K_inv_unit(b);
        q += st_.chain.eta[0][b].dot(kinv * st_.chain.eta[0][b]);
        for (int t = 1; t < T; ++t) {
            const Eigen::VectorXd d = st_.chain.eta[t][b] - alpha * st_.chain.eta[t - 1][b];
            q += d.dot(kinv * d) / innov;
        }
        n_terms += T * tree_.r;
    }
    st_.matern.sigma2 = rng_.inverse_gamma(priors_.sigma2_shape + 0.5 * static_cast<double>(n_terms),
                                           priors_.sigma2_rate + 0.5 * q);
}

// ---------------------------------------------------------------------------
// Metropolis updates
// ---------------------------------------------------------------------------

double Sampler::eta_prior_loglik(const BasisSystem& sys, double alpha, double sigma2) const {
    const int T = frame_.T, r = tree_.r;
    const double innov = 1.0 - alpha * alpha;
    double ll = 0.0;
    for (int b = 0; b < sys.n_blocks(); ++b) {
        const Eigen::MatrixXd& kinv = sys.K_inv_unit(b);
        double q = st_.chain.eta[0][b].dot(kinv * st_.chain.eta[0][b]);
        for (int t = 1; t < T; ++t) {
            const Eigen::VectorXd d = st_.chain.eta[t][b] - alpha * st_.chain.eta[t - 1][b];
            q += d.dot(kinv * d) / innov;
        }
        // logdet of the joint: T logdet(sigma2 K) + (T-1) r log innov
        ll += -0.5 * (T * (r * std::log(sigma2) + sys.logdet_K_unit(b)) +
                      (T - 1) * r * std::log(innov)) -
              0.5 * q / sigma2;
    }
    return ll;
}

double Sampler::latent_loglik(const Eigen::VectorXd& lp) const {
    double ll = 0.0;
    for (int c = 0; c < frame_.n_cells(); ++c) {
        const double n = cell_n_(c);
        if (n == 0.0) continue;
        const double psi = std::clamp(lp(c), -kLpClamp, kLpClamp);
        ll += cell_s_(c) * psi - 0.5 * n * psi * psi;
    }
    return ll;
}

bool Sampler::mh_covariance_move(double phi_prop, double nu_prop, double log_jacobian_diff) {
    std::unique_ptr<BasisSystem> cand;
    Eigen::MatrixXd B_cand;
    try {
        std::shared_ptr<const MaternCorrTable> table =
            (nu_prop == st_.matern.nu) ? basis_->table() : nullptr;
        rebuild_basis(phi_prop, nu_prop, std::move(table), cand, B_cand);
    } catch (const std::exception&) {
        return false;  // basis rebuild failure rejects the proposal
    }

    const double alpha = st_.chain.alpha;
    const double sigma2 = st_.matern.sigma2;
    const Eigen::VectorXd lp_cand = linear_predictor_with(B_cand);

    double log_ratio = log_jacobian_diff;
    // Gamma prior on phi, flat prior on nu within its support
    log_ratio += (priors_.phi_shape - 1.0) * (std::log(phi_prop) - std::log(st_.matern.phi)) -
                 priors_.phi_rate * (phi_prop - st_.matern.phi);
    log_ratio += eta_prior_loglik(*cand, alpha, sigma2) - eta_prior_loglik(*basis_, alpha, sigma2);
    log_ratio += latent_loglik(lp_cand) - latent_loglik(st_.lp);

    if (std::log(rng_.uniform()) < log_ratio) {
        basis_ = std::move(cand);
        B_ = std::move(B_cand);
        st_.lp = lp_cand;
        st_.matern.phi = phi_prop;
        st_.matern.nu = nu_prop;
        return true;
    }
    return false;
}

bool Sampler::mh_phi() {
    const double scale = std::exp(ad_phi_.log_scale);
    const double log_phi = std::log(st_.matern.phi);
    const double log_prop = log_phi + scale * rng_.normal();
    // random walk on log phi: Jacobian ratio phi'/phi
    return mh_covariance_move(std::exp(log_prop), st_.matern.nu, log_prop - log_phi);
}

bool Sampler::mh_nu() {
    const double lo = std::max(priors_.nu_lo, opt_.nu_lo_sample);
    const double hi = std::min(priors_.nu_hi, opt_.nu_hi_sample);
    const double scale = std::exp(ad_nu_.log_scale);
    const double cur = st_.matern.nu;
    const double l_cur = std::log((cur - lo) / (hi - cur));
    const double l_prop = l_cur + scale * rng_.normal();
    const double nu_prop = lo + (hi - lo) * expit(l_prop);
    // logit-scale walk: Jacobian (nu'-lo)(hi-nu') / ((nu-lo)(hi-nu))
    const double jac = std::log((nu_prop - lo) * (hi - nu_prop)) -
                       std::log((cur - lo) * (hi - cur));
    return mh_covariance_move(st_.matern.phi, nu_prop, jac);
}

bool Sampler::mh_alpha() {
    const double lo = priors_.alpha_lo, hi = priors_.alpha_hi;
    const double scale = std::exp(ad_alpha_.log_scale);
    const double cur = st_.chain.alpha;
    const double l_cur = std::log((cur - lo) / (hi - cur));
    const double l_prop = l_cur + scale * rng_.normal();
    const double prop = lo + (hi - lo) * expit(l_prop);
    const double jac = std::log((prop - lo) * (hi - prop)) - std::log((cur - lo) * (hi - cur));

    const double sigma2 = st_.matern.sigma2;
    const double log_ratio = eta_prior_loglik(*basis_, prop, sigma2) -
                             eta_prior_loglik(*basis_, cur, sigma2) + jac;
    if (std::log(rng_.uniform()) < log_ratio) {
        st_.chain.alpha = prop;
        return true;
    }
    return false;
}

void Sampler::adapt_record(MhAdapt& a, bool accepted, bool burnin_phase,
                           std::vector<PosteriorDraws::AccLogEntry>& log) {
    a.tries += 1;
    a.accepts += accepted ? 1 : 0;
    if (a.tries < opt_.adapt_batch) return;
    const double rate = static_cast<double>(a.accepts) / static_cast<double>(a.tries);
    a.batch += 1;
    if (burnin_phase && opt_.adapt) {
        // Robbins-Monro step toward the target rate, frozen after burn-in
        const double gamma = std::min(0.5, 2.0 / std::sqrt(static_cast<double>(a.batch)));
        a.log_scale = std::clamp(a.log_scale + gamma * (rate - opt_.adapt_target),
                                 std::log(1e-3), std::log(20.0));
    }
    log.push_back({a.name, burnin_phase, a.batch, rate, std::exp(a.log_scale)});
    a.tries = 0;
    a.accepts = 0;
}

void Sampler::check_finite(long iter) const {
    bool ok = st_.lp.allFinite() && st_.eps_tilde.allFinite() && st_.xi.allFinite() &&
              st_.mu.allFinite() && std::isfinite(st_.tau2) && std::isfinite(st_.tauC2) &&
              std::isfinite(st_.matern.sigma2);
    if (!ok)
        throw std::runtime_error(
            "sampler diverged at iteration " + std::to_string(iter) +
            " (non-finite state: tau2=" + std::to_string(st_.tau2) +
            " tauC2=" + std::to_string(st_.tauC2) +
            " sigma2=" + std::to_string(st_.matern.sigma2) + ")");
}

PosteriorDraws Sampler::run() {
    const int T = frame_.T, G = frame_.n_tracts();
    PosteriorDraws d;
    d.tract_ids = frame_.tract_ids;
    d.year0 = frame_.year0;
    d.T = T;
    d.seed = opt_.seed;
    d.config_fingerprint = opt_.config_fingerprint;
    for (int t = 0; t < T; ++t) d.scalar_names.push_back("mu_" + std::to_string(frame_.year0 + t));
    const std::vector<std::string> extra{"tau2", "tauC2", "sigma2", "phi", "nu", "alpha"};
    d.scalar_names.insert(d.scalar_names.end(), extra.begin(), extra.end());

    const long n_keep = (opt_.iters - opt_.burnin + opt_.thin - 1) / opt_.thin;
    d.pi.resize(n_keep, G * T);
    d.scalars.resize(n_keep, static_cast<Eigen::Index>(d.scalar_names.size()));

    long kept = 0;
    for (long iter = 0; iter < opt_.iters; ++iter) {
        in_burnin_ = iter < opt_.burnin;
        refresh_linear_predictor();
        augment_latents(iter);
        if (opt_.update_eta) gibbs_eta();
        if (opt_.update_mu) gibbs_mu();
        if (opt_.update_xi) gibbs_xi();
        if (opt_.update_eps) gibbs_eps();
        if (opt_.update_variances) gibbs_variances();
        if (opt_.update_alpha) adapt_record(ad_alpha_, mh_alpha(), in_burnin_, acc_log_);
        if (opt_.update_phi_nu) {
            adapt_record(ad_phi_, mh_phi(), in_burnin_, acc_log_);
            adapt_record(ad_nu_, mh_nu(), in_burnin_, acc_log_);
        }
        check_finite(iter);

        if (!in_burnin_ && (iter - opt_.burnin) % opt_.thin == 0) {
            for (int c = 0; c < G * T; ++c)
                d.pi(kept, c) = std::clamp(safe_phi(st_.lp(c)), 1e-300, 1.0 - 1e-16);
            for (int t = 0; t < T; ++t) d.scalars(kept, t) = st_.mu(t);
            d.scalars(kept, T + 0) = st_.tau2;
            d.scalars(kept, T + 1) = st_.tauC2;
            d.scalars(kept, T + 2) = st_.matern.sigma2;
            d.scalars(kept, T + 3) = st_.matern.phi;
            d.scalars(kept, T + 4) = st_.matern.nu;
            d.scalars(kept, T + 5) = st_.chain.alpha;
            ++kept;
        }
    }
    d.pi.conservativeResize(kept, Eigen::NoChange);
    d.scalars.conservativeResize(kept, Eigen::NoChange);
    d.acc_log = acc_log_;
    return d;
}

PosteriorDraws run_chain(const ModelFrame& frame, const std::vector<ModelObservation>& obs,
                         const KnotTree& tree, const std::vector<QuadratureSet>& quads,
                         const Priors& priors, const McmcOptions& opt) {
    PosteriorDraws merged;
    for (int chain = 0; chain < std::max(1, opt.chains); ++chain) {
        McmcOptions copt = opt;
        copt.seed = chain == 0 ? opt.seed : mix_seed(opt.seed, static_cast<std::uint64_t>(chain));
        Sampler s(frame, obs, tree, quads, priors, copt);
        PosteriorDraws d = s.run();
        if (chain == 0)
            merged = std::move(d);
        else
            merged.append(d);
    }
    return merged;
}

}  // namespace disagg
