#include "disagg/stmra.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace disagg {

void MaternParams::validate() const {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("matern: sigma2 must be > 0");
    if (!(phi > 0.0)) throw std::invalid_argument("matern: phi must be > 0");
    if (!(nu > 0.0 && nu < 2.0)) throw std::invalid_argument("matern: nu must be in (0,2)");
}

double matern_cov(double h, const MaternParams& p) {
    p.validate();
    if (!std::isfinite(h) || h < 0.0) throw std::domain_error("matern_cov: invalid distance");
    if (h == 0.0) return p.sigma2;
    return p.sigma2 * MaternCorrTable::exact_corr_ratio(h / p.phi, p.nu);
}

double MaternCorrTable::exact_corr_ratio(double x, double nu) {
    if (x <= 0.0) return 1.0;
    if (x > 700.0) return 0.0;
    const double c = std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
    const double v = c * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
    // guard the h -> 0 limit against rounding above 1
    return std::min(v, 1.0);
}

MaternCorrTable::MaternCorrTable(double nu, int n) : nu_(nu) {
    if (!(nu > 0.0 && nu < 2.0)) throw std::invalid_argument("matern table: nu must be in (0,2)");
    if (n < 16) throw std::invalid_argument("matern table: grid too small");
    u_min_ = std::log(1e-12);
    u_max_ = std::log(64.0);
    inv_du_ = (n - 1) / (u_max_ - u_min_);
    val_.resize(n);
    const double c = std::pow(2.0, 1.0 - nu) / std::tgamma(nu);
    for (int i = 0; i < n; ++i) {
        const double u = u_min_ + i / inv_du_;
        const double x = std::exp(u);
        val_[i] = std::min(c * std::exp(nu * u) * std::cyl_bessel_k(nu, x), 1.0);
    }
}

double MaternCorrTable::corr_log_ratio(double log_x) const {
    if (log_x >= u_max_) return exact_corr_ratio(std::exp(log_x), nu_);
    if (log_x <= u_min_) return exact_corr_ratio(std::exp(log_x), nu_);
    const double t = (log_x - u_min_) * inv_du_;
    const int i = static_cast<int>(t);
    const double f = t - i;
    const int n = static_cast<int>(val_.size());
    // Catmull-Rom cubic on the log grid
    const double y0 = val_[i > 0 ? i - 1 : 0];
    const double y1 = val_[i];
    const double y2 = val_[i + 1 < n ? i + 1 : n - 1];
    const double y3 = val_[i + 2 < n ? i + 2 : n - 1];
    const double a = y1;
    const double b = 0.5 * (y2 - y0);
    const double c = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
    const double d = 0.5 * (y3 - y0) + 1.5 * (y1 - y2);
    return a + f * (b + f * (c + f * d));
}

// ---------------------------------------------------------------------------
// KnotTree
// ---------------------------------------------------------------------------

int KnotTree::partitions_at(int m) const {
    int n = 1;
    for (int i = 0; i < m; ++i) n *= J;
    return n;
}

int KnotTree::side_at(int m) const {
    int n = 1;
    for (int i = 0; i < m; ++i) n *= sqrt_j;
    return n;
}

Rect KnotTree::partition_rect(int m, int j) const {
    const int side = side_at(m);
    const int ix = j % side;
    const int iy = j / side;
    const double w = (domain.x1 - domain.x0) / side;
    const double h = (domain.y1 - domain.y0) / side;
    return {domain.x0 + ix * w, domain.y0 + iy * h, domain.x0 + (ix + 1) * w,
            domain.y0 + (iy + 1) * h};
}

int KnotTree::partition_of(int m, const Point& s) const {
    if (!domain.contains(s)) return -1;
    const int side = side_at(m);
    const double w = (domain.x1 - domain.x0) / side;
    const double h = (domain.y1 - domain.y0) / side;
    int ix = static_cast<int>((s.x - domain.x0) / w);
    int iy = static_cast<int>((s.y - domain.y0) / h);
    ix = std::min(ix, side - 1);
    iy = std::min(iy, side - 1);
    return iy * side + ix;
}

int KnotTree::parent_of(int m, int j) const {
    if (m == 0) return -1;
    const int side = side_at(m);
    const int ix = j % side;
    const int iy = j / side;
    const int pside = side / sqrt_j;
    (void)pside;
    return (iy / sqrt_j) * (side / sqrt_j) + (ix / sqrt_j);
}

KnotTree build_knot_tree(const Rect& domain, int M, int J, int r, KnotPlacement placement) {
    if (placement != KnotPlacement::grid) throw std::invalid_argument("unsupported knot placement");
    if (!(domain.x1 > domain.x0 && domain.y1 > domain.y0))
        throw std::invalid_argument("knot tree: empty domain");
    if (M < 0 || M > 10) throw std::invalid_argument("knot tree: M out of range [0,10]");
    const int sj = static_cast<int>(std::lround(std::sqrt(static_cast<double>(J))));
    if (J < 4 || sj * sj != J) throw std::invalid_argument("knot tree: J must be a perfect square >= 4");
    const int sr = static_cast<int>(std::lround(std::sqrt(static_cast<double>(r))));
    if (r < 1 || r > 4096 || sr * sr != r)
        throw std::invalid_argument("knot tree: r must be a perfect square in [1,4096]");

    KnotTree t;
    t.domain = domain;
    t.M = M;
    t.J = J;
    t.r = r;
    t.sqrt_j = sj;
    t.sqrt_r = sr;
    t.knots.resize(M + 1);
    for (int m = 0; m <= M; ++m) {
        const int np = t.partitions_at(m);
        t.knots[m].reserve(static_cast<std::size_t>(np) * r);
        for (int j = 0; j < np; ++j) {
            const Rect rect = t.partition_rect(m, j);
            const double dx = (rect.x1 - rect.x0) / sr;
            const double dy = (rect.y1 - rect.y0) / sr;
            for (int ky = 0; ky < sr; ++ky)
                for (int kx = 0; kx < sr; ++kx)
                    t.knots[m].push_back({rect.x0 + (kx + 0.5) * dx, rect.y0 + (ky + 0.5) * dy});
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// BasisSystem
// ---------------------------------------------------------------------------

BasisSystem::BasisSystem(KnotTree tree, MaternParams params, double jitter,
                         std::shared_ptr<const MaternCorrTable> table)
    : tree_(std::move(tree)), params_(params), table_(std::move(table)) {
    params_.validate();
    if (!(jitter > 0.0)) throw std::invalid_argument("basis: jitter must be > 0");
    if (table_ && table_->nu() != params_.nu)
        throw std::invalid_argument("basis: correlation table built for a different nu");
    if (!table_) table_ = std::make_shared<MaternCorrTable>(params_.nu);
    log_phi_ = std::log(params_.phi);

    level_offset_.resize(tree_.levels() + 1, 0);
    for (int m = 0; m <= tree_.M; ++m)
        level_offset_[m + 1] = level_offset_[m] + tree_.partitions_at(m);
    n_blocks_ = level_offset_[tree_.levels()];
    build_blocks(jitter);
}

double BasisSystem::corr_dist(double h) const {
    if (h <= 0.0) return 1.0;
    return table_->corr_log_ratio(std::log(h) - log_phi_);
}

void BasisSystem::build_blocks(double jitter) {
    const int r = tree_.r;
    blocks_.resize(n_blocks_);
    for (int m = 0; m <= tree_.M; ++m) {
        const int np = tree_.partitions_at(m);
        for (int j = 0; j < np; ++j) {
            Block& blk = blocks_[block_index(m, j)];
            blk.level = m;
            blk.part = j;

            // ancestor chain, root first
            std::vector<int> anc(m);
            {
                int cur = j;
                for (int l = m - 1; l >= 0; --l) {
                    cur = tree_.parent_of(l + 1, cur);
                    anc[l] = cur;
                }
            }

            const Point* own = tree_.partition_knots(m, j);
            // cross-covariances with each ancestor's knots, then the
            // conditional-residual recursion across levels
            blk.w_anc.resize(m);
            for (int l = 0; l < m; ++l) {
                const Point* aknots = tree_.partition_knots(l, anc[l]);
                Eigen::MatrixXd raw(r, r);
                for (int a = 0; a < r; ++a)
                    for (int b = 0; b < r; ++b)
                        raw(a, b) = corr_dist(std::hypot(own[a].x - aknots[b].x,
                                                         own[a].y - aknots[b].y));
                const Block& anc_blk = blocks_[block_index(l, anc[l])];
                for (int k = 0; k < l; ++k) {
                    const Block& cond_blk = blocks_[block_index(k, anc[k])];
                    raw.noalias() -=
                        blk.w_anc[k] * cond_blk.k * anc_blk.w_anc[k].transpose();
                }
                blk.w_anc[l] = std::move(raw);
            }

            Eigen::MatrixXd kinv(r, r);
            for (int a = 0; a < r; ++a) {
                kinv(a, a) = 1.0;
                for (int b = a + 1; b < r; ++b) {
                    const double v =
                        corr_dist(std::hypot(own[a].x - own[b].x, own[a].y - own[b].y));
                    kinv(a, b) = v;
                    kinv(b, a) = v;
                }
            }
            for (int k = 0; k < m; ++k) {
                const Block& cond_blk = blocks_[block_index(k, anc[k])];
                kinv.noalias() -= blk.w_anc[k] * cond_blk.k * blk.w_anc[k].transpose();
            }
            kinv = 0.5 * (kinv + kinv.transpose().eval());

            double jit = jitter;
            for (;;) {
                Eigen::MatrixXd trial = kinv + jit * Eigen::MatrixXd::Identity(r, r);
                blk.llt.compute(trial);
                if (blk.llt.info() == Eigen::Success) {
                    blk.k_inv = std::move(trial);
                    blk.jitter_used = jit;
                    break;
                }
                jit *= 10.0;
                if (jit > 1e-4 * 1.0001)
                    throw std::runtime_error("basis: knot matrix not positive definite at level " +
                                             std::to_string(m) + " partition " + std::to_string(j));
            }
            blk.k = blk.llt.solve(Eigen::MatrixXd::Identity(r, r));
            double ld = 0.0;
            const auto& L = blk.llt.matrixLLT();
            for (int a = 0; a < r; ++a) ld += std::log(L(a, a));
            blk.logdet_k = -2.0 * ld;  // log det K = -log det K^{-1}
        }
    }
}

BasisSystem::PathBasis BasisSystem::basis_at(const Point& s) const {
    PathBasis pb;
    Eigen::VectorXd scratch;
    basis_at(s, pb, scratch);
    return pb;
}

void BasisSystem::basis_at(const Point& s, PathBasis& pb, Eigen::VectorXd& scratch) const {
    const int r = tree_.r;
    pb.block.resize(tree_.levels());
    pb.values.resize(r, tree_.levels());
    scratch.resize(r);
    for (int m = 0; m <= tree_.M; ++m) {
        const int j = tree_.partition_of(m, s);
        if (j < 0) throw std::domain_error("basis_at: point outside the domain");
        const int bi = block_index(m, j);
        pb.block[m] = bi;
        const Point* kn = tree_.partition_knots(m, j);
        auto col = pb.values.col(m);
        for (int k = 0; k < r; ++k)
            col(k) = corr_dist(std::hypot(s.x - kn[k].x, s.y - kn[k].y));
        const Block& blk = blocks_[bi];
        for (int l = 0; l < m; ++l) {
            const Block& cond = blocks_[pb.block[l]];
            scratch.noalias() = cond.k * pb.values.col(l);
            col.noalias() -= blk.w_anc[l] * scratch;
        }
    }
}

Eigen::MatrixXd areal_basis(const BasisSystem& sys, const std::vector<QuadratureSet>& quads) {
    const int r = sys.r();
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(quads.size()), sys.n_basis());
    BasisSystem::PathBasis pb;
    Eigen::VectorXd scratch;
    for (std::size_t i = 0; i < quads.size(); ++i) {
        const auto& qs = quads[i];
        for (const Point& p : qs.points) {
            sys.basis_at(p, pb, scratch);
            for (int m = 0; m < sys.levels(); ++m)
                B.row(i).segment(pb.block[m] * r, r) += qs.weight * pb.values.col(m).transpose();
        }
    }
    return B;
}

WeightChain sample_weights_prior(const BasisSystem& sys, int T, double alpha, Rng& rng) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
    if (T < 1) throw std::invalid_argument("T must be >= 1");
    const int r = sys.r();
    const double sigma = std::sqrt(sys.sigma2());
    const double innov = std::sqrt(1.0 - alpha * alpha);
    WeightChain chain;
    chain.alpha = alpha;
    chain.eta.assign(T, std::vector<Eigen::VectorXd>(sys.n_blocks()));
    Eigen::VectorXd z(r);
    for (int b = 0; b < sys.n_blocks(); ++b) {
        // K = (LL')^{-1} for the stored Cholesky of K^{-1}: draw x = L^{-T} z
        const auto& llt = sys.K_inv_llt(b);
        for (int t = 0; t < T; ++t) {
            for (int k = 0; k < r; ++k) z(k) = rng.normal();
            Eigen::VectorXd x =
                llt.matrixU().solve(z) * sigma * (t == 0 ? 1.0 : innov);
            if (t == 0)
                chain.eta[t][b] = std::move(x);
            else
                chain.eta[t][b] = alpha * chain.eta[t - 1][b] + x;
        }
    }
    return chain;
}

double eval_field(const BasisSystem& sys, const WeightChain& chain, const Point& s, int t) {
    if (t < 1 || t > chain.T()) throw std::invalid_argument("eval_field: t out of range");
    const auto pb = sys.basis_at(s);
    double v = 0.0;
    for (int m = 0; m < sys.levels(); ++m)
        v += pb.values.col(m).dot(chain.eta[t - 1][pb.block[m]]);
    return v;
}

// ---------------------------------------------------------------------------
// Basis cache
// ---------------------------------------------------------------------------

bool BasisCacheKey::operator==(const BasisCacheKey& o) const {
    return domain.x0 == o.domain.x0 && domain.y0 == o.domain.y0 && domain.x1 == o.domain.x1 &&
           domain.y1 == o.domain.y1 && M == o.M && J == o.J && r == o.r && q == o.q &&
           quad_seed == o.quad_seed && params.sigma2 == o.params.sigma2 &&
           params.phi == o.params.phi && params.nu == o.params.nu;
}

namespace {
constexpr std::uint64_t kBasisCacheMagic = 0x42415349534d5458ull;
}

void save_basis_cache(const std::string& path, const BasisCacheKey& key, const Eigen::MatrixXd& B) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    auto put = [&](const void* p, std::size_t n) { out.write(static_cast<const char*>(p), n); };
    put(&kBasisCacheMagic, 8);
    put(&key.domain, sizeof(key.domain));
    put(&key.M, 4);
    put(&key.J, 4);
    put(&key.r, 4);
    put(&key.q, 4);
    put(&key.quad_seed, 8);
    put(&key.params, sizeof(key.params));
    const std::int64_t rows = B.rows(), cols = B.cols();
    put(&rows, 8);
    put(&cols, 8);
    put(B.data(), sizeof(double) * rows * cols);
    if (!out) throw std::runtime_error("write failed: " + path);
}

bool load_basis_cache(const std::string& path, const BasisCacheKey& key, Eigen::MatrixXd& B) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    auto get = [&](void* p, std::size_t n) { in.read(static_cast<char*>(p), n); };
    std::uint64_t magic = 0;
    get(&magic, 8);
    if (magic != kBasisCacheMagic) return false;
    BasisCacheKey k;
    get(&k.domain, sizeof(k.domain));
    get(&k.M, 4);
    get(&k.J, 4);
    get(&k.r, 4);
    get(&k.q, 4);
    get(&k.quad_seed, 8);
    get(&k.params, sizeof(k.params));
    if (!in || !(k == key)) return false;
    std::int64_t rows = 0, cols = 0;
    get(&rows, 8);
    get(&cols, 8);
    if (!in || rows < 0 || cols < 0) return false;
    B.resize(rows, cols);
    get(B.data(), sizeof(double) * rows * cols);
    return static_cast<bool>(in);
}

}  // namespace disagg
