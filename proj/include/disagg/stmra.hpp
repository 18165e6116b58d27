#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "disagg/common.hpp"
#include "disagg/geometry.hpp"

namespace disagg {

// ---------------------------------------------------------------------------
// Matern covariance
// ---------------------------------------------------------------------------

struct MaternParams {
    double sigma2 = 1.0;  // marginal variance
    double phi = 1.0;     // range
    double nu = 1.0;      // smoothness, in (0,2)

    void validate() const;
};

// sigma2 / (2^{nu-1} Gamma(nu)) (h/phi)^nu K_nu(h/phi); sigma2 at h = 0
double matern_cov(double h, const MaternParams& p);

// Correlation (unit variance) as a function of the distance ratio x = h/phi,
// tabulated on a log grid for bulk evaluation during basis rebuilds.
// Falls back to the exact form outside the tabulated range.
class MaternCorrTable {
public:
    explicit MaternCorrTable(double nu, int n = 8192);

    double nu() const { return nu_; }
    // correlation at log(h/phi); exact matches within ~1e-8
    double corr_log_ratio(double log_x) const;
    double corr_ratio(double x) const {
        return x <= 0.0 ? 1.0 : corr_log_ratio(std::log(x));
    }

    static double exact_corr_ratio(double x, double nu);

private:
    double nu_;
    double u_min_, u_max_, inv_du_;
    std::vector<double> val_;
};

// ---------------------------------------------------------------------------
// Recursive partitioning with regular knot grids
// ---------------------------------------------------------------------------

struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;
    bool contains(const Point& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

enum class KnotPlacement { grid };

// Level m partitions the domain into J^m congruent rectangles (sqrt(J) splits
// per axis, applied recursively); each partition carries r knots on a regular
// sqrt(r) x sqrt(r) grid inset from its boundary by half a grid cell.
struct KnotTree {
    Rect domain;
    int M = 0;
    int J = 4;
    int r = 9;
    int sqrt_j = 2;
    int sqrt_r = 3;
    // knots[m] holds J^m * r points, partition-major
    std::vector<std::vector<Point>> knots;

    int levels() const { return M + 1; }
    int partitions_at(int m) const;
    int side_at(int m) const;  // partitions per axis
    Rect partition_rect(int m, int j) const;
    int partition_of(int m, const Point& s) const;  // -1 outside the domain
    int parent_of(int m, int j) const;
    const Point* partition_knots(int m, int j) const { return &knots[m][j * r]; }
};

KnotTree build_knot_tree(const Rect& domain, int M, int J, int r,
                         KnotPlacement placement = KnotPlacement::grid);

// ---------------------------------------------------------------------------
// Multi-resolution basis
// ---------------------------------------------------------------------------

// Basis functions at every point are supported on the partition holding the
// point, so each location sees (M+1)*r basis functions (its ancestry path).
// Blocks are stored at unit marginal variance; sigma2 is carried by the
// weight prior, which keeps the blocks valid across variance updates.
class BasisSystem {
public:
    BasisSystem(KnotTree tree, MaternParams params, double jitter = 1e-8,
                std::shared_ptr<const MaternCorrTable> table = nullptr);

    const KnotTree& tree() const { return tree_; }
    const MaternParams& params() const { return params_; }
    double sigma2() const { return params_.sigma2; }
    std::shared_ptr<const MaternCorrTable> table() const { return table_; }

    int r() const { return tree_.r; }
    int levels() const { return tree_.levels(); }
    int n_blocks() const { return n_blocks_; }
    int n_basis() const { return n_blocks_ * tree_.r; }
    int block_index(int m, int j) const { return level_offset_[m] + j; }

    // unit-variance internals (used by the sampler)
    const Eigen::MatrixXd& K_inv_unit(int block) const { return blocks_[block].k_inv; }
    const Eigen::MatrixXd& K_unit(int block) const { return blocks_[block].k; }
    const Eigen::LLT<Eigen::MatrixXd>& K_inv_llt(int block) const { return blocks_[block].llt; }
    double logdet_K_unit(int block) const { return blocks_[block].logdet_k; }
    double jitter_used(int block) const { return blocks_[block].jitter_used; }

    // prior covariance of a weight block, sigma2 * K_unit
    Eigen::MatrixXd K_block(int m, int j) const {
        return params_.sigma2 * blocks_[block_index(m, j)].k;
    }

    // basis values along the ancestry path of s: column m holds b_{m,j(s)}(s)
    struct PathBasis {
        std::vector<int> block;  // global block index per level
        Eigen::MatrixXd values;  // r x (M+1)
    };
    PathBasis basis_at(const Point& s) const;
    // storage-reusing variant for bulk evaluation
    void basis_at(const Point& s, PathBasis& out, Eigen::VectorXd& scratch) const;

private:
    struct Block {
        int level = 0;
        int part = 0;
        std::vector<Eigen::MatrixXd> w_anc;  // v_l(S*_self, S*_ancestor_l), l < level
        Eigen::MatrixXd k_inv;               // v_m(S*, S*) + jitter I
        Eigen::MatrixXd k;
        Eigen::LLT<Eigen::MatrixXd> llt;     // of k_inv
        double logdet_k = 0.0;
        double jitter_used = 0.0;
    };

    double corr_dist(double h) const;  // correlation at distance h
    void build_blocks(double jitter);

    KnotTree tree_;
    MaternParams params_;
    std::shared_ptr<const MaternCorrTable> table_;
    std::vector<Block> blocks_;
    std::vector<int> level_offset_;
    int n_blocks_ = 0;
    double log_phi_ = 0.0;
};

// Areal integrals of the basis functions: row per quadrature set, n_basis
// columns, entries are quadrature averages of the point basis.
Eigen::MatrixXd areal_basis(const BasisSystem& sys, const std::vector<QuadratureSet>& quads);

// ---------------------------------------------------------------------------
// AR(1) weight chains
// ---------------------------------------------------------------------------

struct WeightChain {
    double alpha = 0.5;
    // eta[t][block] is an r-vector
    std::vector<std::vector<Eigen::VectorXd>> eta;

    int T() const { return static_cast<int>(eta.size()); }
};

// eta_{1,m,j} ~ N(0, K_{m,j}); eta_t | eta_{t-1} ~ N(alpha eta_{t-1}, (1-alpha^2) K_{m,j})
WeightChain sample_weights_prior(const BasisSystem& sys, int T, double alpha, Rng& rng);

// sum over the ancestry path of b_{m,j}(s)' eta_{t,m,j}; t is 1-based
double eval_field(const BasisSystem& sys, const WeightChain& chain, const Point& s, int t);

// ---------------------------------------------------------------------------
// Binary cache of an areal basis matrix, keyed by the build inputs
// ---------------------------------------------------------------------------

struct BasisCacheKey {
    Rect domain;
    int M = 0, J = 0, r = 0, q = 0;
    std::uint64_t quad_seed = 0;
    MaternParams params;

    bool operator==(const BasisCacheKey& o) const;
};

void save_basis_cache(const std::string& path, const BasisCacheKey& key, const Eigen::MatrixXd& B);
// returns false when the file is absent or was built under a different key
bool load_basis_cache(const std::string& path, const BasisCacheKey& key, Eigen::MatrixXd& B);

}  // namespace disagg
