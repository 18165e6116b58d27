#pragma once

// Straight-line reference implementation of the multi-resolution basis
// recursion: every quantity is recomputed from first principles on each call,
// with no caching and no correlation table, so it exercises an independent
// code path from the production BasisSystem.

#include <Eigen/Dense>

#include "disagg/stmra.hpp"

namespace mra_oracle {

using disagg::KnotTree;
using disagg::MaternParams;
using disagg::Point;

inline double dist(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// residual covariance after conditioning on knot levels < m, along the
// common-partition path of s1 and s2; zero when they separate at or below m
inline double v(const KnotTree& tree, const MaternParams& p, double jitter, int m,
                const Point& s1, const Point& s2) {
    if (m == 0) return disagg::matern_cov(dist(s1, s2), p);
    if (tree.partition_of(m, s1) != tree.partition_of(m, s2)) return 0.0;

    const int r = tree.r;
    const int j1 = tree.partition_of(m - 1, s1);
    const Point* kn = tree.partition_knots(m - 1, j1);

    Eigen::VectorXd b1(r), b2(r);
    for (int k = 0; k < r; ++k) {
        b1(k) = v(tree, p, jitter, m - 1, s1, kn[k]);
        b2(k) = v(tree, p, jitter, m - 1, s2, kn[k]);
    }
    Eigen::MatrixXd kinv(r, r);
    for (int a = 0; a < r; ++a)
        for (int b = 0; b < r; ++b) kinv(a, b) = v(tree, p, jitter, m - 1, kn[a], kn[b]);
    kinv.diagonal().array() += jitter * p.sigma2;
    const Eigen::VectorXd kb2 = kinv.ldlt().solve(b2);
    return v(tree, p, jitter, m - 1, s1, s2) - b1.dot(kb2);
}

inline Eigen::VectorXd basis(const KnotTree& tree, const MaternParams& p, double jitter, int m,
                             const Point& s) {
    const int j = tree.partition_of(m, s);
    const Point* kn = tree.partition_knots(m, j);
    Eigen::VectorXd b(tree.r);
    for (int k = 0; k < tree.r; ++k) b(k) = v(tree, p, jitter, m, s, kn[k]);
    return b;
}

inline Eigen::MatrixXd k_inv(const KnotTree& tree, const MaternParams& p, double jitter, int m,
                             int j) {
    const Point* kn = tree.partition_knots(m, j);
    Eigen::MatrixXd kinv(tree.r, tree.r);
    for (int a = 0; a < tree.r; ++a)
        for (int b = 0; b < tree.r; ++b) kinv(a, b) = v(tree, p, jitter, m, kn[a], kn[b]);
    kinv.diagonal().array() += jitter * p.sigma2;
    return kinv;
}

// sum over levels of b' K b, the covariance implied by independent
// N(0, K) weights per block
inline double implied_cov(const KnotTree& tree, const MaternParams& p, double jitter,
                          const Point& s1, const Point& s2) {
    double total = 0.0;
    for (int m = 0; m <= tree.M; ++m) {
        if (tree.partition_of(m, s1) != tree.partition_of(m, s2)) break;
        const Eigen::VectorXd b1 = basis(tree, p, jitter, m, s1);
        const Eigen::VectorXd b2 = basis(tree, p, jitter, m, s2);
        const Eigen::MatrixXd kinv = k_inv(tree, p, jitter, m, tree.partition_of(m, s1));
        total += b1.dot(kinv.ldlt().solve(b2));
    }
    return total;
}

}  // namespace mra_oracle
