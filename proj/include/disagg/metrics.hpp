#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace disagg {

struct ErrorMetrics {
    double mse = 0.0;
    double mae = 0.0;
    double msre = 0.0;
    double mare = 0.0;
};

// mean squared/absolute error plus their truth-relative versions;
// relative metrics require strictly positive truth
ErrorMetrics error_metrics(const std::vector<double>& estimates, const std::vector<double>& truth);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

// equal-tailed interval from the draws of one quantity, linear-interpolated
// order statistics; requires at least 100 draws
Interval pointwise_ci(const std::vector<double>& draws, double level);

// Simultaneous band over columns of draws (iterations x quantities): per
// quantity mean m_i and sd s_i, band m_i +/- k* s_i with k* the level
// quantile of max_i |draw_i - m_i| / s_i across iterations. Quantities with
// zero sd are excluded (flagged in excluded).
std::vector<Interval> joint_band(const Eigen::MatrixXd& draws, double level,
                                 std::vector<int>* excluded = nullptr);

// fraction of truths inside their interval
double coverage(const std::vector<Interval>& intervals, const std::vector<double>& truth);

struct ScoreReport {
    // estimation mode
    double mse = 0.0, mae = 0.0, msre = 0.0, mare = 0.0;
    double coverage_50_pt = 0.0, coverage_95_pt = 0.0;
    double coverage_50_joint = 0.0, coverage_95_joint = 0.0;
    // validation mode
    double bias = 0.0, mspe = 0.0, mape = 0.0;
    double pi_coverage_50 = 0.0, pi_coverage_95 = 0.0;
};

// out-of-sample scores: columns of pred_draws are supports aligned with truth
ScoreReport predictive_report(const Eigen::MatrixXd& pred_draws,
                              const std::vector<double>& truth);

}  // namespace disagg
