#include "disagg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "disagg/common.hpp"

namespace disagg {

ErrorMetrics error_metrics(const std::vector<double>& estimates, const std::vector<double>& truth) {
    if (estimates.size() != truth.size())
        throw std::invalid_argument("error_metrics: length mismatch");
    if (estimates.empty()) throw std::invalid_argument("error_metrics: empty input");
    ErrorMetrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!(truth[i] > 0.0))
            throw std::invalid_argument("error_metrics: relative metrics need truth > 0");
        const double d = estimates[i] - truth[i];
        m.mse += d * d;
        m.mae += std::fabs(d);
        m.msre += d * d / truth[i];
        m.mare += std::fabs(d) / truth[i];
    }
    const double n = static_cast<double>(truth.size());
    m.mse /= n;
    m.mae /= n;
    m.msre /= n;
    m.mare /= n;
    return m;
}

Interval pointwise_ci(const std::vector<double>& draws, double level) {
    if (draws.size() < 100) throw std::invalid_argument("pointwise_ci: need at least 100 draws");
    if (!(level >= 0.0 && level < 1.0)) throw std::invalid_argument("pointwise_ci: bad level");
    std::vector<double> sorted(draws);
    std::sort(sorted.begin(), sorted.end());
    const double tail = 0.5 * (1.0 - level);
    return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

std::vector<Interval> joint_band(const Eigen::MatrixXd& draws, double level,
                                 std::vector<int>* excluded) {
    const Eigen::Index n = draws.rows(), q = draws.cols();
    if (n < 500) throw std::invalid_argument("joint_band: need at least 500 draws");
    if (!(level > 0.0 && level <= 1.0)) throw std::invalid_argument("joint_band: bad level");

    Eigen::VectorXd mean = draws.colwise().mean();
    Eigen::VectorXd sd(q);
    for (Eigen::Index j = 0; j < q; ++j)
        sd(j) = std::sqrt((draws.col(j).array() - mean(j)).square().sum() / (n - 1));

    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < q; ++j) {
        if (sd(j) > 0.0)
            keep.push_back(j);
        else if (excluded)
            excluded->push_back(static_cast<int>(j));
    }
    if (keep.empty()) throw std::runtime_error("joint_band: all quantities degenerate");

    std::vector<double> dmax(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = 0.0;
        for (Eigen::Index j : keep)
            d = std::max(d, std::fabs(draws(i, j) - mean(j)) / sd(j));
        dmax[i] = d;
    }
    const double k = quantile_of(std::move(dmax), level);

    std::vector<Interval> out(q);
    for (Eigen::Index j = 0; j < q; ++j)
        out[j] = {mean(j) - k * sd(j), mean(j) + k * sd(j)};
    return out;
}

double coverage(const std::vector<Interval>& intervals, const std::vector<double>& truth) {
    if (intervals.size() != truth.size()) throw std::invalid_argument("coverage: length mismatch");
    if (intervals.empty()) throw std::invalid_argument("coverage: empty input");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (intervals[i].contains(truth[i])) ++inside;
    return static_cast<double>(inside) / static_cast<double>(truth.size());
}

ScoreReport predictive_report(const Eigen::MatrixXd& pred_draws, const std::vector<double>& truth) {
    if (static_cast<std::size_t>(pred_draws.cols()) != truth.size())
        throw std::invalid_argument("predictive_report: support/truth mismatch");
    ScoreReport rep;
    std::vector<Interval> ci50(truth.size()), ci95(truth.size());
    for (std::size_t j = 0; j < truth.size(); ++j) {
        const Eigen::VectorXd col = pred_draws.col(static_cast<Eigen::Index>(j));
        std::vector<double> d(col.data(), col.data() + col.size());
        const double pm = mean_of(d);
        const double err = pm - truth[j];
        rep.bias += err;
        rep.mspe += err * err;
        rep.mape += std::fabs(err);
        ci50[j] = pointwise_ci(d, 0.50);
        ci95[j] = pointwise_ci(d, 0.95);
    }
    const double n = static_cast<double>(truth.size());
    rep.bias /= n;
    rep.mspe /= n;
    rep.mape /= n;
    rep.pi_coverage_50 = coverage(ci50, truth);
    rep.pi_coverage_95 = coverage(ci95, truth);
    return rep;
}

}  // namespace disagg
