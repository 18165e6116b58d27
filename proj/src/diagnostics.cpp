#include "disagg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace disagg {

namespace {

double segment_mean(const std::vector<double>& x, std::size_t begin, std::size_t end) {
    double s = 0.0;
    for (std::size_t i = begin; i < end; ++i) s += x[i];
    return s / static_cast<double>(end - begin);
}

// autocovariance at the given lags for x[begin, end)
std::vector<double> autocov(const std::vector<double>& x, std::size_t begin, std::size_t end,
                            int max_lag) {
    const std::size_t n = end - begin;
    const double m = segment_mean(x, begin, end);
    std::vector<double> g(max_lag + 1, 0.0);
    for (int lag = 0; lag <= max_lag; ++lag) {
        double s = 0.0;
        for (std::size_t i = begin; i + lag < end; ++i) s += (x[i] - m) * (x[i + lag] - m);
        g[lag] = s / static_cast<double>(n);
    }
    return g;
}

// spectral density at frequency zero via a Bartlett lag window
double spectral0(const std::vector<double>& x, std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    const int L = std::max(1, static_cast<int>(std::floor(std::pow(static_cast<double>(n), 0.4))));
    const auto g = autocov(x, begin, end, L);
    double s = g[0];
    for (int k = 1; k <= L; ++k) s += 2.0 * (1.0 - static_cast<double>(k) / (L + 1)) * g[k];
    return std::max(s, 0.0);
}

}  // namespace

double geweke_z(const std::vector<double>& chain, double frac_a, double frac_b) {
    const std::size_t n = chain.size();
    if (n < 100) throw std::invalid_argument("geweke: chain shorter than 100");
    if (!(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0))
        throw std::invalid_argument("geweke: invalid window fractions");
    const std::size_t na = std::max<std::size_t>(10, static_cast<std::size_t>(frac_a * n));
    const std::size_t nb = std::max<std::size_t>(10, static_cast<std::size_t>(frac_b * n));
    const double mean_a = segment_mean(chain, 0, na);
    const double mean_b = segment_mean(chain, n - nb, n);
    const double g0a = autocov(chain, 0, na, 0)[0];
    const double g0b = autocov(chain, n - nb, n, 0)[0];
    const double scale = 1.0 + mean_a * mean_a + mean_b * mean_b;
    if (g0a <= 1e-13 * scale || g0b <= 1e-13 * scale)
        throw std::runtime_error("geweke: degenerate chain");
    const double va = spectral0(chain, 0, na) / static_cast<double>(na);
    const double vb = spectral0(chain, n - nb, n) / static_cast<double>(nb);
    const double denom = va + vb;
    if (!(denom > 0.0)) throw std::runtime_error("geweke: degenerate chain");
    return (mean_a - mean_b) / std::sqrt(denom);
}

double chain_ess(const std::vector<double>& chain) {
    const std::size_t n = chain.size();
    if (n < 4) return 0.0;
    const int max_lag = static_cast<int>(std::min<std::size_t>(n - 2, 2048));
    const auto g = autocov(chain, 0, n, max_lag);
    if (!(g[0] > 0.0)) return 0.0;

    // Geyer initial monotone sequence on Gamma_k = rho_{2k} + rho_{2k+1}
    double sum_gamma = 0.0;
    double prev = std::numeric_limits<double>::max();
    for (int k = 0; 2 * k + 1 <= max_lag; ++k) {
        double gamma = (g[2 * k] + g[2 * k + 1]) / g[0];
        if (gamma <= 0.0) break;
        gamma = std::min(gamma, prev);
        prev = gamma;
        sum_gamma += gamma;
    }
    const double iact = std::max(2.0 * sum_gamma - 1.0, 1.0);
    return static_cast<double>(n) / iact;
}

}  // namespace disagg
