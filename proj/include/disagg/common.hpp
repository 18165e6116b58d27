#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace disagg {

// ---------------------------------------------------------------------------
// RNG: xoshiro256++ seeded through splitmix64. Substreams for observations
// and cells are derived by mixing (seed, iteration, index) so augmentation
// is reproducible regardless of evaluation order.
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t s = a;
    s = splitmix64(s) ^ (b + 0x9e3779b97f4a7c15ull);
    s = splitmix64(s) ^ (c + 0xbf58476d1ce4e5b9ull);
    return splitmix64(s);
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 1) { reseed(seed); }

    void reseed(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
        has_cached_normal_ = false;
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ull; }

    result_type operator()() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on (0,1); never returns 0 or 1
    double uniform() {
        const double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal, Marsaglia polar with caching
    double normal() {
        if (has_cached_normal_) {
            has_cached_normal_ = false;
            return cached_normal_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cached_normal_ = v * f;
        has_cached_normal_ = true;
        return u * f;
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double gamma(double shape, double scale) {
        std::gamma_distribution<double> d(shape, scale);
        return d(*this);
    }

    // inverse gamma with density ~ x^{-shape-1} exp(-rate/x)
    double inverse_gamma(double shape, double rate) {
        return 1.0 / gamma(shape, 1.0 / rate);
    }

    std::int64_t binomial(std::int64_t n, double p) {
        if (n <= 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        std::binomial_distribution<std::int64_t> d(n, p);
        return d(*this);
    }

    std::uint64_t uniform_int(std::uint64_t n) { return (*this)() % n; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// ---------------------------------------------------------------------------
// Normal distribution special functions
// ---------------------------------------------------------------------------

inline constexpr double kSqrt2 = 1.4142135623730950488;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

inline double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// survival function 1 - Phi(x), accurate in the upper tail
inline double norm_sf(double x) { return 0.5 * std::erfc(x / kSqrt2); }

// scaled complementary error function exp(x^2) erfc(x), x >= 0
inline double erfcx(double x) {
    if (x < 2.5) return std::exp(x * x) * std::erfc(x);
    // Laplace continued fraction, converges quickly for x >= 2.5
    double num = 0.0;
    for (int k = 20; k >= 1; --k) num = 0.5 * k / (x + num);
    return (1.0 / 1.7724538509055160273) / (x + num);
}

// log Phi(x), stable for deeply negative x
inline double log_norm_cdf(double x) {
    if (x > -1.0) return std::log1p(-norm_sf(x));
    // Phi(x) = 0.5 erfc(-x/sqrt2) = 0.5 exp(-x^2/2) erfcx(-x/sqrt2)
    return std::log(0.5 * erfcx(-x / kSqrt2)) - 0.5 * x * x;
}

inline double log_norm_sf(double x) { return log_norm_cdf(-x); }

// inverse normal CDF, Wichura's AS241 (double precision)
double norm_quantile(double p);

// hazard phi(a)/(1-Phi(a)), stable for large a via erfcx
inline double norm_hazard(double a) {
    if (a < -30.0) return 0.0;
    return 0.79788456080286535588 / erfcx(a / kSqrt2);  // sqrt(2/pi)/erfcx
}

// ---------------------------------------------------------------------------
// Truncated standard normal on (a, +inf)
// ---------------------------------------------------------------------------

// mean and variance of Z ~ N(0,1) | Z > a
struct TruncNormMoments {
    double mean;
    double var;
};

TruncNormMoments truncnorm_lower_moments(double a);

// one draw of Z ~ N(0,1) | Z > a
double rtruncnorm_lower(Rng& rng, double a);

// sum of n iid draws of Z ~ N(0,1) | Z > a; exact below exact_max, else
// a normal approximation of the sufficient statistic
double rtruncnorm_lower_sum(Rng& rng, std::int64_t n, double a, std::int64_t exact_max);

// ---------------------------------------------------------------------------
// Small statistics helpers
// ---------------------------------------------------------------------------

inline double mean_of(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("mean of empty vector");
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

inline double variance_of(const std::vector<double>& x) {
    if (x.size() < 2) return 0.0;
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

inline double sd_of(const std::vector<double>& x) { return std::sqrt(variance_of(x)); }

// quantile with linear interpolation between order statistics (type 7)
double quantile_sorted(const std::vector<double>& sorted, double p);
double quantile_of(std::vector<double> x, double p);

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double clamp01(double x, double eps) { return std::clamp(x, eps, 1.0 - eps); }

// ---------------------------------------------------------------------------
// FNV-1a hashing for config fingerprints
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

}  // namespace disagg
