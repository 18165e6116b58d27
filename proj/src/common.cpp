#include "disagg/common.hpp"

#include <cstdio>

namespace disagg {

// Wichura (1988), algorithm AS241 PPND16
double norm_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw std::domain_error("norm_quantile: p outside [0,1]");
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                  3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return (q < 0.0) ? -val : val;
}

TruncNormMoments truncnorm_lower_moments(double a) {
    const double lam = norm_hazard(a);
    const double mean = lam;
    const double var = 1.0 + a * lam - lam * lam;
    // var is in (0,1]; guard against cancellation for very large a
    return {mean, std::max(var, 1e-12)};
}

double rtruncnorm_lower(Rng& rng, double a) {
    if (a < 0.4) {
        // plain rejection from the normal, acceptance >= 1 - Phi(0.4) ~ 0.34
        double z;
        do {
            z = rng.normal();
        } while (z <= a);
        return z;
    }
    // Robert (1995) translated-exponential rejection for the tail
    const double lam = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
        const double x = a + rng.exponential(lam);
        const double d = x - lam;
        if (std::log(rng.uniform()) <= -0.5 * d * d) return x;
    }
}

double rtruncnorm_lower_sum(Rng& rng, std::int64_t n, double a, std::int64_t exact_max) {
    if (n <= 0) return 0.0;
    if (n > exact_max) {
        const auto m = truncnorm_lower_moments(a);
        const double dn = static_cast<double>(n);
        return dn * m.mean + std::sqrt(dn * m.var) * rng.normal();
    }
    double s = 0.0;
    // inverse CDF through the survival mass, computed once per batch
    const double sf = norm_sf(a);
    if (sf > 0.0) {
        for (std::int64_t i = 0; i < n; ++i) s += -norm_quantile(sf * rng.uniform());
        return s;
    }
    for (std::int64_t i = 0; i < n; ++i) s += rtruncnorm_lower(rng, a);
    return s;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw std::invalid_argument("quantile of empty vector");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

double quantile_of(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    return quantile_sorted(x, p);
}

std::string to_hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return std::string(buf);
}

}  // namespace disagg
