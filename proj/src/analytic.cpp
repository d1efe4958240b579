#include "effc/analytic.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/polygamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <cmath>

#include "effc/rng.hpp"

namespace effc::analytic {

namespace {

// Arguments at or below this are handled by direct product recurrences;
// above it, log-gamma differences.
constexpr double kSmallArg = 20.0;

double lgamma_ts(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

void check_nk(std::int64_t n, std::int64_t k) {
    if (k < 1 || k > n) throw std::domain_error("require 1 <= k <= n");
}

double require_subcritical(const ModelParams& params) {
    const double theta = params.theta();
    if (theta >= 1.0)
        throw RegimeError("requires theta in (0,1); no stationary law on finite states");
    return theta;
}

// Stirling-series remainder J(x) with logGamma(x) = (x-1/2)ln x - x
// + ln(2 pi)/2 + J(x); truncation error below 1e-12 for x >= 30.
double stirling_tail(double x) {
    const double x2 = 1.0 / (x * x);
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0) * x2) * x2) / x;
}

// lgamma(x + s) - lgamma(x) for x >= 30 and small s, computed from (x, s)
// directly: forming x + s as a double first rounds s by up to ulp(x)/2,
// which psi(x) ~ ln(x) amplifies past the 1e-10 route-agreement budget.
double log_gamma_shift(double x, double s) {
    return (x + s - 0.5) * std::log1p(s / x) + s * std::log(x) - s + stirling_tail(x + s) -
           stirling_tail(x);
}

}  // namespace

double log_gamma_ratio(double a, double b) {
    if (std::min(a, b) >= 30.0) {
        // Direct lgamma differences lose ~ulp(lgamma) ~ 4e-9 relative at
        // a ~ 10^6; the rearranged Stirling difference is cancellation-free.
        const double d = a - b;
        return (b - 0.5) * std::log1p(d / b) + d * std::log(a) - d + stirling_tail(a) -
               stirling_tail(b);
    }
    return lgamma_ts(a) - lgamma_ts(b);
}

double gamma_ratio(double a, double b) {
    if (a <= kSmallArg && b <= kSmallArg && a > 0.0 && b > 0.0) {
        // Walk the smaller argument up to the larger by the Gamma recurrence.
        double ratio = 1.0;
        double lo = a, hi = b;
        bool inverted = false;
        if (lo > hi) {
            std::swap(lo, hi);
            inverted = true;
        }
        while (hi - lo >= 1.0) {
            hi -= 1.0;
            ratio *= hi;
        }
        if (hi != lo) ratio *= std::exp(lgamma_ts(hi) - lgamma_ts(lo));
        return inverted ? ratio : 1.0 / ratio;
    }
    return std::exp(log_gamma_ratio(a, b));
}

double p_descend_recurrence(const ModelParams& params, std::int64_t n, std::int64_t k) {
    check_nk(n, k);
    const double theta = params.theta();
    // Extended precision keeps the accumulated rounding of up to 2 * 10^6
    // multiplications below the 1e-10 agreement budget against the
    // log-gamma route.
    long double p = 1.0L;
    for (std::int64_t j = k; j < n; ++j)
        p *= static_cast<long double>(j) / (static_cast<long double>(j) + theta);
    return static_cast<double>(p);
}

double p_descend_loggamma(const ModelParams& params, std::int64_t n, std::int64_t k) {
    check_nk(n, k);
    const double theta = params.theta();
    if (n == k) return 1.0;
    const double nn = static_cast<double>(n), kk = static_cast<double>(k);
    const double numer =
        kk >= 30.0 ? log_gamma_shift(kk, theta) : lgamma_ts(kk + theta) - lgamma_ts(kk);
    const double denom =
        nn >= 30.0 ? log_gamma_shift(nn, theta) : lgamma_ts(nn + theta) - lgamma_ts(nn);
    return std::exp(numer - denom);
}

double p_descend(const ModelParams& params, std::int64_t n, std::int64_t k) {
    check_nk(n, k);
    if (n <= static_cast<std::int64_t>(kSmallArg)) return p_descend_recurrence(params, n, k);
    return p_descend_loggamma(params, n, k);
}

Eigen::VectorXd frag_state_pmf(const ModelParams& params, std::int64_t n) {
    if (n < 1) throw std::domain_error("frag_state_pmf: n >= 1 required");
    const double theta = params.theta();
    Eigen::VectorXd r(n);
    // Relative weights Gamma(k-1+theta)/Gamma(k) by upward recurrence,
    // normalized by their compensated sum. The normalizing constant equals
    // theta Gamma(n) Gamma(theta) / Gamma(n+theta) analytically, but dividing
    // by the computed sum keeps the pmf normalized to ~1e-15 at n = 10^4,
    // where a log-gamma evaluation of the constant would already carry ~1e-11.
    r(0) = 1.0;
    KahanSum sum;
    sum.add(1.0);
    for (std::int64_t k = 1; k < n; ++k) {
        r(k) = r(k - 1) * (k - 1 + theta) / k;
        sum.add(r(k));
    }
    r /= sum.value();
    return r;
}

double descent_time(const ModelParams& params, std::int64_t n, std::int64_t k) {
    check_nk(n, k);
    double t = 0.0;
    for (std::int64_t j = n; j > k; --j) t += 2.0 / (2.0 * params.lambda * j + params.c * j * (j - 1.0));
    return t;
}

double mean_time_to_frag(const ModelParams& params, std::int64_t n) {
    if (n < 1) throw std::domain_error("mean_time_to_frag: n >= 1 required");
    const Eigen::VectorXd r = frag_state_pmf(params, n);
    // t_k^{(n)} = T(n) - T(k) with T the prefix sum of the per-state means.
    double total = 0.0;
    double prefix_to_n = 0.0;
    for (std::int64_t j = 2; j <= n; ++j)
        prefix_to_n += 2.0 / (2.0 * params.lambda * j + params.c * j * (j - 1.0));
    double prefix_to_k = 0.0;  // T(k) for k = 1 is 0 (empty sum below 2)
    for (std::int64_t k = 1; k <= n; ++k) {
        if (k >= 2) prefix_to_k += 2.0 / (2.0 * params.lambda * k + params.c * k * (k - 1.0));
        const double t_k = prefix_to_n - prefix_to_k;
        total += (t_k + 1.0 / total_rate(params, static_cast<double>(k))) * r(k - 1);
    }
    return total;
}

double holding_time(const ModelParams& params, std::int64_t k) {
    if (k < 1) throw std::domain_error("holding_time: k >= 1 required");
    return 2.0 / (2.0 * params.lambda * k + params.c * k * (k - 1.0));
}

double stationary_pmf(const ModelParams& params, std::int64_t k) {
    const double theta = require_subcritical(params);
    if (k < 1) throw std::domain_error("stationary_pmf: k >= 1 required");
    // (1-theta)/Gamma(theta) * Gamma(k-1+theta)/Gamma(k+1)
    return (1.0 - theta) * gamma_ratio(k - 1.0 + theta, static_cast<double>(k) + 1.0) /
           gamma_ratio(theta, 1.0);
}

double stationary_tail_mass(const ModelParams& params, std::int64_t k) {
    const double theta = require_subcritical(params);
    if (k < 0) throw std::domain_error("stationary_tail_mass: k >= 0 required");
    if (k == 0) return 1.0;
    return gamma_ratio(static_cast<double>(k) + theta, static_cast<double>(k) + 1.0) /
           gamma_ratio(theta, 1.0);
}

PmfWithTail stationary_pmf_vector(const ModelParams& params, std::int64_t k_max) {
    const double theta = require_subcritical(params);
    if (k_max < 1) throw std::domain_error("stationary_pmf_vector: k_max >= 1 required");
    Eigen::VectorXd pmf(k_max);
    pmf(0) = 1.0 - theta;
    for (std::int64_t k = 1; k < k_max; ++k) pmf(k) = pmf(k - 1) * (k - 1 + theta) / (k + 1);
    return {std::move(pmf), stationary_tail_mass(params, k_max)};
}

double stationary_pgf(const ModelParams& params, double s) {
    const double theta = require_subcritical(params);
    if (s < 0.0 || s >= 1.0) throw std::domain_error("stationary_pgf: s in [0,1) required");
    return 1.0 - std::pow(1.0 - s, 1.0 - theta);
}

double hitting_time_from_zero(const ModelParams& params, std::int64_t k) {
    const double theta = require_subcritical(params);
    if (k < 1) throw std::domain_error("hitting_time_from_zero: k >= 1 required");
    return 2.0 / (params.c * (1.0 - theta) * k);
}

double excursion_reach_weight(const ModelParams& params, std::int64_t n) {
    if (n < 1) throw std::domain_error("excursion_reach_weight: n >= 1 required");
    const double theta = params.theta();
    return gamma_ratio(static_cast<double>(n) + theta, static_cast<double>(n));
}

double occupation_before_one(const ModelParams& params, std::int64_t k) {
    if (k < 2) throw std::domain_error("occupation_before_one: k >= 2 required");
    return holding_time(params, k) / p_descend(params, k, 1);
}

PhiMoments aldous_phi_moments(const ModelParams& params, std::int64_t j) {
    if (j < 1) throw std::domain_error("aldous_phi_moments: j >= 1 required");
    const double theta = params.theta();
    const double c = params.c;
    const double jj = static_cast<double>(j);
    // 1/(c C(i,2) + lambda i) = (2/(c(1-theta))) (1/(i-1+theta) - 1/i);
    // telescoping against the digamma series gives closed forms. theta == 1
    // collapses the partial fractions, so handle it separately.
    if (theta == 1.0) {
        const double mean = (2.0 / c) * boost::math::trigamma(jj + 1.0);
        const double var = (4.0 / (c * c)) * boost::math::polygamma(3, jj + 1.0) / 6.0;
        return {mean, var};
    }
    const double om = 1.0 - theta;
    const double dg = boost::math::digamma(jj + 1.0) - boost::math::digamma(jj + theta);
    const double mean = (2.0 / (c * om)) * dg;
    const double tg = boost::math::trigamma(jj + theta) + boost::math::trigamma(jj + 1.0);
    const double var = (4.0 / (c * c * om * om)) * (tg - (2.0 / om) * dg);
    return {mean, var};
}

double supercritical_series_partial_sum(const ModelParams& params, std::int64_t m) {
    if (m < 1) throw std::domain_error("partial sum: m >= 1 required");
    const double theta = params.theta();
    // g_k = Gamma(k+theta)/Gamma(k), g_1 = Gamma(1+theta)
    double g = gamma_ratio(1.0 + theta, 1.0);
    const double g1 = g;
    double s = 0.0;
    for (std::int64_t k = 1; k <= m; ++k) {
        if (k > 1) g *= (k - 1.0 + theta) / (k - 1.0);
        s += g / (g1 * k * (k - 1.0 + theta));
    }
    return s;
}

}  // namespace effc::analytic
