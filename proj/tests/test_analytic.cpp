#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>

#include "effc/analytic.hpp"
#include "effc/model.hpp"
#include "effc/rng.hpp"

using namespace effc;
namespace an = effc::analytic;

namespace {
ModelParams from_theta(double c, double theta) { return {c, c * theta / 2.0}; }
}  // namespace

TEST_CASE("regime classification") {
    CHECK(classify_regime({1.0, 0.2}) == Regime::Subcritical);
    CHECK(classify_regime({1.0, 0.5}) == Regime::Critical);
    CHECK(classify_regime({1.0, 0.8}) == Regime::Supercritical);
    CHECK(ModelParams(1.0, 0.2).theta() == doctest::Approx(0.4));
    CHECK_THROWS_AS(ModelParams(0.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(ModelParams(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("descent probability p_{n,k}") {
    const ModelParams p = from_theta(1.0, 0.5);
    CHECK(an::p_descend(p, 4, 1) == doctest::Approx(16.0 / 35.0).epsilon(1e-12));
    CHECK(an::p_descend(p, 7, 7) == 1.0);
    CHECK_THROWS_AS(an::p_descend(p, 4, 5), std::domain_error);
    CHECK_THROWS_AS(an::p_descend(p, 4, 0), std::domain_error);

    // large-n asymptotic Gamma(1+theta) * n^{-theta}
    const ModelParams q = from_theta(1.0, 0.4);
    const double n = 1e6;
    const double asym = boost::math::tgamma(1.4) * std::pow(n, -0.4);
    CHECK(an::p_descend(q, 1000000, 1) == doctest::Approx(asym).epsilon(1e-3));
}

TEST_CASE("p_{n,k} dual evaluation routes agree") {
    for (double theta : {0.1, 0.4, 0.9}) {
        const ModelParams p = from_theta(1.0, theta);
        for (std::int64_t n : {5L, 100L, 10000L, 1000000L}) {
            for (std::int64_t k : {1L, 2L, 5L}) {
                const double a = an::p_descend_recurrence(p, n, k);
                const double b = an::p_descend_loggamma(p, n, k);
                CHECK(a == doctest::Approx(b).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("p_{n,k} monotone decreasing in n") {
    const ModelParams p = from_theta(1.0, 0.4);
    double prev = 2.0;
    for (std::int64_t n : {3L, 10L, 100L, 1000L}) {
        const double v = an::p_descend(p, n, 3);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("pre-fragmentation state pmf") {
    const ModelParams p = from_theta(1.0, 0.5);
    SUBCASE("n=1 is a point mass") {
        const auto r = an::frag_state_pmf(p, 1);
        REQUIRE(r.size() == 1);
        CHECK(r(0) == doctest::Approx(1.0));
    }
    SUBCASE("n=2 two-state enumeration") {
        const auto r = an::frag_state_pmf(p, 2);
        REQUIRE(r.size() == 2);
        CHECK(r(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
        CHECK(r(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
    SUBCASE("leading entry matches the closed form") {
        for (double theta : {0.4, 0.8}) {
            const ModelParams q = from_theta(1.0, theta);
            for (std::int64_t n : {10L, 1000L}) {
                const double closed = theta * an::gamma_ratio(theta, 1.0) *
                                      an::gamma_ratio(static_cast<double>(n),
                                                      static_cast<double>(n) + theta);
                CHECK(an::frag_state_pmf(q, n)(0) == doctest::Approx(closed).epsilon(1e-9));
            }
        }
    }
    SUBCASE("normalization across theta and n") {
        for (double theta : {0.25, 0.4, 0.75, 1.5}) {
            const ModelParams q = from_theta(1.0, theta);
            for (std::int64_t n : {50L, 1000L, 10000L}) {
                const auto r = an::frag_state_pmf(q, n);
                KahanSum sum;
                for (Eigen::Index i = 0; i < r.size(); ++i) {
                    CHECK(r(i) > 0.0);
                    sum.add(r(i));
                }
                CHECK(sum.value() == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }
    CHECK_THROWS_AS(an::frag_state_pmf(p, 0), std::domain_error);
}

TEST_CASE("conditional descent time") {
    const ModelParams p(1.0, 0.25);
    CHECK(an::descent_time(p, 5, 5) == 0.0);
    CHECK(an::descent_time(p, 2, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    const ModelParams q = from_theta(1.0, 0.5);
    const double t = an::descent_time(q, 10000, 10);
    CHECK(t > 0.0);
    CHECK(t <= 2.0 / 10.0);  // bounded by 2/(c k)
    CHECK_THROWS_AS(an::descent_time(p, 2, 3), std::domain_error);
}

TEST_CASE("mean time to first fragmentation") {
    const ModelParams p(1.0, 0.25);
    CHECK(an::mean_time_to_frag(p, 1) == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(an::mean_time_to_frag(p, 2) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));

    // Cauchy as n grows: the limit from infinity is 0 and the value decays
    // like n^{-theta}, so successive differences shrink by 10^{theta} per
    // decade of n.
    const ModelParams q = from_theta(1.0, 0.4);
    const double a = an::mean_time_to_frag(q, 1000);
    const double b = an::mean_time_to_frag(q, 10000);
    const double c = an::mean_time_to_frag(q, 100000);
    CHECK(a > b);
    CHECK(b > c);
    CHECK(c > 0.0);
    CHECK((a - b) / (b - c) == doctest::Approx(std::pow(10.0, 0.4)).epsilon(0.05));
}

TEST_CASE("holding times") {
    CHECK(an::holding_time({1.0, 0.2}, 1) == doctest::Approx(5.0));
    CHECK(an::holding_time({1.0, 0.25}, 2) == doctest::Approx(2.0 / 3.0));
    CHECK(an::holding_time({1.0, 0.25}, 10) == doctest::Approx(2.0 / 95.0));
}

TEST_CASE("stationary pmf") {
    CHECK(an::stationary_pmf(from_theta(1.0, 0.4), 1) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(an::stationary_pmf(from_theta(1.0, 0.5), 2) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK_THROWS_AS(an::stationary_pmf(from_theta(1.0, 1.0), 1), RegimeError);
    CHECK_THROWS_AS(an::stationary_pmf(from_theta(1.0, 1.5), 1), RegimeError);

    // heavy-tail asymptotic ((1-theta)/Gamma(theta)) k^{-(2-theta)}
    const ModelParams p = from_theta(1.0, 0.4);
    const double asym = (0.6 / boost::math::tgamma(0.4)) * std::pow(100.0, -1.6);
    CHECK(an::stationary_pmf(p, 100) == doctest::Approx(asym).epsilon(0.01));
}

TEST_CASE("stationary pmf vector carries exact tail mass") {
    const ModelParams p = from_theta(1.0, 0.5);
    const auto [pmf, tail] = an::stationary_pmf_vector(p, 10000);
    REQUIRE(pmf.size() == 10000);
    KahanSum sum;
    for (Eigen::Index i = 0; i < pmf.size(); ++i) sum.add(pmf(i));
    CHECK(sum.value() + tail == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(tail == doctest::Approx(an::stationary_tail_mass(p, 10000)));
    // direct check of the closed form against 1 - partial sum
    CHECK(tail == doctest::Approx(1.0 - sum.value()).epsilon(1e-8));
}

TEST_CASE("stationary PGF") {
    const ModelParams p = from_theta(1.0, 0.5);
    CHECK(an::stationary_pgf(p, 0.0) == 0.0);
    CHECK(an::stationary_pgf(p, 0.75) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(an::stationary_pgf(p, 1.0), std::domain_error);
    CHECK_THROWS_AS(an::stationary_pgf(p, -0.1), std::domain_error);

    // partial sums of the pmf converge to the PGF
    KahanSum sum;
    double s_pow = 1.0;
    for (std::int64_t k = 1; k <= 2000; ++k) {
        s_pow *= 0.75;
        sum.add(an::stationary_pmf(p, k) * s_pow);
    }
    CHECK(sum.value() == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("hitting time from infinity") {
    CHECK(an::hitting_time_from_zero(from_theta(1.0, 0.4), 10) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(an::hitting_time_from_zero(from_theta(1.0, 0.5), 1) == doctest::Approx(4.0));
    CHECK(an::hitting_time_from_zero(from_theta(2.0, 0.5), 4) == doctest::Approx(0.5));
    CHECK_THROWS_AS(an::hitting_time_from_zero(from_theta(1.0, 1.0), 5), RegimeError);

    // strictly decreasing in k
    const ModelParams p = from_theta(1.0, 0.4);
    double prev = an::hitting_time_from_zero(p, 1);
    for (std::int64_t k = 2; k <= 20; ++k) {
        const double v = an::hitting_time_from_zero(p, k);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("excursion reach weight") {
    const ModelParams p = from_theta(1.0, 0.5);
    CHECK(an::excursion_reach_weight(p, 1) == doctest::Approx(0.8862269255).epsilon(1e-9));
    for (double theta : {0.3, 0.5, 0.8}) {
        const ModelParams q = from_theta(1.0, theta);
        CHECK(an::excursion_reach_weight(q, 2) / an::excursion_reach_weight(q, 1) ==
              doctest::Approx(1.0 + theta).epsilon(1e-12));
    }
    // Stirling expansion n^theta (1 + theta(theta-1)/(2n))
    const ModelParams q = from_theta(1.0, 0.4);
    const double n = 1e4;
    const double stirling = std::pow(n, 0.4) * (1.0 + 0.4 * (0.4 - 1.0) / (2.0 * n));
    CHECK(an::excursion_reach_weight(q, 10000) == doctest::Approx(stirling).epsilon(1e-3));
    // increasing in n
    CHECK(an::excursion_reach_weight(q, 50) < an::excursion_reach_weight(q, 51));
}

TEST_CASE("expected occupation below the ceiling before hitting 1") {
    CHECK(an::occupation_before_one({1.0, 0.25}, 2) == doctest::Approx(1.0).epsilon(1e-12));
    const ModelParams p = from_theta(1.0, 0.5);
    CHECK(an::occupation_before_one(p, 10) ==
          doctest::Approx(an::holding_time(p, 10) / an::p_descend(p, 10, 1)).epsilon(1e-12));
    // theta -> 0: single visit, so just the holding time
    const ModelParams tiny(1.0, 1e-12);
    CHECK(an::occupation_before_one(tiny, 7) ==
          doctest::Approx(an::holding_time(tiny, 7)).epsilon(1e-6));
}

TEST_CASE("per-level descent time moments") {
    SUBCASE("pure Kingman telescopes exactly") {
        const ModelParams p(1.0, 0.0);
        const auto m = an::aldous_phi_moments(p, 100);
        CHECK(m.mean == doctest::Approx(2.0 / 100.0).epsilon(1e-12));
    }
    SUBCASE("asymptotics at j=100") {
        const ModelParams p(1.0, 0.2);
        const auto m = an::aldous_phi_moments(p, 100);
        CHECK(m.mean == doctest::Approx(0.02).epsilon(0.02));
        CHECK(m.variance == doctest::Approx(4.0 / 3.0e6).epsilon(0.05));
    }
    SUBCASE("closed form equals direct series summation") {
        for (double lambda : {0.2, 0.5}) {
            const ModelParams p(1.0, lambda);
            for (std::int64_t j : {1L, 10L, 250L}) {
                KahanSum mean, var;
                const std::int64_t cap = 10000000;
                for (std::int64_t i = j + 1; i <= cap; ++i) {
                    const double rate = total_rate(p, static_cast<double>(i));
                    mean.add(1.0 / rate);
                    var.add(1.0 / (rate * rate));
                }
                // remaining mean tail is ~ 2/(c*cap); variance tail negligible
                const auto m = an::aldous_phi_moments(p, j);
                CHECK(m.mean ==
                      doctest::Approx(mean.value() + 2.0 / static_cast<double>(cap)).epsilon(1e-5));
                CHECK(m.variance == doctest::Approx(var.value()).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("supercritical series is non-Cauchy exactly when theta >= 1") {
    for (double theta : {1.0, 1.2}) {
        const ModelParams p = from_theta(1.0, theta);
        for (std::int64_t m : {100L, 1000L, 10000L, 100000L}) {
            const double gap = an::supercritical_series_partial_sum(p, 2 * m) -
                               an::supercritical_series_partial_sum(p, m);
            CHECK(gap >= 0.1);
        }
    }
    const ModelParams sub = from_theta(1.0, 0.5);
    const double gap = an::supercritical_series_partial_sum(sub, 200000) -
                       an::supercritical_series_partial_sum(sub, 100000);
    CHECK(gap < 0.01);
}

TEST_CASE("gamma ratio crossover is seamless") {
    // values straddling the small-argument/log-gamma switch
    for (double a : {18.3, 19.9, 20.1, 25.0}) {
        const double direct = std::exp(std::lgamma(a) - std::lgamma(a - 3.5));
        CHECK(an::gamma_ratio(a, a - 3.5) == doctest::Approx(direct).epsilon(1e-12));
    }
    CHECK(an::gamma_ratio(5.0, 5.0) == 1.0);
}
