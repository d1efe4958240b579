#include <doctest.h>

#include <cmath>
#include <vector>

#include "effc/analytic.hpp"
#include "effc/dynamics.hpp"
#include "effc/excursions.hpp"
#include "effc/rng.hpp"

using namespace effc;
namespace exc = effc::excursions;

namespace {

ModelParams from_theta(double c, double theta) { return {c, c * theta / 2.0}; }

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - sx / n) * (x[i] - sx / n);
        sxy += (x[i] - sx / n) * (y[i] - sy / n);
    }
    return sxy / sxx;
}

}  // namespace

TEST_CASE("segmentation") {
    SUBCASE("descent with no fragmentation is one clipped excursion") {
        SplitMix64 rng(201, 0);
        const auto traj = dynamics::simulate_path({1.0, 0.0}, 10, 100.0, 10, rng);
        const auto segs = exc::segment(traj, 10);
        REQUIRE(segs.size() == 1);
        CHECK(segs[0].from_ceiling);
        CHECK(segs[0].clipped);
        CHECK(segs[0].min_state == 1);
        CHECK(segs[0].end_time == 100.0);

        SplitMix64 rng2(202, 0);
        const auto below = dynamics::simulate_path({1.0, 0.0}, 10, 100.0, 5, rng2);
        const auto segs2 = exc::segment(below, 10);
        REQUIRE(segs2.size() == 1);
        CHECK_FALSE(segs2[0].from_ceiling);  // started below the ceiling
        CHECK(segs2[0].start_time == 0.0);
        CHECK(segs2[0].clipped);
    }
    SUBCASE("hand-built path") {
        dynamics::Trajectory traj{
            {1.0, 0.25}, 6, 6, 10.0, 0, {1, 2, 3, 4, 5}, {5, 4, 6, 3, 2}, false};
        const auto segs = exc::segment(traj, 6);
        REQUIRE(segs.size() == 2);
        CHECK(segs[0].start_time == 1.0);
        CHECK(segs[0].end_time == 3.0);
        CHECK(segs[0].min_state == 4);
        CHECK(segs[0].from_ceiling);
        CHECK_FALSE(segs[0].clipped);
        CHECK(segs[1].start_time == 4.0);
        CHECK(segs[1].end_time == 10.0);
        CHECK(segs[1].min_state == 2);
        CHECK(segs[1].clipped);
    }
    SUBCASE("never leaving the ceiling yields no excursions") {
        // fragmentation-only self-loops at the ceiling
        dynamics::Trajectory traj{{1.0, 0.5}, 4, 4, 5.0, 0, {1.0, 2.0}, {4, 4}, false};
        CHECK(exc::segment(traj, 4).empty());
    }
    SUBCASE("wrong ceiling rejected") {
        dynamics::Trajectory traj{{1.0, 0.5}, 4, 4, 5.0, 0, {}, {}, false};
        CHECK_THROWS_AS(exc::segment(traj, 5), std::invalid_argument);
    }
}

TEST_CASE("excursion structure invariants on a simulated path") {
    SplitMix64 rng(211, 0);
    const auto traj = dynamics::simulate_path(from_theta(1.0, 0.5), 50, 500.0, 50, rng);
    const auto segs = exc::segment(traj, 50);
    REQUIRE(!segs.empty());

    SUBCASE("time conservation") {
        double excursion_time = 0.0;
        for (const auto& e : segs) excursion_time += e.duration();
        const double ceiling_time = dynamics::occupation_histogram(traj).at(50);
        CHECK(excursion_time + ceiling_time == doctest::Approx(500.0).epsilon(1e-9));
    }
    SUBCASE("disjoint, ordered, strictly decreasing inside") {
        double prev_end = 0.0;
        for (const auto& e : segs) {
            CHECK(e.start_time >= prev_end);
            CHECK(e.end_time > e.start_time);
            prev_end = e.end_time;
            // interior states strictly decrease (each state visited at most once)
            for (std::size_t i = e.begin_event; i + 1 < e.end_event; ++i) {
                if (traj.states[i + 1] == 50) break;  // the closing ceiling entry
                CHECK(traj.states[i + 1] == traj.states[i] - 1);
            }
        }
    }
}

TEST_CASE("streaming collector matches trajectory segmentation") {
    const ModelParams p = from_theta(1.0, 0.5);
    const std::int64_t n_max = 100;  // speed levels need ceiling >= 10x the level
    const double t_end = 500.0;
    SplitMix64 r1(211, 0);
    const auto traj = dynamics::simulate_path(p, n_max, t_end, n_max, r1);
    const auto segs = exc::segment(traj, n_max);

    exc::ExcursionCollector collector(n_max, {10});
    SplitMix64 r2(211, 0);
    dynamics::run_chain(
        p, n_max, t_end, n_max, r2,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            return collector.on_jump(t, from, to, d);
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });

    const auto& summaries = collector.excursions();
    REQUIRE(summaries.size() == segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        CHECK(summaries[i].start_time == segs[i].start_time);
        CHECK(summaries[i].end_time == segs[i].end_time);
        CHECK(summaries[i].min_state == segs[i].min_state);
        CHECK(summaries[i].from_ceiling == segs[i].from_ceiling);
        CHECK(summaries[i].clipped == segs[i].clipped);
    }
    const double ceiling_time = dynamics::occupation_histogram(traj).at(n_max);
    CHECK(collector.ceiling_time() == doctest::Approx(ceiling_time).epsilon(1e-9));

    // phi-based speed statistics agree with the trajectory-based estimator
    const auto est = exc::speed_estimate(traj, segs, {10});
    double sum = 0.0;
    std::int64_t count = 0;
    for (const auto& s : summaries) {
        if (!s.from_ceiling || std::isnan(s.phi[0])) continue;
        sum += p.c * 10.0 * s.phi[0] / 2.0;
        ++count;
    }
    REQUIRE(count == est.levels[0].count);
    CHECK(sum / static_cast<double>(count) == doctest::Approx(est.levels[0].mean_ratio));
}

TEST_CASE("pooled occupation fractions approach the stationary law") {
    const ModelParams p = from_theta(1.0, 0.4);
    const std::int64_t n_max = 500;
    std::vector<dynamics::Trajectory> trajs;
    for (int i = 0; i < 50; ++i) {
        SplitMix64 rng(223, static_cast<std::uint64_t>(i));
        trajs.push_back(dynamics::simulate_path(p, n_max, 400.0, n_max, rng));
    }
    const auto emp = exc::empirical_stationary(trajs);
    CHECK(emp.tv_to_analytic < 0.05);
    CHECK(emp.pmf.at(1) == doctest::Approx(0.6).epsilon(0.05));

    // pmf tail exponent ~ 2 - theta = 1.6 over k in [10, 100]
    std::vector<double> x, y;
    for (std::int64_t k = 10; k <= 100; ++k) {
        auto it = emp.pmf.find(k);
        if (it == emp.pmf.end() || it->second <= 0.0) continue;
        x.push_back(std::log(static_cast<double>(k)));
        y.push_back(std::log(it->second));
    }
    REQUIRE(x.size() > 50);
    CHECK(ols_slope(x, y) == doctest::Approx(-1.6).epsilon(0.0625));  // +-0.1
}

TEST_CASE("speed estimator is exact for pure Kingman descents") {
    const ModelParams p(1.0, 0.0);
    const std::int64_t n_max = 10000;
    double sum = 0.0;
    std::int64_t count = 0;
    for (int i = 0; i < 200; ++i) {
        SplitMix64 rng(227, static_cast<std::uint64_t>(i));
        const auto traj = dynamics::simulate_path(p, n_max, 10.0, n_max, rng);
        const auto segs = exc::segment(traj, n_max);
        const auto est = exc::speed_estimate(traj, segs, {100});
        if (est.levels[0].count > 0) {
            sum += est.levels[0].mean_ratio * static_cast<double>(est.levels[0].count);
            count += est.levels[0].count;
        }
    }
    REQUIRE(count == 200);
    const double mean = sum / static_cast<double>(count);
    // E[ratio] = 1 - j/n_max = 0.99 exactly; Monte Carlo noise ~ 0.004
    CHECK(mean == doctest::Approx(0.99).epsilon(0.015));

    SplitMix64 rng(229, 0);
    const auto traj = dynamics::simulate_path(p, 100, 10.0, 100, rng);
    const auto segs = exc::segment(traj, 100);
    CHECK_THROWS_AS(exc::speed_estimate(traj, segs, {50}), std::domain_error);
    CHECK_THROWS_AS(exc::speed_estimate(traj, segs, {}), std::invalid_argument);
}

TEST_CASE("reach statistics") {
    const ModelParams p = from_theta(1.0, 0.5);
    const std::int64_t n_max = 300;
    exc::ExcursionCollector collector(n_max);
    SplitMix64 rng(233, 0);
    std::int64_t deep = 0;
    dynamics::run_chain(
        p, n_max, 1e18, n_max, rng,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            collector.on_jump(t, from, to, d);
            if (to == 2) ++deep;
            return deep < 3000;
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });

    SUBCASE("reach-count ratio follows the excursion weights") {
        const auto fit = exc::reach_tail_exponent(collector.excursions(), {1, 2});
        REQUIRE(fit.counts.size() == 2);
        const double n2 = static_cast<double>(fit.counts[1]);
        const double ratio = static_cast<double>(fit.counts[0]) / n2;
        // w(1)/w(2) = 1/(1+theta) = 2/3
        const double sigma = std::sqrt((2.0 / 3.0) * (1.0 / 3.0) / n2);
        CHECK(std::abs(ratio - 2.0 / 3.0) <= 3.0 * sigma);
    }
    SUBCASE("log-log slope near theta, counts nested") {
        const auto fit =
            exc::reach_tail_exponent(collector.excursions(), {2, 3, 5, 8, 13, 21, 30});
        CHECK_FALSE(fit.degenerate);
        for (std::size_t i = 1; i < fit.counts.size(); ++i)
            CHECK(fit.counts[i] >= fit.counts[i - 1]);
        CHECK(fit.slope == doctest::Approx(0.5).epsilon(0.3));  // +-0.15
    }
    SUBCASE("insufficient range is flagged") {
        const auto fit = exc::reach_tail_exponent(collector.excursions(), {1, 2});
        CHECK(fit.degenerate);
    }
}

TEST_CASE("box dimension estimator") {
    SUBCASE("exact on a generation-8 Cantor set") {
        std::vector<std::pair<double, double>> intervals{{0.0, 1.0}};
        for (int depth = 0; depth < 8; ++depth) {
            std::vector<std::pair<double, double>> next;
            for (const auto& [a, b] : intervals) {
                const double w = (b - a) / 3.0;
                next.emplace_back(a, a + w);
                next.emplace_back(b - w, b);
            }
            intervals = std::move(next);
        }
        // nudge endpoints off the grid lines so floating-point floor is exact
        for (auto& [a, b] : intervals) {
            a += 1e-9;
            b -= 1e-9;
        }
        std::vector<double> scales;
        for (int k = 0; k <= 8; ++k) scales.push_back(std::pow(3.0, -k));
        const auto est = exc::box_dimension_from_intervals(intervals, scales);
        CHECK_FALSE(est.degenerate);
        for (std::size_t i = 0; i <= 8; ++i)
            CHECK(est.counts[i] == (std::int64_t{1} << i));
        CHECK(est.slope == doctest::Approx(std::log(2.0) / std::log(3.0)).epsilon(1e-6));
        CHECK(est.r2 == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("counts grow as the boxes shrink") {
        SplitMix64 rng(239, 0);
        const auto traj = dynamics::simulate_path(from_theta(1.0, 0.5), 100, 200.0, 100, rng);
        std::vector<double> scales;
        for (int i = 0; i <= 12; ++i) scales.push_back(std::pow(10.0, 1.0 - 0.25 * i));
        const auto est = exc::box_dimension(traj, 100, scales);
        for (std::size_t i = 1; i < est.counts.size(); ++i)
            CHECK(est.counts[i] >= est.counts[i - 1]);
    }
    SUBCASE("no zero set is degenerate") {
        SplitMix64 rng(241, 0);
        const auto traj = dynamics::simulate_path({1.0, 0.0}, 10, 50.0, 5, rng);
        const auto est = exc::box_dimension(traj, 10, {1.0, 0.5, 0.25, 0.125, 0.0625});
        CHECK(est.degenerate);
    }
    SUBCASE("scales must decrease") {
        CHECK_THROWS_AS(exc::box_dimension_from_intervals({{0.0, 1.0}}, {0.5, 1.0}),
                        std::invalid_argument);
    }
}
