#include "effc/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "effc/analytic.hpp"
#include "effc/dynamics.hpp"
#include "effc/excursions.hpp"
#include "effc/model.hpp"
#include "effc/oracle.hpp"
#include "effc/parallel.hpp"
#include "effc/partition.hpp"
#include "effc/rng.hpp"

namespace effc::acceptance {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

ModelParams params_from_theta(double c, double theta) { return {c, c * theta / 2.0}; }

// --- criterion 1: stationary law, exact ------------------------------------

CriterionResult theorem2_exact() {
    const auto t0 = Clock::now();
    std::ostringstream detail;
    bool pass = true;
    for (int i = 1; i <= 9; ++i) {
        const double theta = 0.1 * i;
        const ModelParams p = params_from_theta(1.0, theta);
        const auto [pmf, tail] = analytic::stationary_pmf_vector(p, 1000000);
        if (pmf(0) != 1.0 - theta) pass = false;
        KahanSum sum;
        for (Eigen::Index k = 0; k < pmf.size(); ++k) sum.add(pmf(k));
        const double norm_err = std::abs(sum.value() + tail - 1.0);
        KahanSum pgf_sum;
        double s_pow = 1.0;
        for (std::int64_t k = 1; k <= 1000; ++k) {
            s_pow *= 0.5;
            pgf_sum.add(pmf(k - 1) * s_pow);
        }
        const double pgf_err = std::abs(pgf_sum.value() - analytic::stationary_pgf(p, 0.5));
        if (norm_err > 1e-8 || pgf_err > 1e-6) pass = false;
        if (i == 4)
            detail << "theta=0.4: |1-sum|=" << norm_err << " |pgf err|=" << pgf_err << "; ";
    }
    return {"T2-exact", "stationary pmf normalization and PGF identity", pass, detail.str(),
            seconds_since(t0)};
}

// --- criterion 2: stationary law vs truncated-chain oracle ------------------

CriterionResult theorem2_oracle() {
    const auto t0 = Clock::now();
    const ModelParams p = params_from_theta(1.0, 0.5);
    std::vector<std::int64_t> Ks{100, 200, 400, 500};
    std::vector<double> tvs;
    for (auto K : Ks) {
        const Eigen::VectorXd pi = oracle::stationary_solve(oracle::build_generator(p, K));
        Eigen::VectorXd rho = analytic::stationary_pmf_vector(p, K).pmf;
        rho /= rho.sum();
        tvs.push_back(0.5 * (pi - rho).cwiseAbs().sum());
    }
    bool pass = tvs.back() < 0.01;
    // The truncated chain's stationary law coincides with the renormalized
    // Beta-Geometric analytically, so the TVs sit at the floating-point
    // floor; monotonicity is asserted up to that floor.
    for (std::size_t i = 1; i < tvs.size(); ++i)
        if (tvs[i] > tvs[i - 1] + 1e-12) pass = false;
    std::ostringstream detail;
    for (std::size_t i = 0; i < Ks.size(); ++i) detail << "TV(K=" << Ks[i] << ")=" << tvs[i] << " ";
    return {"T2-oracle", "truncated-chain stationary law matches Beta-Geometric", pass,
            detail.str(), seconds_since(t0)};
}

// --- criterion 3: stationary law, ergodic average ---------------------------

CriterionResult theorem2_ergodic(std::uint64_t seed) {
    const auto t0 = Clock::now();
    const ModelParams p = params_from_theta(1.0, 0.4);
    const std::int64_t n_max = 10000;
    const double t_end = 10000.0;
    std::vector<double> dwell(static_cast<std::size_t>(n_max) + 1, 0.0);
    SplitMix64 rng(seed, 3);
    dynamics::run_chain(
        p, n_max, t_end, n_max, rng,
        [&](double, std::int64_t from, std::int64_t, double d) {
            dwell[static_cast<std::size_t>(from)] += d;
            return true;
        },
        [&](double, std::int64_t last, double d) { dwell[static_cast<std::size_t>(last)] += d; });
    double acc = 0.0;
    for (std::int64_t k = 1; k <= 20; ++k)
        acc += std::abs(dwell[static_cast<std::size_t>(k)] / t_end - analytic::stationary_pmf(p, k));
    const double tv = 0.5 * acc;
    std::ostringstream detail;
    detail << "TV(k<=20)=" << tv << " rho1_hat=" << dwell[1] / t_end;
    return {"T2-ergodic", "occupation fractions match the stationary law", tv < 0.02, detail.str(),
            seconds_since(t0)};
}

// --- criterion 4: expected hitting time from infinity -----------------------

CriterionResult theorem3i_hitting(std::uint64_t seed) {
    const auto t0 = Clock::now();
    const ModelParams p = params_from_theta(1.0, 0.4);
    const std::int64_t n_max = 100000;
    const std::int64_t target = 10;
    const std::int64_t replicas = 1000;
    const double expected = analytic::hitting_time_from_zero(p, target);  // 1/3
    const auto times = replica_map(replicas, [&](std::int64_t i) {
        SplitMix64 rng(seed, 400 + static_cast<std::uint64_t>(i));
        return dynamics::simulate_descent(p, n_max, target, n_max, rng).total_time;
    });
    double sum = 0, sumsq = 0;
    for (double t : times) {
        sum += t;
        sumsq += t * t;
    }
    const double n = static_cast<double>(replicas);
    const double mean = sum / n;
    const double se = std::sqrt(std::max(0.0, sumsq / n - mean * mean) / (n - 1.0));
    const bool mc_ok = std::abs(mean - expected) <= std::max(0.05 * expected, 3.0 * se);

    const Eigen::VectorXd h = oracle::exact_hitting_times(oracle::build_generator(p, 10000), target);
    const double oracle_val = h(h.size() - 1);
    const bool oracle_ok = std::abs(oracle_val - expected) <= 0.02 * expected;
    std::ostringstream detail;
    detail << "MC mean=" << mean << " se=" << se << " oracle(K=1e4)=" << oracle_val
           << " expected=" << expected;
    return {"T3i-hitting", "mean first hitting time of k=10 from the ceiling", mc_ok && oracle_ok,
            detail.str(), seconds_since(t0)};
}

// --- criterion 5: speed of coming down from infinity ------------------------

struct SpeedRun {
    double mean100 = 0.0;
    double mean1000 = 0.0;
    std::int64_t n100 = 0;
    std::int64_t n1000 = 0;
};

SpeedRun run_speed(double c, std::uint64_t seed, std::uint64_t stream) {
    const ModelParams p = params_from_theta(c, 0.4);
    const std::int64_t n_max = 100000;
    const std::vector<std::int64_t> levels{100, 1000};
    excursions::ExcursionCollector collector(n_max, levels);
    SplitMix64 rng(seed, stream);
    std::int64_t reached_100 = 0;
    dynamics::run_chain(
        p, n_max, 1e18, n_max, rng,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            collector.on_jump(t, from, to, d);
            if (to == 100) ++reached_100;
            return reached_100 < 1000;
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });
    SpeedRun out;
    for (const auto& exc : collector.excursions()) {
        if (!exc.from_ceiling) continue;
        if (!std::isnan(exc.phi[0])) {
            out.mean100 += c * 100.0 * exc.phi[0] / 2.0;
            ++out.n100;
        }
        if (!std::isnan(exc.phi[1])) {
            out.mean1000 += c * 1000.0 * exc.phi[1] / 2.0;
            ++out.n1000;
        }
    }
    if (out.n100) out.mean100 /= static_cast<double>(out.n100);
    if (out.n1000) out.mean1000 /= static_cast<double>(out.n1000);
    return out;
}

CriterionResult theorem3ii_speed(std::uint64_t seed) {
    const auto t0 = Clock::now();
    const SpeedRun a = run_speed(1.0, seed, 5);
    const SpeedRun b = run_speed(2.0, seed, 6);
    const auto ok = [](double m) { return m >= 0.95 && m <= 1.05; };
    const bool pass = ok(a.mean100) && ok(a.mean1000) && ok(b.mean100) && ok(b.mean1000) &&
                      a.n100 >= 1000 && b.n100 >= 1000;
    std::ostringstream detail;
    detail << "c=1: ratio(j=100)=" << a.mean100 << " ratio(j=1000)=" << a.mean1000
           << " (n=" << a.n100 << "," << a.n1000 << "); c=2: " << b.mean100 << " " << b.mean1000;
    return {"T3ii-speed", "normalized per-level descent times c*j*phi_j/2 near 1", pass,
            detail.str(), seconds_since(t0)};
}

// --- criterion 6: excursion reach scaling -----------------------------------

double reach_slope(double theta, std::uint64_t seed, std::uint64_t stream, std::string& info) {
    const ModelParams p = params_from_theta(1.0, theta);
    const std::int64_t n_max = 10000;
    excursions::ExcursionCollector collector(n_max);
    SplitMix64 rng(seed, stream);
    std::int64_t deep = 0;  // excursions that reached level 10
    std::int64_t events = 0;
    dynamics::run_chain(
        p, n_max, 1e18, n_max, rng,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            collector.on_jump(t, from, to, d);
            if (to == 10) ++deep;
            return deep < 250 && ++events < 4000000000LL;
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });
    const std::vector<std::int64_t> levels{10, 16, 25, 40, 63, 100, 158, 251, 398, 631, 1000};
    const auto fit = excursions::reach_tail_exponent(collector.excursions(), levels);
    std::ostringstream os;
    os << "theta=" << theta << ": slope=" << fit.slope << "+-" << fit.std_error
       << " (excursions=" << collector.excursions().size() << ") ";
    info += os.str();
    return fit.slope;
}

CriterionResult reach_scaling(std::uint64_t seed) {
    const auto t0 = Clock::now();
    std::string info;
    const double s05 = reach_slope(0.5, seed, 7, info);
    const double s08 = reach_slope(0.8, seed, 8, info);
    const bool pass = std::abs(s05 - 0.5) <= 0.1 && std::abs(s08 - 0.8) <= 0.1;
    return {"reach-scaling", "excursion reach frequency scales like n^theta", pass, info,
            seconds_since(t0)};
}

// --- criterion 7: box-counting dimension of the zero set --------------------

excursions::DimensionEstimate dimension_run(double theta, std::uint64_t seed,
                                            std::uint64_t stream) {
    const ModelParams p = params_from_theta(1.0, theta);
    const std::int64_t n_max = 10000;
    const double t_end = 1000.0;
    excursions::ExcursionCollector collector(n_max);
    SplitMix64 rng(seed, stream);
    dynamics::run_chain(
        p, n_max, t_end, n_max, rng,
        [&](double t, std::int64_t from, std::int64_t to, double d) {
            return collector.on_jump(t, from, to, d);
        },
        [&](double t, std::int64_t last, double d) { collector.on_finish(t, last, d); });
    std::vector<double> scales;
    for (int i = 0; i <= 24; ++i) scales.push_back(std::pow(10.0, 2.0 - 0.25 * i));
    return excursions::box_dimension_from_intervals(collector.ceiling_intervals(), scales);
}

CriterionResult theorem4_dimension(std::uint64_t seed) {
    const auto t0 = Clock::now();
    const auto d025 = dimension_run(0.25, seed, 9);
    const auto d050 = dimension_run(0.50, seed, 10);
    const auto d075 = dimension_run(0.75, seed, 11);
    const bool mid_ok = !d050.degenerate && std::abs(d050.slope - 0.5) <= 0.15 && d050.r2 >= 0.98;
    const bool order_ok = d025.slope < d050.slope && d050.slope < d075.slope &&
                          d075.slope - d025.slope >= 0.3;
    std::ostringstream detail;
    detail << "slope(0.25)=" << d025.slope << " slope(0.5)=" << d050.slope
           << " (r2=" << d050.r2 << ") slope(0.75)=" << d075.slope;
    return {"T4-dimension", "box-counting slope of the zero-set proxy near theta",
            mid_ok && order_ok, detail.str(), seconds_since(t0)};
}

// --- criterion 8: phase transition ------------------------------------------

double ceiling_fraction(const ModelParams& p, std::int64_t n_max, double t_end, SplitMix64& rng) {
    KahanSum at_ceiling;
    dynamics::run_chain(
        p, n_max, t_end, n_max, rng,
        [&](double, std::int64_t from, std::int64_t, double d) {
            if (from == n_max) at_ceiling.add(d);
            return true;
        },
        [&](double, std::int64_t last, double d) {
            if (last == n_max) at_ceiling.add(d);
        });
    return at_ceiling.value() / t_end;
}

CriterionResult theorem1_phase(std::uint64_t seed) {
    const auto t0 = Clock::now();
    std::ostringstream detail;

    // (a) occupation-ratio series is non-Cauchy for theta >= 1
    bool a_ok = true;
    for (double theta : {1.0, 1.2}) {
        const ModelParams p = params_from_theta(1.0, theta);
        for (std::int64_t m : {100L, 1000L, 10000L, 100000L}) {
            const double gap = analytic::supercritical_series_partial_sum(p, 2 * m) -
                               analytic::supercritical_series_partial_sum(p, m);
            if (!(gap >= 0.1)) a_ok = false;
        }
    }
    detail << "(a) " << (a_ok ? "non-Cauchy ok" : "FAILED") << "; ";

    // (b) ceiling-time fraction vs n_max. NOTE: the stated "grows for
    // theta=1.2" direction contradicts the exact stationary law of the
    // truncated chain (the ceiling mass is ~theta/n_max in both regimes);
    // the check is implemented as stated and is expected to fail.
    std::vector<double> f_super, f_sub;
    for (std::int64_t K : {100L, 1000L, 10000L}) {
        SplitMix64 r1(seed, 500000 + static_cast<std::uint64_t>(K));
        f_super.push_back(ceiling_fraction(params_from_theta(1.0, 1.2), K, 100.0, r1));
        SplitMix64 r2(seed, 600000 + static_cast<std::uint64_t>(K));
        f_sub.push_back(ceiling_fraction(params_from_theta(1.0, 0.5), K, 100.0, r2));
    }
    const bool b_grow = f_super[0] < f_super[1] && f_super[1] < f_super[2];
    const bool b_shrink = f_sub[0] > f_sub[1] && f_sub[1] > f_sub[2];
    detail << "(b) theta=1.2 fractions=[" << f_super[0] << "," << f_super[1] << "," << f_super[2]
           << "] grows=" << (b_grow ? "yes" : "NO") << ", theta=0.5 shrinks="
           << (b_shrink ? "yes" : "NO") << "; ";

    // (c) oracle stationary mass at 1
    bool c_ok = true;
    {
        std::vector<double> mass_super, mass_sub;
        for (std::int64_t K : {100L, 1000L, 10000L}) {
            mass_super.push_back(
                oracle::stationary_solve(oracle::build_generator(params_from_theta(1.0, 1.2), K))(0));
            mass_sub.push_back(
                oracle::stationary_solve(oracle::build_generator(params_from_theta(1.0, 0.5), K))(0));
        }
        if (!(mass_super[0] > mass_super[1] && mass_super[1] > mass_super[2] &&
              mass_super[2] < 0.05))
            c_ok = false;
        for (std::size_t i = 1; i < mass_sub.size(); ++i)
            if (std::abs(mass_sub[i] - 0.5) >= std::abs(mass_sub[i - 1] - 0.5)) c_ok = false;
        if (std::abs(mass_sub.back() - 0.5) > 0.01) c_ok = false;
        detail << "(c) " << (c_ok ? "mass-at-1 limits ok" : "FAILED") << " [theta=1.2 -> "
               << mass_super.back() << ", theta=0.5 -> " << mass_sub.back() << "]";
    }
    return {"T1-phase", "phase transition signatures at theta=1", a_ok && b_grow && b_shrink && c_ok,
            detail.str(), seconds_since(t0)};
}

// --- criterion 9: numerical stability ---------------------------------------

CriterionResult numerical_stability() {
    const auto t0 = Clock::now();
    bool pass = true;
    double worst_rel = 0.0;
    for (double theta : {0.4, 0.5}) {
        const ModelParams p = params_from_theta(1.0, theta);
        for (std::int64_t n : {1000L, 100000L, 1000000L}) {
            for (std::int64_t k : {1L, 10L, 100L}) {
                const double a = analytic::p_descend_recurrence(p, n, k);
                const double b = analytic::p_descend_loggamma(p, n, k);
                const double rel = std::abs(a - b) / b;
                worst_rel = std::max(worst_rel, rel);
                if (rel > 1e-10) pass = false;
            }
        }
    }
    double worst_norm = 0.0;
    for (double theta : {0.25, 0.5, 0.75}) {
        const ModelParams p = params_from_theta(1.0, theta);
        for (std::int64_t n : {10L, 100L, 1000L, 10000L}) {
            const Eigen::VectorXd r = analytic::frag_state_pmf(p, n);
            KahanSum sum;
            for (Eigen::Index i = 0; i < r.size(); ++i) sum.add(r(i));
            const double err = std::abs(sum.value() - 1.0);
            worst_norm = std::max(worst_norm, err);
            if (err > 1e-12) pass = false;
        }
    }
    std::ostringstream detail;
    detail << "worst p_descend route disagreement=" << worst_rel
           << ", worst frag pmf |1-sum|=" << worst_norm;
    return {"stability", "dual-route agreement and pmf normalization", pass, detail.str(),
            seconds_since(t0)};
}

// --- criterion 10: partition vs block-count chain ---------------------------

CriterionResult cross_module(std::uint64_t seed) {
    const auto t0 = Clock::now();
    const ModelParams p = params_from_theta(1.0, 0.4);
    const std::int64_t n = 100;
    const std::int64_t replicas = 10000;
    const auto part_times = replica_map(replicas, [&](std::int64_t i) {
        SplitMix64 rng(seed, 100000 + static_cast<std::uint64_t>(i));
        return partition::first_fragmentation_time(p, n, rng);
    });
    const auto chain_times = replica_map(replicas, [&](std::int64_t i) {
        SplitMix64 rng(seed, 200000 + static_cast<std::uint64_t>(i));
        // run the block-count chain from n until the first fragmentation
        KahanSum t;
        std::int64_t j = n;
        for (;;) {
            const double rc = coalescence_rate(p, static_cast<double>(j));
            const double total = rc + p.lambda * static_cast<double>(j);
            t.add(rng.exponential(total));
            if (rng.uniform01() * total >= rc) return t.value();
            --j;
        }
    });
    const double pval = ks_two_sample_p(part_times, chain_times);
    double sum = 0, sumsq = 0;
    for (double t : part_times) {
        sum += t;
        sumsq += t * t;
    }
    const double nn = static_cast<double>(replicas);
    const double mean = sum / nn;
    const double se = std::sqrt(std::max(0.0, sumsq / nn - mean * mean) / (nn - 1.0));
    const double expected = analytic::mean_time_to_frag(p, n);
    const bool pass = pval > 0.01 && std::abs(mean - expected) <= 3.0 * se;
    std::ostringstream detail;
    detail << "KS p=" << pval << " partition mean=" << mean << " expected=" << expected
           << " se=" << se;
    return {"cross-module", "partition simulator agrees with the block-count chain", pass,
            detail.str(), seconds_since(t0)};
}

}  // namespace

double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
    }
    const double ne = std::sqrt(n1 * n2 / (n1 + n2));
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        p += sign * 2.0 * std::exp(-2.0 * lambda * lambda * k * k);
        sign = -sign;
    }
    return std::clamp(p, 0.0, 1.0);
}

std::vector<CriterionResult> run_suite(const std::string& suite, std::uint64_t seed) {
    std::vector<CriterionResult> results;
    results.push_back(theorem2_exact());
    results.push_back(theorem2_oracle());
    const bool full = suite == "full";
    if (full) {
        results.push_back(theorem2_ergodic(seed));
        results.push_back(theorem3i_hitting(seed));
        results.push_back(theorem3ii_speed(seed));
        results.push_back(reach_scaling(seed));
        results.push_back(theorem4_dimension(seed));
    }
    results.push_back(theorem1_phase(seed));
    results.push_back(numerical_stability());
    if (full) results.push_back(cross_module(seed));
    return results;
}

}  // namespace effc::acceptance
