#include "effc/excursions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "effc/analytic.hpp"

namespace effc::excursions {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 1.0;
};

LineFit ols(const std::vector<double>& x, const std::vector<double>& y, std::size_t begin,
            std::size_t end) {
    const auto n = static_cast<double>(end - begin);
    double sx = 0, sy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.slope_se = n > 2 ? std::sqrt(sse / ((n - 2.0) * sxx)) : 0.0;
    return fit;
}

}  // namespace

std::vector<Excursion> segment(const dynamics::Trajectory& trajectory, std::int64_t ceiling) {
    if (trajectory.n_max != ceiling)
        throw std::invalid_argument("segment: trajectory was produced with a different ceiling");
    std::vector<Excursion> out;
    std::int64_t state = trajectory.t0_state;
    Excursion open{0.0, 0.0, state, false, false, 0, 0};
    bool in_excursion = state < ceiling;
    for (std::size_t i = 0; i < trajectory.jump_times.size(); ++i) {
        const double t = trajectory.jump_times[i];
        const std::int64_t to = trajectory.states[i];
        if (in_excursion) {
            if (to == ceiling) {
                open.end_time = t;
                open.end_event = i + 1;
                out.push_back(open);
                in_excursion = false;
            } else {
                open.min_state = std::min(open.min_state, to);
            }
        } else if (to < ceiling) {
            open = {t, 0.0, to, true, false, i, 0};
            in_excursion = true;
        }
        state = to;
    }
    if (in_excursion) {
        open.end_time = trajectory.t_end;
        open.end_event = trajectory.jump_times.size();
        open.clipped = true;
        out.push_back(open);
    }
    return out;
}

EmpiricalPmf empirical_stationary(const std::vector<dynamics::Trajectory>& trajectories) {
    if (trajectories.empty()) throw std::invalid_argument("empirical_stationary: no trajectories");
    std::map<std::int64_t, double> dwell;
    double total = 0.0;
    for (const auto& traj : trajectories) {
        for (const auto& [k, d] : dynamics::occupation_histogram(traj)) dwell[k] += d;
    }
    for (const auto& [k, d] : dwell) total += d;
    EmpiricalPmf result;
    for (const auto& [k, d] : dwell) result.pmf[k] = d / total;

    const ModelParams& params = trajectories.front().params;
    const double theta = params.theta();
    if (theta > 0.0 && theta < 1.0) {
        const std::int64_t k_max = dwell.rbegin()->first;
        double acc = 0.0;
        double rho = 1.0 - theta;
        auto it = result.pmf.begin();
        for (std::int64_t k = 1; k <= k_max; ++k) {
            double emp = 0.0;
            if (it != result.pmf.end() && it->first == k) {
                emp = it->second;
                ++it;
            }
            acc += std::abs(emp - rho);
            rho *= (k - 1 + theta) / (k + 1);
        }
        acc += analytic::stationary_tail_mass(params, k_max);
        result.tv_to_analytic = 0.5 * acc;
    } else {
        result.tv_to_analytic = kNaN;
    }
    return result;
}

SpeedEstimate speed_estimate(const dynamics::Trajectory& trajectory,
                             const std::vector<Excursion>& excursions,
                             const std::vector<std::int64_t>& j_window) {
    if (j_window.empty()) throw std::invalid_argument("speed_estimate: empty level window");
    const std::int64_t j_max = *std::max_element(j_window.begin(), j_window.end());
    const std::int64_t j_min = *std::min_element(j_window.begin(), j_window.end());
    if (trajectory.n_max < 10 * j_max)
        throw std::domain_error("speed_estimate: ceiling must be at least 10x the largest level");
    const double c = trajectory.params.c;
    SpeedEstimate est;
    est.excluded = 0;
    struct Acc {
        double sum = 0, sumsq = 0;
        std::int64_t n = 0;
    };
    std::vector<Acc> acc(j_window.size());
    for (const auto& exc : excursions) {
        if (!exc.from_ceiling) continue;
        if (exc.min_state > j_min) ++est.excluded;
        for (std::size_t i = exc.begin_event; i < exc.end_event; ++i) {
            const std::int64_t s = trajectory.states[i];
            for (std::size_t w = 0; w < j_window.size(); ++w) {
                if (s == j_window[w]) {
                    const double phi = trajectory.jump_times[i] - exc.start_time;
                    const double ratio = c * static_cast<double>(s) * phi / 2.0;
                    acc[w].sum += ratio;
                    acc[w].sumsq += ratio * ratio;
                    ++acc[w].n;
                }
            }
        }
    }
    for (std::size_t w = 0; w < j_window.size(); ++w) {
        SpeedLevel lvl{j_window[w], kNaN, kNaN, acc[w].n};
        if (acc[w].n > 0) {
            const double n = static_cast<double>(acc[w].n);
            lvl.mean_ratio = acc[w].sum / n;
            const double var = std::max(0.0, acc[w].sumsq / n - lvl.mean_ratio * lvl.mean_ratio);
            lvl.std_error = n > 1 ? std::sqrt(var / (n - 1.0)) : kNaN;
        }
        est.levels.push_back(lvl);
    }
    return est;
}

namespace {

TailFit fit_reach_counts(std::vector<std::int64_t> levels, const std::vector<std::int64_t>& mins) {
    std::sort(levels.begin(), levels.end());
    TailFit fit;
    fit.levels = levels;
    std::vector<std::int64_t> sorted_mins = mins;
    std::sort(sorted_mins.begin(), sorted_mins.end());
    for (auto m : levels) {
        auto it = std::upper_bound(sorted_mins.begin(), sorted_mins.end(), m);
        fit.counts.push_back(static_cast<std::int64_t>(it - sorted_mins.begin()));
    }
    std::vector<double> x, y;
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (fit.counts[i] > 0) {
            x.push_back(std::log(static_cast<double>(levels[i])));
            y.push_back(std::log(static_cast<double>(fit.counts[i])));
        }
    }
    if (x.size() < 3 || x.front() == x.back() || y.front() == y.back()) {
        fit.slope = kNaN;
        fit.std_error = kNaN;
        fit.r2 = kNaN;
        fit.degenerate = true;
        return fit;
    }
    const LineFit line = ols(x, y, 0, x.size());
    fit.slope = line.slope;
    fit.std_error = line.slope_se;
    fit.r2 = line.r2;
    fit.degenerate = false;
    return fit;
}

}  // namespace

TailFit reach_tail_exponent(const std::vector<ExcursionSummary>& excursions,
                            const std::vector<std::int64_t>& levels) {
    std::vector<std::int64_t> mins;
    mins.reserve(excursions.size());
    for (const auto& e : excursions) mins.push_back(e.min_state);
    return fit_reach_counts(levels, mins);
}

TailFit reach_tail_exponent(const std::vector<Excursion>& excursions,
                            const std::vector<std::int64_t>& levels) {
    std::vector<std::int64_t> mins;
    mins.reserve(excursions.size());
    for (const auto& e : excursions) mins.push_back(e.min_state);
    return fit_reach_counts(levels, mins);
}

DimensionEstimate box_dimension_from_intervals(
    const std::vector<std::pair<double, double>>& intervals, const std::vector<double>& scales) {
    for (std::size_t i = 1; i < scales.size(); ++i)
        if (!(scales[i] < scales[i - 1]))
            throw std::invalid_argument("box_dimension: scales must be strictly decreasing");
    DimensionEstimate est;
    est.scales = scales;
    for (double delta : scales) {
        std::int64_t count = 0;
        std::int64_t last = -1;
        for (const auto& [a, b] : intervals) {
            auto lo = static_cast<std::int64_t>(std::floor(a / delta));
            const auto hi = static_cast<std::int64_t>(std::floor(b / delta));
            if (lo <= last) lo = last + 1;
            if (hi >= lo) {
                count += hi - lo + 1;
                last = hi;
            }
        }
        est.counts.push_back(count);
    }
    // Fit log N against log(1/delta) on the widest window that scales cleanly.
    std::vector<double> x, y;
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (est.counts[i] > 0) {
            x.push_back(-std::log(scales[i]));
            y.push_back(std::log(static_cast<double>(est.counts[i])));
        }
    }
    est.degenerate = true;
    est.slope = kNaN;
    est.ci = kNaN;
    est.r2 = kNaN;
    if (x.size() < 4) return est;
    double best_span = -1.0;
    double best_r2 = -1.0;
    for (std::size_t b = 0; b + 4 <= x.size(); ++b) {
        for (std::size_t e = b + 4; e <= x.size(); ++e) {
            const LineFit line = ols(x, y, b, e);
            if (line.r2 < 0.98 || line.slope < 0.0 || line.slope > 1.0) continue;
            const double span = x[e - 1] - x[b];
            if (span > best_span || (span == best_span && line.r2 > best_r2)) {
                best_span = span;
                best_r2 = line.r2;
                est.slope = line.slope;
                est.ci = line.slope_se;
                est.r2 = line.r2;
                est.window_begin = b;
                est.window_end = e;
                est.degenerate = false;
            }
        }
    }
    if (est.degenerate) {
        // No clean window; report the whole-range fit, flagged.
        const LineFit line = ols(x, y, 0, x.size());
        est.slope = line.slope;
        est.ci = line.slope_se;
        est.r2 = line.r2;
        est.window_begin = 0;
        est.window_end = x.size();
    }
    return est;
}

DimensionEstimate box_dimension(const dynamics::Trajectory& trajectory, std::int64_t ceiling,
                                const std::vector<double>& scales) {
    if (trajectory.n_max != ceiling)
        throw std::invalid_argument("box_dimension: trajectory was produced with a different ceiling");
    std::vector<std::pair<double, double>> intervals;
    std::int64_t state = trajectory.t0_state;
    double entry = 0.0;
    bool at_ceiling = state == ceiling;
    for (std::size_t i = 0; i < trajectory.jump_times.size(); ++i) {
        const double t = trajectory.jump_times[i];
        const std::int64_t to = trajectory.states[i];
        if (!at_ceiling && to == ceiling) {
            entry = t;
            at_ceiling = true;
        } else if (at_ceiling && to != ceiling) {
            intervals.emplace_back(entry, t);
            at_ceiling = false;
        }
        state = to;
    }
    if (at_ceiling) intervals.emplace_back(entry, trajectory.t_end);
    return box_dimension_from_intervals(intervals, scales);
}

ExcursionCollector::ExcursionCollector(std::int64_t ceiling, std::vector<std::int64_t> phi_levels)
    : ceiling_(ceiling), levels_(std::move(phi_levels)) {}

bool ExcursionCollector::on_jump(double t, std::int64_t from, std::int64_t to, double /*dwell*/) {
    if (!started_) {
        started_ = true;
        if (from == ceiling_) {
            at_ceiling_ = true;
            ceiling_entry_ = 0.0;
        } else {
            open_ = ExcursionSummary{0.0, 0.0, from, false, false,
                                     std::vector<double>(levels_.size(), kNaN)};
        }
    }
    if (at_ceiling_) {
        if (to < ceiling_) {
            ceiling_time_ += t - ceiling_entry_;
            intervals_.emplace_back(ceiling_entry_, t);
            at_ceiling_ = false;
            open_ = ExcursionSummary{t, 0.0, to, true, false,
                                     std::vector<double>(levels_.size(), kNaN)};
        }
        // ceiling self-loop fragmentations stay at the ceiling
        return true;
    }
    if (to == ceiling_) {
        open_->end_time = t;
        excursions_.push_back(std::move(*open_));
        open_.reset();
        at_ceiling_ = true;
        ceiling_entry_ = t;
        return true;
    }
    open_->min_state = std::min(open_->min_state, to);
    for (std::size_t w = 0; w < levels_.size(); ++w)
        if (to == levels_[w]) open_->phi[w] = t - open_->start_time;
    return true;
}

void ExcursionCollector::on_finish(double t, std::int64_t last_state, double /*final_dwell*/) {
    if (!started_) {
        // No jump ever happened; the whole horizon sits in one regime.
        if (last_state == ceiling_) {
            intervals_.emplace_back(0.0, t);
            ceiling_time_ += t;
        } else {
            excursions_.push_back(ExcursionSummary{0.0, t, last_state, false, true,
                                                   std::vector<double>(levels_.size(), kNaN)});
        }
        return;
    }
    if (at_ceiling_) {
        intervals_.emplace_back(ceiling_entry_, t);
        ceiling_time_ += t - ceiling_entry_;
    } else if (open_) {
        open_->end_time = t;
        open_->clipped = true;
        excursions_.push_back(std::move(*open_));
        open_.reset();
    }
}

}  // namespace effc::excursions
