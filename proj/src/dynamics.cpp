#include "effc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "fmt_compat.hpp"

namespace effc::dynamics {

std::int64_t Trajectory::state_at(double t) const {
    if (jump_times.empty() || t < jump_times.front()) return t0_state;
    auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
    return states[static_cast<std::size_t>(it - jump_times.begin()) - 1];
}

DescentRecord simulate_descent(const ModelParams& params, std::int64_t n_start,
                               std::int64_t k_target, std::int64_t n_max, SplitMix64& rng,
                               std::int64_t max_steps) {
    if (!(k_target < n_start && n_start <= n_max))
        throw std::domain_error("simulate_descent: require k_target < n_start <= n_max");
    ChainState state{n_start, n_start == n_max};
    KahanSum elapsed;
    std::int64_t frags = 0;
    std::int64_t min_state = n_start;
    for (std::int64_t steps = 0; steps < max_steps; ++steps) {
        auto [next, dwell] = step(state, params, n_max, rng);
        elapsed.add(dwell);
        if (next.blocks > state.blocks || next.at_ceiling) ++frags;
        state = next;
        min_state = std::min(min_state, state.blocks);
        if (state.blocks == k_target) return {elapsed.value(), frags, min_state, true};
    }
    return {elapsed.value(), frags, min_state, false};
}

Trajectory simulate_path(const ModelParams& params, std::int64_t n_max, double t_end,
                         std::int64_t initial, SplitMix64& rng, std::int64_t max_events) {
    if (!(t_end > 0.0)) throw std::domain_error("simulate_path: t_end > 0 required");
    if (initial < 1 || initial > n_max)
        throw std::domain_error("simulate_path: initial in [1, n_max] required");
    Trajectory traj{params, n_max, initial, t_end, 0, {}, {}, false};
    std::int64_t events = 0;
    run_chain(
        params, n_max, t_end, initial, rng,
        [&](double t, std::int64_t /*from*/, std::int64_t to, double /*dwell*/) {
            traj.jump_times.push_back(t);
            traj.states.push_back(to);
            return ++events < max_events;
        },
        [&](double t, std::int64_t /*last*/, double /*dwell*/) {
            traj.truncated = events >= max_events && t < t_end;
        });
    return traj;
}

std::map<std::int64_t, double> occupation_histogram(const Trajectory& trajectory) {
    if (!(trajectory.t_end > 0.0)) throw std::domain_error("occupation_histogram: empty trajectory");
    std::map<std::int64_t, double> dwell;
    double t_prev = 0.0;
    std::int64_t state = trajectory.t0_state;
    for (std::size_t i = 0; i < trajectory.jump_times.size(); ++i) {
        dwell[state] += trajectory.jump_times[i] - t_prev;
        t_prev = trajectory.jump_times[i];
        state = trajectory.states[i];
    }
    const double horizon = trajectory.truncated && !trajectory.jump_times.empty()
                               ? trajectory.jump_times.back()
                               : trajectory.t_end;
    dwell[state] += horizon - t_prev;
    return dwell;
}

void write_csv(const Trajectory& trajectory, std::ostream& os) {
    os << "t,state\n";
    os << format_double(0.0) << ',' << trajectory.t0_state << '\n';
    for (std::size_t i = 0; i < trajectory.jump_times.size(); ++i)
        os << format_double(trajectory.jump_times[i]) << ',' << trajectory.states[i] << '\n';
}

}  // namespace effc::dynamics
