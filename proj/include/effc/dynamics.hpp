#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "effc/model.hpp"
#include "effc/rng.hpp"

namespace effc::dynamics {

/// Block count of the truncated chain; n_max stands in for infinity.
struct ChainState {
    std::int64_t blocks;
    bool at_ceiling;
};

struct StepResult {
    ChainState next;
    double dwell;
};

/// One jump of the block-count chain from the current state: coalesce down by
/// one with probability (j-1)/(j-1+theta), otherwise fragment to the ceiling;
/// dwell ~ Exp(c*C(j,2) + lambda*j).
inline StepResult step(const ChainState& state, const ModelParams& params, std::int64_t n_max,
                       SplitMix64& rng) {
    const double j = static_cast<double>(state.blocks);
    const double rc = coalescence_rate(params, j);
    const double rf = params.lambda * j;
    const double total = rc + rf;
    const double dwell = rng.exponential(total);
    std::int64_t next = (rng.uniform01() * total < rc) ? state.blocks - 1 : n_max;
    return {{next, next == n_max}, dwell};
}

/// Piecewise-constant record of the block count over [0, t_end].
struct Trajectory {
    ModelParams params;
    std::int64_t n_max;
    std::int64_t t0_state;
    double t_end;
    std::uint64_t seed;
    std::vector<double> jump_times;       // strictly increasing
    std::vector<std::int64_t> states;     // state after each jump
    bool truncated = false;               // event budget exhausted before t_end

    /// State at time t (right-continuous).
    std::int64_t state_at(double t) const;
};

struct DescentRecord {
    double total_time;
    std::int64_t frag_count;
    std::int64_t min_state_reached;
    bool completed;  // false when the step budget was exhausted
};

/// Run the chain until the block count first equals k_target, restarting from
/// the ceiling on fragmentation. Time is accumulated with compensated
/// summation.
DescentRecord simulate_descent(const ModelParams& params, std::int64_t n_start,
                               std::int64_t k_target, std::int64_t n_max, SplitMix64& rng,
                               std::int64_t max_steps = std::numeric_limits<std::int64_t>::max());

/// Free-running simulation over [0, t_end], recording every jump (including
/// ceiling-to-ceiling fragmentations).
Trajectory simulate_path(const ModelParams& params, std::int64_t n_max, double t_end,
                         std::int64_t initial, SplitMix64& rng,
                         std::int64_t max_events = std::numeric_limits<std::int64_t>::max());

/// Total dwell time per block count; dwell sums to t_end.
std::map<std::int64_t, double> occupation_histogram(const Trajectory& trajectory);

/// CSV export with mandatory header "t,state"; doubles are printed with
/// round-trip precision so identical runs produce identical bytes.
void write_csv(const Trajectory& trajectory, std::ostream& os);

/// Streaming form of the chain run: obs(t_jump, new_state, dwell_in_old_state)
/// per jump, then finish(t_end, final_state, final_dwell) for the clipped tail.
/// Keeps multi-gigaevent runs out of memory.
template <class OnJump, class OnFinish>
void run_chain(const ModelParams& params, std::int64_t n_max, double t_end, std::int64_t initial,
               SplitMix64& rng, OnJump&& on_jump, OnFinish&& on_finish) {
    ChainState state{initial, initial == n_max};
    KahanSum clock;
    for (;;) {
        auto [next, dwell] = step(state, params, n_max, rng);
        const double t_prev = clock.value();
        if (t_prev + dwell >= t_end) {
            on_finish(t_end, state.blocks, t_end - t_prev);
            return;
        }
        clock.add(dwell);
        if (!on_jump(clock.value(), state.blocks, next.blocks, dwell)) {
            on_finish(clock.value(), next.blocks, 0.0);
            return;
        }
        state = next;
    }
}

}  // namespace effc::dynamics
