#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "effc/dynamics.hpp"
#include "effc/model.hpp"

namespace effc::excursions {

/// One maximal interval with the block count below the ceiling. start_time is
/// the ceiling exit (or 0 when the path starts below), end_time the next
/// ceiling entry (or t_end when clipped).
struct Excursion {
    double start_time;
    double end_time;
    std::int64_t min_state;
    bool from_ceiling;  // started by a ceiling exit (not the initial state)
    bool clipped;       // cut off by t_end rather than a ceiling entry
    std::size_t begin_event;  // index range into the source trajectory
    std::size_t end_event;

    double duration() const { return end_time - start_time; }
};

std::vector<Excursion> segment(const dynamics::Trajectory& trajectory, std::int64_t ceiling);

struct EmpiricalPmf {
    std::map<std::int64_t, double> pmf;  // occupation fractions per block count
    double tv_to_analytic;               // total-variation distance to the stationary law
};

/// Occupation-fraction estimate of the stationary law, pooled over
/// trajectories. Requires theta in (0,1) for the analytic comparison.
EmpiricalPmf empirical_stationary(const std::vector<dynamics::Trajectory>& trajectories);

struct SpeedLevel {
    std::int64_t j;
    double mean_ratio;  // mean of c*j*phi_j/2 over excursions that reach j
    double std_error;
    std::int64_t count;
};

struct SpeedEstimate {
    std::vector<SpeedLevel> levels;
    std::int64_t excluded;  // excursions too short to reach the smallest level
};

/// Coming-down-from-infinity speed via per-level hitting times phi_j within
/// excursions; the normalized ratio tends to 1.
SpeedEstimate speed_estimate(const dynamics::Trajectory& trajectory,
                             const std::vector<Excursion>& excursions,
                             const std::vector<std::int64_t>& j_window);

/// Per-excursion record used by the streaming collector below.
struct ExcursionSummary {
    double start_time;
    double end_time;
    std::int64_t min_state;
    bool from_ceiling;
    bool clipped;
    std::vector<double> phi;  // hitting times per requested level; NaN if unreached
};

struct TailFit {
    std::vector<std::int64_t> levels;
    std::vector<std::int64_t> counts;  // excursions with min_state <= level
    double slope;                      // ~ +theta
    double std_error;
    double r2;
    bool degenerate;
};

/// Log-log slope of the excursion reach counts against the reach level.
TailFit reach_tail_exponent(const std::vector<ExcursionSummary>& excursions,
                            const std::vector<std::int64_t>& levels);
TailFit reach_tail_exponent(const std::vector<Excursion>& excursions,
                            const std::vector<std::int64_t>& levels);

struct DimensionEstimate {
    std::vector<double> scales;        // box sizes, decreasing
    std::vector<std::int64_t> counts;  // boxes hitting the zero-set proxy
    double slope;                      // fitted exponent, in [0,1] when usable
    double ci;                         // fit standard error
    double r2;
    std::size_t window_begin = 0;  // chosen fitting window [begin, end)
    std::size_t window_end = 0;
    bool degenerate = false;
};

/// Box-counting dimension of the zero-set proxy {t : state(t) = ceiling}.
/// The fitting window is the widest contiguous run of >= 4 scales with
/// R^2 >= 0.98 and slope in [0,1].
DimensionEstimate box_dimension(const dynamics::Trajectory& trajectory, std::int64_t ceiling,
                                const std::vector<double>& scales);

/// Same estimator on an explicit list of ceiling-residence intervals.
DimensionEstimate box_dimension_from_intervals(
    const std::vector<std::pair<double, double>>& intervals, const std::vector<double>& scales);

/// Streaming observer splitting a chain run into excursions without storing
/// the trajectory; records phi hitting times for the requested levels.
class ExcursionCollector {
public:
    ExcursionCollector(std::int64_t ceiling, std::vector<std::int64_t> phi_levels = {});

    /// dynamics::run_chain on_jump callback.
    bool on_jump(double t, std::int64_t from, std::int64_t to, double dwell);
    /// dynamics::run_chain on_finish callback.
    void on_finish(double t, std::int64_t last_state, double final_dwell);

    const std::vector<ExcursionSummary>& excursions() const { return excursions_; }
    const std::vector<std::pair<double, double>>& ceiling_intervals() const { return intervals_; }
    double ceiling_time() const { return ceiling_time_; }

private:
    std::int64_t ceiling_;
    std::vector<std::int64_t> levels_;
    std::vector<ExcursionSummary> excursions_;
    std::vector<std::pair<double, double>> intervals_;
    std::optional<ExcursionSummary> open_;
    double ceiling_entry_ = 0.0;
    bool at_ceiling_ = false;
    double ceiling_time_ = 0.0;
    bool started_ = false;
};

}  // namespace effc::excursions
