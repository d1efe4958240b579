#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "effc/model.hpp"
#include "effc/rng.hpp"

namespace effc::partition {

/// Partition of {1..n} with blocks ordered by least element and elements
/// ascending within each block (canonical form).
class Partition {
public:
    static Partition singletons(std::int64_t n);
    static Partition single_block(std::int64_t n);

    /// Validates coverage/disjointness and canonicalizes.
    static Partition from_blocks(std::vector<std::vector<std::int64_t>> blocks);

    std::int64_t ground_size() const { return n_; }
    std::int64_t block_count() const { return static_cast<std::int64_t>(blocks_.size()); }
    const std::vector<std::vector<std::int64_t>>& blocks() const { return blocks_; }

    /// Canonical text form, e.g. "{1,3|2|4}".
    std::string to_string() const;
    static Partition parse(const std::string& text);

    bool operator==(const Partition& other) const = default;

    /// Restriction to {1..m}.
    Partition restrict(std::int64_t m) const;

private:
    Partition() = default;
    std::vector<std::vector<std::int64_t>> blocks_;
    std::int64_t n_ = 0;
};

/// Coagulation of pi by pi2: block i of the result is the union of the blocks
/// pi_j for j in the i-th block of pi2.
Partition coag(const Partition& pi, const Partition& pi2);

/// Fragmentation of the k-th block (1-based) of pi by pi2: block k is replaced
/// by its intersections with the blocks of pi2.
Partition frag(const Partition& pi, const Partition& pi2, std::int64_t k);

/// Exchangeable partition from a mass partition via i.i.d. uniforms; leftover
/// mass produces singletons.
Partition paintbox_sample(const std::vector<double>& masses, std::int64_t n, SplitMix64& rng);

/// Finite-n block fractions, ranked decreasing; they sum to 1.
std::vector<double> asymptotic_frequencies(const Partition& pi);

struct EffcPath {
    std::vector<std::pair<double, Partition>> path;  // (0, initial) first
    bool truncated = false;
};

/// Event-driven EFFC dynamics restricted to [n]: each pair of blocks merges at
/// rate c, each block index shatters into singletons at rate lambda.
EffcPath simulate_restricted_effc(const ModelParams& params, std::int64_t n, double t_end,
                                  const Partition& initial, SplitMix64& rng,
                                  std::int64_t max_events = std::numeric_limits<std::int64_t>::max());

/// Time of the first fragmentation event of the restricted EFFC process
/// started from the singleton partition of [n].
double first_fragmentation_time(const ModelParams& params, std::int64_t n, SplitMix64& rng);

}  // namespace effc::partition
