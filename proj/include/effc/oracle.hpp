#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>

#include "effc/model.hpp"

namespace effc::oracle {

/// Rate matrix of the truncated chain on {1..K}: coalescence j -> j-1 at rate
/// c*C(j,2), fragmentation j -> K at rate lambda*j for j < K (the lambda*K
/// self-loop at K has no generator effect). Diagonal = -row sums.
struct GeneratorMatrix {
    std::int64_t K;
    ModelParams params;
    Eigen::SparseMatrix<double> rates;  // K x K, states 1..K on indices 0..K-1
};

GeneratorMatrix build_generator(const ModelParams& params, std::int64_t K);

/// Stationary distribution of the truncated chain, solved exactly by the
/// flow-balance cut equations in O(K). Requires lambda > 0 (irreducibility).
Eigen::VectorXd stationary_solve(const GeneratorMatrix& gen);

/// Expected hitting times of the target state from every state, solving
/// (Q restricted to non-target states) h = -1. Exploits the
/// bidiagonal-plus-one-column structure for an O(K) solve. h(target-1) = 0.
Eigen::VectorXd exact_hitting_times(const GeneratorMatrix& gen, std::int64_t target);

/// Expected time until the first fragmentation event from each starting
/// state, treating fragmentation as absorption (kill-on-frag chain).
Eigen::VectorXd frag_absorption_times(const GeneratorMatrix& gen);

}  // namespace effc::oracle
