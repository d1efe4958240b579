#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "effc/model.hpp"

namespace effc::analytic {

/// logGamma(a) - logGamma(b) for positive arguments.
double log_gamma_ratio(double a, double b);

/// Gamma(a)/Gamma(b), evaluated in log space when either argument is large.
double gamma_ratio(double a, double b);

/// Probability that the block count descends from n to k with no
/// fragmentation event: p_{n,k} = Gamma(k+theta)Gamma(n) / (Gamma(n+theta)Gamma(k)).
double p_descend(const ModelParams& params, std::int64_t n, std::int64_t k);

/// The same probability by the two independent evaluation routes; they must
/// agree to 1e-10 relative up to n = 10^6.
double p_descend_recurrence(const ModelParams& params, std::int64_t n, std::int64_t k);
double p_descend_loggamma(const ModelParams& params, std::int64_t n, std::int64_t k);

/// Distribution of the block count just before the first fragmentation event,
/// starting from n blocks: r_k^{(n)}, k = 1..n (entry k-1 of the vector).
Eigen::VectorXd frag_state_pmf(const ModelParams& params, std::int64_t n);

/// Expected time to descend from n to k blocks conditioned on no
/// fragmentation: t_k^{(n)} = sum_{j=k+1}^n 2/(2 lambda j + c j(j-1)).
double descent_time(const ModelParams& params, std::int64_t n, std::int64_t k);

/// Expected time until the first fragmentation event from n blocks.
double mean_time_to_frag(const ModelParams& params, std::int64_t n);

/// Expected holding time in a state with k blocks: u_k = 2/(2 lambda k + c k(k-1)).
double holding_time(const ModelParams& params, std::int64_t k);

/// Stationary probability of the state with k blocks (Beta-Geometric(1-theta, theta)):
/// rho(k) = (1-theta)/Gamma(theta) * Gamma(k-1+theta)/Gamma(k+1). Requires theta in (0,1).
double stationary_pmf(const ModelParams& params, std::int64_t k);

/// Exact stationary mass on states with more than k blocks:
/// Gamma(k+theta) / (Gamma(theta) Gamma(k+1)).
double stationary_tail_mass(const ModelParams& params, std::int64_t k);

struct PmfWithTail {
    Eigen::VectorXd pmf;  // entries 1..k_max
    double tail_mass;     // exact mass beyond k_max
};

/// Stationary pmf up to a caller-supplied cutoff, with the exact tail mass
/// attached. The tail is heavy (k^{-(2-theta)}), so silent truncation would
/// corrupt normalization checks.
PmfWithTail stationary_pmf_vector(const ModelParams& params, std::int64_t k_max);

/// Probability generating function of the stationary block count:
/// G(s) = 1 - (1-s)^{1-theta}, s in [0,1).
double stationary_pgf(const ModelParams& params, double s);

/// Expected first hitting time of a state with k blocks when started from
/// infinity: 2 / (c (1-theta) k). Requires theta in (0,1).
double hitting_time_from_zero(const ModelParams& params, std::int64_t k);

/// Excursion-measure weight of reaching a state with n blocks, with the
/// normalizing constant taken to be 1: Gamma(n+theta)/Gamma(n).
double excursion_reach_weight(const ModelParams& params, std::int64_t n);

/// Expected time spent in a state with k blocks before the block count first
/// reaches 1, started above k: g_k = u_k / p_{k,1}. Requires k >= 2.
double occupation_before_one(const ModelParams& params, std::int64_t k);

struct PhiMoments {
    double mean;
    double variance;
};

/// Moments of phi_j = sum_{i>j} xi_i with xi_i ~ Exp(c*C(i,2) + lambda*i),
/// the hitting time of level j within an excursion. Closed forms via the
/// digamma/trigamma functions; mean ~ 2/(c j), variance ~ 4/(3 c^2 j^3).
PhiMoments aldous_phi_moments(const ModelParams& params, std::int64_t j);

/// Partial sum S_m of the occupation-ratio series
/// sum_k Gamma(k+theta) / (Gamma(k) Gamma(1+theta) k (k-1+theta)),
/// which diverges exactly when theta >= 1.
double supercritical_series_partial_sum(const ModelParams& params, std::int64_t m);

}  // namespace effc::analytic
