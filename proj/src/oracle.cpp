#include "effc/oracle.hpp"

#include <vector>

namespace effc::oracle {

GeneratorMatrix build_generator(const ModelParams& params, std::int64_t K) {
    if (K < 2) throw std::domain_error("build_generator: K >= 2 required");
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(3 * K));
    for (std::int64_t j = 1; j <= K; ++j) {
        const auto i = static_cast<int>(j - 1);
        double out = 0.0;
        if (j >= 2) {
            const double rc = coalescence_rate(params, static_cast<double>(j));
            trip.emplace_back(i, i - 1, rc);
            out += rc;
        }
        if (j <= K - 1) {
            const double rf = params.lambda * static_cast<double>(j);
            trip.emplace_back(i, static_cast<int>(K - 1), rf);
            out += rf;
        }
        trip.emplace_back(i, i, -out);
    }
    Eigen::SparseMatrix<double> Q(static_cast<int>(K), static_cast<int>(K));
    Q.setFromTriplets(trip.begin(), trip.end());
    return {K, params, std::move(Q)};
}

Eigen::VectorXd stationary_solve(const GeneratorMatrix& gen) {
    const std::int64_t K = gen.K;
    const ModelParams& p = gen.params;
    if (!(p.lambda > 0.0))
        throw std::runtime_error("stationary_solve: chain reducible for lambda = 0");
    // Cut balance between {1..k} and {k+1..K}: all fragmentation flow from
    // below the cut crosses it upward, only coalescence from k+1 crosses down:
    //   c*C(k+1,2) * pi_{k+1} = lambda * sum_{j<=k} j * pi_j.
    Eigen::VectorXd pi(K);
    pi(0) = 1.0;
    double weighted = 1.0;  // sum j*pi_j over j <= k
    for (std::int64_t k = 1; k < K; ++k) {
        pi(k) = p.lambda * weighted / coalescence_rate(p, static_cast<double>(k + 1));
        weighted += static_cast<double>(k + 1) * pi(k);
    }
    pi /= pi.sum();
    return pi;
}

Eigen::VectorXd exact_hitting_times(const GeneratorMatrix& gen, std::int64_t target) {
    const std::int64_t K = gen.K;
    if (target < 1 || target > K) throw std::domain_error("exact_hitting_times: 1 <= target <= K");
    const ModelParams& p = gen.params;
    // Write h_j = a_j + b_j * h_K and propagate upward from h_target = 0;
    // the equation at K closes the system. States below the target only
    // reach it through K, so they are back-filled afterwards.
    Eigen::VectorXd a = Eigen::VectorXd::Zero(K), b = Eigen::VectorXd::Zero(K);
    for (std::int64_t j = target + 1; j < K; ++j) {
        const double rc = coalescence_rate(p, static_cast<double>(j));
        const double rf = p.lambda * static_cast<double>(j);
        const double R = rc + rf;
        a(j - 1) = 1.0 / R + (rc / R) * a(j - 2);
        b(j - 1) = (rc / R) * b(j - 2) + rf / R;
    }
    Eigen::VectorXd h(K);
    if (target == K) {
        h(K - 1) = 0.0;
    } else {
        const double uK = 1.0 / coalescence_rate(p, static_cast<double>(K));
        h(K - 1) = (uK + a(K - 2)) / (1.0 - b(K - 2));
    }
    for (std::int64_t j = K - 1; j > target; --j) h(j - 1) = a(j - 1) + b(j - 1) * h(K - 1);
    h(target - 1) = 0.0;
    if (target > 1) {
        // Below the target: j = 1 can only fragment to K.
        h(0) = 1.0 / p.lambda + h(K - 1);
        for (std::int64_t j = 2; j < target; ++j) {
            const double rc = coalescence_rate(p, static_cast<double>(j));
            const double rf = p.lambda * static_cast<double>(j);
            const double R = rc + rf;
            h(j - 1) = 1.0 / R + (rc / R) * h(j - 2) + (rf / R) * h(K - 1);
        }
    }
    return h;
}

Eigen::VectorXd frag_absorption_times(const GeneratorMatrix& gen) {
    const std::int64_t K = gen.K;
    const ModelParams& p = gen.params;
    Eigen::VectorXd v(K);
    v(0) = 1.0 / p.lambda;
    for (std::int64_t j = 2; j <= K; ++j) {
        const double rc = coalescence_rate(p, static_cast<double>(j));
        const double R = rc + p.lambda * static_cast<double>(j);
        v(j - 1) = 1.0 / R + (rc / R) * v(j - 2);
    }
    return v;
}

}  // namespace effc::oracle
