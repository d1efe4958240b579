#pragma once

#include <stdexcept>
#include <string>

namespace effc {

/// Raised when a quantity is requested outside the regime where it exists
/// (e.g. the stationary law for theta >= 1).
class RegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Model rates. theta is always derived from (c, lambda); it is never stored
/// or accepted independently, so inconsistent triples cannot be constructed.
struct ModelParams {
    double c;       // coalescence rate per pair of blocks
    double lambda;  // fragmentation (shatter) rate per block

    // lambda = 0 (pure Kingman coalescent) is admitted as a degenerate case;
    // operations that need fragmentation reject it individually.
    ModelParams(double c_, double lambda_) : c(c_), lambda(lambda_) {
        if (!(c > 0.0) || !(lambda >= 0.0))
            throw std::invalid_argument("ModelParams: require c > 0 and lambda >= 0");
    }

    double theta() const { return 2.0 * lambda / c; }
};

enum class Regime { Subcritical, Critical, Supercritical };

inline Regime classify_regime(const ModelParams& params) {
    const double theta = params.theta();
    if (theta < 1.0) return Regime::Subcritical;
    if (theta == 1.0) return Regime::Critical;
    return Regime::Supercritical;
}

inline const char* to_string(Regime r) {
    switch (r) {
        case Regime::Subcritical: return "Subcritical";
        case Regime::Critical: return "Critical";
        default: return "Supercritical";
    }
}

/// Total jump rate out of a state with k blocks: c*C(k,2) + lambda*k.
inline double total_rate(const ModelParams& p, double k) {
    return p.c * k * (k - 1.0) / 2.0 + p.lambda * k;
}

/// Coalescence rate out of a state with k blocks: c*C(k,2).
inline double coalescence_rate(const ModelParams& p, double k) {
    return p.c * k * (k - 1.0) / 2.0;
}

}  // namespace effc
