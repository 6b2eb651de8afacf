#pragma once

#include <cmath>
#include <stdexcept>

#include "u2x/rng.hpp"

namespace u2x {

struct SensingParams {
    double lambda = 0.008;  // per-meter decay of sensing success
};

/// Distance-based sensing success probability, exp(-lambda * d).
inline double sensing_success_prob(double d_m, const SensingParams& p) {
    if (d_m < 0.0) throw std::domain_error("sensing_success_prob: negative distance");
    return std::exp(-p.lambda * d_m);
}

inline bool sample_sensing(double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) throw std::domain_error("sample_sensing: p outside [0,1]");
    return rng.bernoulli(p);
}

}  // namespace u2x
