#pragma once

// Numerically careful pieces shared by the probability and likelihood code.

#include <algorithm>
#include <cmath>

namespace clilm {

// log(1 - exp(-x)) for x >= 0; -inf at x = 0. Split at log 2 per the usual
// log1mexp recipe so both branches stay accurate.
inline double log1mexp(double x) {
    if (x <= 0.6931471805599453) {
        return std::log(-std::expm1(-x));
    }
    return std::log1p(-std::exp(-x));
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
    if (x > 0.0) {
        return x + std::log1p(std::exp(-x));
    }
    return std::log1p(std::exp(x));
}

// Inverse-logit with the argument clamped inside the exp only, so the
// result is strictly inside (0, 1) even for huge |z|.
inline double logistic(double z) {
    const double zc = std::clamp(z, -36.0, 36.0);
    return 1.0 / (1.0 + std::exp(-zc));
}

// log logistic(z) and log(1 - logistic(z)) evaluated on the unclamped
// argument; finite for all finite z.
inline double log_logistic(double z) { return -softplus(-z); }
inline double log1m_logistic(double z) { return -softplus(z); }

}  // namespace clilm
