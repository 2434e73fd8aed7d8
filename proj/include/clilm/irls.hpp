#pragma once

// Maximum-likelihood logistic fit of the binary table by iteratively
// reweighted least squares (Newton's method on the Bernoulli
// log-likelihood), two parameters: intercept and slope on the spatial
// covariate. Step-halving keeps each iteration an ascent step.

#include <array>
#include <cmath>
#include <stdexcept>

#include "clilm/likelihood.hpp"

namespace clilm {

class separation_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct IrlsFit {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    double log_lik = 0.0;
    bool converged = false;
    int iterations = 0;
};

inline IrlsFit irls_fit(const BinaryTable& table) {
    constexpr double kScoreTol = 1e-8;
    constexpr int kMaxIter = 50;
    constexpr double kCoefLimit = 30.0;  // divergence guard

    const auto& rows = table.rows;
    if (rows.size() < 2) throw std::invalid_argument("irls: need at least 2 rows");
    const double x0 = rows.front().x;
    bool x_varies = false;
    for (const auto& row : rows) {
        if (row.x != x0) {
            x_varies = true;
            break;
        }
    }
    if (!x_varies) {
        throw std::invalid_argument("irls: covariate is constant, slope unidentifiable");
    }

    IrlsFit fit;
    double ll = table_log_likelihood(rows, fit.alpha0, fit.alpha1).value;
    for (int iter = 1; iter <= kMaxIter; ++iter) {
        fit.iterations = iter;
        // score and observed information
        double g0 = 0.0, g1 = 0.0, w00 = 0.0, w01 = 0.0, w11 = 0.0;
        for (const auto& row : rows) {
            const double p = logistic(fit.alpha0 + fit.alpha1 * row.x);
            const double r = static_cast<double>(row.y) - p;
            const double w = p * (1.0 - p);
            g0 += r;
            g1 += row.x * r;
            w00 += w;
            w01 += w * row.x;
            w11 += w * row.x * row.x;
        }
        const double det = w00 * w11 - w01 * w01;
        const double scale = std::max(w00 * w11, w01 * w01);
        if (!(det > 1e-12 * std::max(scale, 1e-300))) {
            throw std::invalid_argument("irls: singular weighted design");
        }
        double step0 = (w11 * g0 - w01 * g1) / det;
        double step1 = (w00 * g1 - w01 * g0) / det;

        // step-halve until the log-likelihood does not decrease
        double new0 = fit.alpha0 + step0;
        double new1 = fit.alpha1 + step1;
        double new_ll = table_log_likelihood(rows, new0, new1).value;
        for (int halvings = 0; halvings < 30 && !(new_ll >= ll - 1e-12); ++halvings) {
            step0 *= 0.5;
            step1 *= 0.5;
            new0 = fit.alpha0 + step0;
            new1 = fit.alpha1 + step1;
            new_ll = table_log_likelihood(rows, new0, new1).value;
        }
        fit.alpha0 = new0;
        fit.alpha1 = new1;
        ll = new_ll;

        const auto score = clilm_score(table, fit.alpha0, fit.alpha1);
        const double max_score = std::max(std::abs(score[0]), std::abs(score[1]));
        if (std::max(std::abs(fit.alpha0), std::abs(fit.alpha1)) > kCoefLimit) {
            // diverging coefficients: either the score has not settled or it
            // only vanished because every outcome is classified with margin
            // (the likelihood sup is not attained)
            bool perfectly_classified = true;
            for (const auto& row : rows) {
                const double p = logistic(fit.alpha0 + fit.alpha1 * row.x);
                if (row.y == 1 ? p <= 1.0 - 1e-8 : p >= 1e-8) {
                    perfectly_classified = false;
                    break;
                }
            }
            if (max_score >= kScoreTol || perfectly_classified) {
                throw separation_error("irls: coefficients diverging, data separated");
            }
        }
        if (max_score < kScoreTol) {
            fit.converged = true;
            break;
        }
    }
    fit.log_lik = ll;
    return fit;
}

}  // namespace clilm
