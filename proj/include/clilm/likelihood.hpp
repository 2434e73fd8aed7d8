#pragma once

// Exact log-likelihoods for the spatial ILM and the conditional logistic
// ILM, plus the score vector used by IRLS. Everything is computed on the
// log scale with log1p/expm1 formulations so ln(1-P) stays accurate when
// the spatial hazards are tiny.
//
// Initial cases (minimal infectious time) are conditioned on: they
// contribute no factors to either likelihood, matching the binary-data
// construction. An infection claimed at a time step with zero hazard
// yields -inf rather than an exception, so samplers and grid search can
// treat such states as rejected.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "clilm/binary_table.hpp"
#include "clilm/epidemic.hpp"
#include "clilm/model.hpp"
#include "clilm/numeric.hpp"
#include "clilm/population.hpp"

namespace clilm {

struct LogLik {
    double value = 0.0;
    std::size_t n_terms = 0;  // number of Bernoulli factors
};

// Spatial ILM log-likelihood, direct route: walk t = 1..t_max-1 and add
// ln P_it for each infection event and ln(1-P_it) = -alpha*D_it for each
// individual still susceptible at t+1.
inline LogLik ilm_log_likelihood(const EpidemicRecord& record, const Population& pop,
                                 const DistanceMatrix& dists, const IlmParams& params) {
    const auto map = aligned_indices(record, pop);
    const int t0 = record.first_infection_time();
    const int t_max = record.t_max();
    LogLik out;
    std::vector<std::size_t> infectious;
    for (int t = 1; t < t_max; ++t) {
        infectious.clear();
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (record.infectious_at(map[i], t)) infectious.push_back(i);
        }
        const std::span<const std::size_t> inf_view(infectious);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            const auto& e = record[map[i]];
            if (e.t_inf && *e.t_inf == t0) continue;  // conditioned on
            if (e.t_inf && *e.t_inf == t + 1) {
                // infection event at t
                const double hazard =
                    params.alpha * spatial_pressure(params.beta, i, inf_view, dists);
                out.value += hazard > 0.0 ? log1mexp(hazard)
                                          : -std::numeric_limits<double>::infinity();
                ++out.n_terms;
            } else if (record.susceptible_at(map[i], t + 1)) {
                const double hazard =
                    params.alpha * spatial_pressure(params.beta, i, inf_view, dists);
                out.value -= hazard;
                ++out.n_terms;
            }
        }
    }
    return out;
}

inline LogLik ilm_log_likelihood(const EpidemicRecord& record, const Population& pop,
                                 const IlmParams& params) {
    return ilm_log_likelihood(record, pop, distance_matrix(pop), params);
}

// CL-ILM log-likelihood on the raw record; iterates exactly the index set
// of the converted binary table.
inline LogLik conditional_log_likelihood(const EpidemicRecord& record, const Population& pop,
                                         const DistanceMatrix& dists,
                                         const ClilmParams& params) {
    LogLik out;
    detail::for_each_binary_row(
        record, pop,
        [&](std::size_t i, int t, int y, std::span<const std::size_t> infectious) {
            (void)t;
            const double x =
                spatial_covariate(params.beta0, i, infectious, dists, params.transform);
            const double z = params.alpha0 + params.alpha1 * x;
            out.value += y ? log_logistic(z) : log1m_logistic(z);
            ++out.n_terms;
        });
    return out;
}

inline LogLik conditional_log_likelihood(const EpidemicRecord& record, const Population& pop,
                                         const ClilmParams& params) {
    return conditional_log_likelihood(record, pop, distance_matrix(pop), params);
}

// Bernoulli log-likelihood of a binary table at (alpha0, alpha1).
inline LogLik table_log_likelihood(std::span<const BinaryRow> rows, double alpha0,
                                   double alpha1) {
    LogLik out;
    for (const auto& row : rows) {
        const double z = alpha0 + alpha1 * row.x;
        out.value += row.y ? log_logistic(z) : log1m_logistic(z);
        ++out.n_terms;
    }
    return out;
}

// Gradient of the table log-likelihood in (alpha0, alpha1).
inline std::array<double, 2> clilm_score(const BinaryTable& table, double alpha0,
                                         double alpha1) {
    double g0 = 0.0, g1 = 0.0;
    for (const auto& row : table.rows) {
        const double p = logistic(alpha0 + alpha1 * row.x);
        const double r = static_cast<double>(row.y) - p;
        g0 += r;
        g1 += row.x * r;
    }
    return {g0, g1};
}

// True when the Bernoulli log-likelihood over the table's rows agrees with
// conditional_log_likelihood on the raw record to 1e-10 relative.
inline bool round_trip_check(const EpidemicRecord& record, const Population& pop,
                             const ClilmParams& params, const BinaryTable& table) {
    const double lhs = table_log_likelihood(table.rows, params.alpha0, params.alpha1).value;
    const double rhs = conditional_log_likelihood(record, pop, params).value;
    const double tol = 1e-10 * std::max(1.0, std::abs(rhs));
    return std::abs(lhs - rhs) <= tol;
}

// Pair-compressed ILM likelihood evaluator for repeated evaluation at
// different parameter values (MCMC). The susceptible side collapses to a
// weighted sum over distinct (i, j) pairs: while i remains susceptible it
// accrues the kernel of every infectious j once per time step, so
//   sum_t sum_{i in S(t+1)} D_it(beta) = sum_{pairs} c_ij * d_ij^-beta
// with c_ij the number of steps j was infectious while i stayed
// susceptible through t+1. Infection events keep their own kernel lists.
// Agrees with ilm_log_likelihood to floating-point reordering error.
class IlmLikelihoodCache {
public:
    IlmLikelihoodCache(const EpidemicRecord& record, const Population& pop,
                       const DistanceMatrix& dists) {
        const auto map = aligned_indices(record, pop);
        std::vector<std::size_t> record_to_pop(record.size());
        for (std::size_t i = 0; i < map.size(); ++i) record_to_pop[map[i]] = i;
        const int t0 = record.first_infection_time();
        const int t_max = record.t_max();
        const std::size_t n = pop.size();

        n_susceptible_terms_ = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& ei = record[map[i]];
            if (ei.t_inf && *ei.t_inf == t0) continue;  // conditioned on
            // i contributes a susceptible factor for t = 1..cap_i
            const int cap_i = ei.t_inf ? std::min(*ei.t_inf - 2, t_max - 1) : t_max - 1;
            if (cap_i >= 1) n_susceptible_terms_ += static_cast<std::size_t>(cap_i);
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const auto& ej = record[map[j]];
                if (!ej.t_inf) continue;
                const int start_j = *ej.t_inf;
                const int end_j = ej.t_rem ? std::min(*ej.t_rem - 1, t_max - 1) : t_max - 1;
                const int c = std::min(end_j, cap_i) - start_j + 1;
                if (c > 0) {
                    pair_log_dist_.push_back(std::log(dists(i, j)));
                    pair_weight_.push_back(static_cast<double>(c));
                }
            }
        }

        for (std::size_t i = 0; i < n; ++i) {
            const auto& ei = record[map[i]];
            if (!ei.t_inf || *ei.t_inf == t0) continue;
            const int t_event = *ei.t_inf - 1;
            event_offset_.push_back(event_log_dist_.size());
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i && record.infectious_at(map[j], t_event)) {
                    event_log_dist_.push_back(std::log(dists(i, j)));
                }
            }
        }
        event_offset_.push_back(event_log_dist_.size());
    }

    IlmLikelihoodCache(const EpidemicRecord& record, const Population& pop)
        : IlmLikelihoodCache(record, pop, distance_matrix(pop)) {}

    LogLik log_likelihood(const IlmParams& params) const {
        double pressure_sum = 0.0;
        for (std::size_t k = 0; k < pair_log_dist_.size(); ++k) {
            pressure_sum += pair_weight_[k] * std::exp(-params.beta * pair_log_dist_[k]);
        }
        double value = -params.alpha * pressure_sum;
        const std::size_t n_events = event_offset_.size() - 1;
        for (std::size_t e = 0; e < n_events; ++e) {
            double d = 0.0;
            for (std::size_t k = event_offset_[e]; k < event_offset_[e + 1]; ++k) {
                d += std::exp(-params.beta * event_log_dist_[k]);
            }
            const double hazard = params.alpha * d;
            value += hazard > 0.0 ? log1mexp(hazard)
                                  : -std::numeric_limits<double>::infinity();
        }
        return {value, n_susceptible_terms_ + n_events};
    }

private:
    std::vector<double> pair_log_dist_;
    std::vector<double> pair_weight_;
    std::vector<double> event_log_dist_;
    std::vector<std::size_t> event_offset_;
    std::size_t n_susceptible_terms_ = 0;
};

}  // namespace clilm
