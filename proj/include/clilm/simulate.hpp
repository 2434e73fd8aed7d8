#pragma once

// Discrete-time SI/SIR epidemic generation. At each time step every
// susceptible draws an infection Bernoulli against the model's P_it;
// newly infected individuals become infectious at t+1. Under SIR the
// infectious period is Poisson(mean) truncated below at 1, so removal
// happens at t_inf + max(1, draw).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "clilm/epidemic.hpp"
#include "clilm/model.hpp"
#include "clilm/population.hpp"
#include "clilm/rng.hpp"

namespace clilm {

struct SimConfig {
    IlmParams params;
    Compartments compartments;
    int t_end = 0;
    // Population indices infectious at the start; empty means one
    // individual chosen uniformly (the first draw from the seed stream).
    std::vector<std::size_t> initial_infectious;
    std::uint64_t seed = 0;
};

namespace detail {

// Common stepping loop. prob(i, infectious) must return the per-step
// infection probability for susceptible i given the current infectious
// set (ascending indices). Iteration order over susceptibles is fixed so
// a seed fully determines the outcome.
template <class ProbFn>
EpidemicRecord run_epidemic(const Population& pop, const Compartments& compartments,
                            int t_end, std::vector<std::size_t> initial,
                            std::uint64_t seed, ProbFn&& prob, int start_time = 1) {
    const std::size_t n = pop.size();
    if (t_end < 2) throw std::invalid_argument("t_end must be >= 2");
    if (start_time < 1 || start_time >= t_end) {
        throw std::invalid_argument("start_time must lie in [1, t_end)");
    }
    compartments.validate();
    Rng rng(seed);
    if (initial.empty()) {
        initial.push_back(rng.uniform_index(n));
    }
    std::vector<std::optional<int>> t_inf(n), t_rem(n);
    for (const std::size_t i : initial) {
        if (i >= n) throw std::invalid_argument("initial infectious index out of range");
        if (t_inf[i]) throw std::invalid_argument("duplicate initial infectious index");
        t_inf[i] = start_time;
        if (compartments.framework == Framework::sir) {
            t_rem[i] = start_time + std::max(1, rng.poisson(compartments.infectious_period_mean));
        }
    }

    std::vector<std::size_t> infectious;
    for (int t = start_time; t < t_end; ++t) {
        infectious.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (t_inf[i] && *t_inf[i] <= t && (!t_rem[i] || t < *t_rem[i])) {
                infectious.push_back(i);
            }
        }
        if (infectious.empty()) break;  // die-out is absorbing
        for (std::size_t i = 0; i < n; ++i) {
            if (t_inf[i]) continue;  // not susceptible
            const double p = prob(i, std::span<const std::size_t>(infectious));
            if (rng.uniform() < p) {
                t_inf[i] = t + 1;
                if (compartments.framework == Framework::sir) {
                    t_rem[i] = t + 1 +
                               std::max(1, rng.poisson(compartments.infectious_period_mean));
                }
            }
        }
    }

    std::vector<EventTimes> events;
    events.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        events.push_back({pop[i].id, t_inf[i], t_rem[i]});
    }
    return EpidemicRecord(std::move(events), t_end);
}

}  // namespace detail

inline EpidemicRecord simulate(const SimConfig& cfg, const Population& pop,
                               const DistanceMatrix& dists) {
    if (!(cfg.params.alpha >= 0.0) || !(cfg.params.beta > 0.0)) {
        throw std::invalid_argument("ilm simulation requires alpha >= 0 and beta > 0");
    }
    return detail::run_epidemic(
        pop, cfg.compartments, cfg.t_end, cfg.initial_infectious, cfg.seed,
        [&](std::size_t i, std::span<const std::size_t> infectious) {
            return ilm_infection_prob(cfg.params, i, infectious, dists);
        });
}

inline EpidemicRecord simulate(const SimConfig& cfg, const Population& pop) {
    return simulate(cfg, pop, distance_matrix(pop));
}

}  // namespace clilm
