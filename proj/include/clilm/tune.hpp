#pragma once

// Stage-1 tuning of the fixed spatial power: fit the logistic model for
// each candidate beta0 on a grid and keep the candidate with the highest
// maximized log-likelihood. Candidates whose fit fails (separation,
// non-convergence) are excluded; exact ties break toward the smaller
// candidate.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clilm/binary_table.hpp"
#include "clilm/irls.hpp"
#include "clilm/parallel.hpp"

namespace clilm {

struct Beta0Grid {
    std::vector<double> values;

    void validate() const {
        if (values.empty()) throw std::invalid_argument("beta0 grid is empty");
        for (std::size_t i = 1; i < values.size(); ++i) {
            if (!(values[i] > values[i - 1])) {
                throw std::invalid_argument("beta0 grid must be strictly increasing");
            }
        }
    }

    // Grid spec syntax: comma-separated entries, each either a value or a
    // range lo:step:hi (inclusive), e.g. "-1,0.5:0.5:10".
    static Beta0Grid parse(std::string_view spec) {
        Beta0Grid grid;
        std::size_t start = 0;
        while (start <= spec.size()) {
            std::size_t end = spec.find(',', start);
            if (end == std::string_view::npos) end = spec.size();
            const std::string entry(spec.substr(start, end - start));
            if (!entry.empty()) {
                const auto c1 = entry.find(':');
                if (c1 == std::string::npos) {
                    grid.values.push_back(std::stod(entry));
                } else {
                    const auto c2 = entry.find(':', c1 + 1);
                    if (c2 == std::string::npos) {
                        throw std::invalid_argument("bad grid range '" + entry +
                                                    "' (expected lo:step:hi)");
                    }
                    const double lo = std::stod(entry.substr(0, c1));
                    const double step = std::stod(entry.substr(c1 + 1, c2 - c1 - 1));
                    const double hi = std::stod(entry.substr(c2 + 1));
                    if (!(step > 0.0)) throw std::invalid_argument("grid step must be > 0");
                    for (int k = 0;; ++k) {
                        const double v = lo + step * k;
                        if (v > hi + 1e-9 * step) break;
                        grid.values.push_back(v);
                    }
                }
            }
            if (end == spec.size()) break;
            start = end + 1;
        }
        grid.validate();
        return grid;
    }
};

struct TuneCandidate {
    double beta0 = 0.0;
    double log_lik = -std::numeric_limits<double>::infinity();
    double alpha0 = 0.0;
    double alpha1 = 0.0;
    bool converged = false;
};

struct TuneResult {
    double chosen_beta0 = 0.0;
    std::vector<TuneCandidate> candidates;
};

namespace detail {

// Argmax over converged candidates; strict comparison so equal maxima
// resolve to the smaller beta0 (candidates arrive in ascending order).
inline double choose_beta0(const std::vector<TuneCandidate>& candidates) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        if (!candidates[k].converged) continue;
        if (!best || candidates[k].log_lik > candidates[*best].log_lik) best = k;
    }
    if (!best) throw std::runtime_error("tuning failed: no beta0 candidate converged");
    return candidates[*best].beta0;
}

}  // namespace detail

inline TuneResult tune_beta0(const EpidemicRecord& record, const Population& pop,
                             const DistanceMatrix& dists, const Beta0Grid& grid,
                             Transform transform, unsigned jobs = 1) {
    grid.validate();
    TuneResult result;
    result.candidates.resize(grid.values.size());
    parallel_for(grid.values.size(), jobs, [&](std::size_t k) {
        TuneCandidate cand;
        cand.beta0 = grid.values[k];
        try {
            const BinaryTable table = convert(record, pop, dists, cand.beta0, transform);
            const IrlsFit fit = irls_fit(table);
            cand.log_lik = fit.log_lik;
            cand.alpha0 = fit.alpha0;
            cand.alpha1 = fit.alpha1;
            cand.converged = fit.converged;
        } catch (const std::exception&) {
            cand.converged = false;
        }
        result.candidates[k] = cand;
    });
    result.chosen_beta0 = detail::choose_beta0(result.candidates);
    return result;
}

inline TuneResult tune_beta0(const EpidemicRecord& record, const Population& pop,
                             const Beta0Grid& grid, Transform transform,
                             unsigned jobs = 1) {
    return tune_beta0(record, pop, distance_matrix(pop), grid, transform, jobs);
}

inline void write_tune_csv(const TuneResult& result, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.comment(" chosen_beta0=" + csv::format_double(result.chosen_beta0));
    w.row({"beta0", "loglik", "alpha0", "alpha1", "converged"});
    for (const auto& c : result.candidates) {
        w.row({csv::format_double(c.beta0), csv::format_double(c.log_lik),
               csv::format_double(c.alpha0), csv::format_double(c.alpha1),
               c.converged ? "1" : "0"});
    }
    w.close();
}

}  // namespace clilm
