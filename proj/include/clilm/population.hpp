#pragma once

// Study population: labelled individuals at fixed planar coordinates, and
// the Euclidean distance matrix the spatial kernels consume. Co-located
// individuals are rejected at construction since the d^-beta kernel is
// singular at zero distance.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "clilm/csv.hpp"
#include "clilm/rng.hpp"

namespace clilm {

struct Individual {
    std::string id;
    double x = 0.0;
    double y = 0.0;
};

class Population {
public:
    explicit Population(std::vector<Individual> individuals)
        : individuals_(std::move(individuals)) {
        if (individuals_.size() < 2) {
            throw std::invalid_argument("population must contain at least 2 individuals");
        }
        std::map<std::pair<double, double>, std::size_t> seen_coords;
        for (std::size_t i = 0; i < individuals_.size(); ++i) {
            const auto& ind = individuals_[i];
            if (ind.id.empty()) throw std::invalid_argument("empty individual id");
            if (!index_.emplace(ind.id, i).second) {
                throw std::invalid_argument("duplicate individual id '" + ind.id + "'");
            }
            auto [it, inserted] = seen_coords.emplace(std::make_pair(ind.x, ind.y), i);
            if (!inserted) {
                throw std::invalid_argument(
                    "individuals '" + individuals_[it->second].id + "' and '" + ind.id +
                    "' share coordinates (" + csv::format_double(ind.x) + ", " +
                    csv::format_double(ind.y) + ")");
            }
        }
    }

    std::size_t size() const { return individuals_.size(); }
    const Individual& operator[](std::size_t i) const { return individuals_[i]; }
    const std::vector<Individual>& individuals() const { return individuals_; }

    std::size_t index_of(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) {
            throw std::invalid_argument("unknown individual id '" + std::string(id) + "'");
        }
        return it->second;
    }

    bool contains(std::string_view id) const {
        return index_.find(std::string(id)) != index_.end();
    }

private:
    std::vector<Individual> individuals_;
    std::unordered_map<std::string, std::size_t> index_;
};

class DistanceMatrix {
public:
    explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

    std::size_t size() const { return n_; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
    double& at(std::size_t i, std::size_t j) { return d_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<double> d_;
};

inline DistanceMatrix distance_matrix(const Population& pop) {
    const std::size_t n = pop.size();
    DistanceMatrix d(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = pop[i].x - pop[j].x;
            const double dy = pop[i].y - pop[j].y;
            const double dist = std::sqrt(dx * dx + dy * dy);
            d.at(i, j) = dist;
            d.at(j, i) = dist;
        }
    }
    return d;
}

// n points i.i.d. uniform on [0, side]^2 with ids "1".."n". Exact duplicate
// draws are resampled so the population invariant holds.
inline Population sample_population(std::size_t n, double side, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("population must contain at least 2 individuals");
    if (!(side > 0.0)) throw std::invalid_argument("area side must be positive");
    Rng rng(seed);
    std::vector<Individual> individuals;
    individuals.reserve(n);
    std::map<std::pair<double, double>, bool> used;
    for (std::size_t i = 0; i < n; ++i) {
        double x, y;
        do {
            x = rng.uniform(0.0, side);
            y = rng.uniform(0.0, side);
        } while (!used.emplace(std::make_pair(x, y), true).second);
        individuals.push_back({std::to_string(i + 1), x, y});
    }
    return Population(std::move(individuals));
}

inline void write_population_csv(const Population& pop, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"id", "x", "y"});
    for (const auto& ind : pop.individuals()) {
        w.row({ind.id, csv::format_double(ind.x), csv::format_double(ind.y)});
    }
    w.close();
}

inline Population read_population_csv(const std::filesystem::path& path) {
    const csv::File file = csv::read_file(path, {"id", "x", "y"});
    std::vector<Individual> individuals;
    individuals.reserve(file.records.size());
    for (const auto& rec : file.records) {
        individuals.push_back({rec.fields[0],
                               csv::read_double(path, rec, 1, "x"),
                               csv::read_double(path, rec, 2, "y")});
    }
    return Population(std::move(individuals));
}

}  // namespace clilm
