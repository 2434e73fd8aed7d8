#pragma once

// Conversion from event-time epidemic data to the long-format binary table
// that standard logistic fitting consumes. One row per susceptible
// individual and time point while the infectious set is nonempty, starting
// at the first infectious time t0; the row's indicator is 1 exactly when
// the individual's infection event happens at that time (it becomes
// infectious at t+1). Initial cases are conditioned on and emit no rows.

#include <algorithm>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clilm/epidemic.hpp"
#include "clilm/model.hpp"
#include "clilm/population.hpp"

namespace clilm {

struct BinaryRow {
    std::string id;
    int t = 0;
    int y = 0;
    double x = 0.0;
};

struct BinaryTable {
    std::vector<BinaryRow> rows;
    double beta0 = 0.0;
    Transform transform = Transform::identity;
    int t0 = 0;
    int t_max = 0;
};

namespace detail {

// Shared row walker: calls visit(i, t, y, infectious_set) for every
// (individual, time) pair the binary data contains, in the emitted order
// (individuals in population order, time ascending). The conditional
// likelihood iterates the identical index set.
template <class Visit>
void for_each_binary_row(const EpidemicRecord& record, const Population& pop,
                         Visit&& visit) {
    const auto map = aligned_indices(record, pop);
    std::vector<std::size_t> record_to_pop(record.size());
    for (std::size_t i = 0; i < map.size(); ++i) record_to_pop[map[i]] = i;
    const int t0 = record.first_infection_time();
    const int t_max = record.t_max();
    if (t0 >= t_max) {
        throw std::invalid_argument("no epidemic: no time step with a nonempty infectious set");
    }

    // Infectious sets for t = t0 .. t_max-1 as ascending population
    // indices, truncated at the first empty set (die-out is absorbing;
    // nothing is observable afterwards).
    std::vector<std::vector<std::size_t>> infectious_by_t;
    int last_t = t0 - 1;
    for (int t = t0; t < t_max; ++t) {
        auto set = record.infectious_set(t);
        if (set.empty()) break;
        for (auto& j : set) j = record_to_pop[j];
        std::sort(set.begin(), set.end());
        infectious_by_t.push_back(std::move(set));
        last_t = t;
    }
    if (infectious_by_t.empty()) {
        throw std::invalid_argument("no epidemic: no time step with a nonempty infectious set");
    }

    for (std::size_t i = 0; i < pop.size(); ++i) {
        const auto& e = record[map[i]];
        if (e.t_inf && *e.t_inf == t0) continue;  // initial case
        const int end_t = e.t_inf ? std::min(*e.t_inf - 1, last_t) : last_t;
        for (int t = t0; t <= end_t; ++t) {
            const int y = (e.t_inf && t == *e.t_inf - 1) ? 1 : 0;
            visit(i, t, y,
                  std::span<const std::size_t>(infectious_by_t[static_cast<std::size_t>(t - t0)]));
        }
    }
}

}  // namespace detail

inline BinaryTable convert(const EpidemicRecord& record, const Population& pop,
                           const DistanceMatrix& dists, double beta0,
                           Transform transform) {
    BinaryTable table;
    table.beta0 = beta0;
    table.transform = transform;
    table.t0 = record.first_infection_time();
    table.t_max = record.t_max();
    detail::for_each_binary_row(
        record, pop,
        [&](std::size_t i, int t, int y, std::span<const std::size_t> infectious) {
            double x;
            try {
                x = spatial_covariate(beta0, i, infectious, dists, transform);
            } catch (const std::domain_error& err) {
                throw std::domain_error("individual '" + pop[i].id + "' at t=" +
                                        std::to_string(t) + ": " + err.what());
            }
            table.rows.push_back({pop[i].id, t, y, x});
        });
    return table;
}

inline BinaryTable convert(const EpidemicRecord& record, const Population& pop,
                           double beta0, Transform transform) {
    return convert(record, pop, distance_matrix(pop), beta0, transform);
}

inline void write_binary_csv(const BinaryTable& table, const std::filesystem::path& csv_path,
                             const std::filesystem::path& meta_path) {
    csv::Writer w(csv_path);
    w.row({"id", "t", "y", "x"});
    for (const auto& row : table.rows) {
        w.row({row.id, std::to_string(row.t), std::to_string(row.y),
               csv::format_double(row.x)});
    }
    w.close();
    std::ofstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot write " + meta_path.string());
    meta << "beta0=" << csv::format_double(table.beta0) << '\n'
         << "transform=" << to_string(table.transform) << '\n'
         << "t0=" << table.t0 << '\n'
         << "t_max=" << table.t_max << '\n';
    if (!meta) throw std::runtime_error("write failed for " + meta_path.string());
}

inline BinaryTable read_binary_csv(const std::filesystem::path& csv_path,
                                   const std::filesystem::path& meta_path) {
    BinaryTable table;
    const csv::File file = csv::read_file(csv_path, {"id", "t", "y", "x"});
    table.rows.reserve(file.records.size());
    for (const auto& rec : file.records) {
        const long y = csv::read_int(csv_path, rec, 2, "y");
        if (y != 0 && y != 1) {
            throw std::runtime_error(csv_path.string() + ":" + std::to_string(rec.line_no) +
                                     ": y must be 0 or 1");
        }
        table.rows.push_back({rec.fields[0],
                              static_cast<int>(csv::read_int(csv_path, rec, 1, "t")),
                              static_cast<int>(y),
                              csv::read_double(csv_path, rec, 3, "x")});
    }
    std::ifstream meta(meta_path);
    if (!meta) throw std::runtime_error("cannot open " + meta_path.string());
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "beta0") {
            table.beta0 = std::stod(value);
        } else if (key == "transform") {
            table.transform = transform_from_string(value);
        } else if (key == "t0") {
            table.t0 = std::stoi(value);
        } else if (key == "t_max") {
            table.t_max = std::stoi(value);
        }
    }
    return table;
}

}  // namespace clilm
