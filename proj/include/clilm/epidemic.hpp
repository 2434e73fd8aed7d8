#pragma once

// Event-time record of one epidemic: per individual, the time it became
// infectious and (SIR) the time it was removed, over an observation window
// t = 1..t_max. States follow the usual discrete-time convention:
// susceptible on [1, t_inf), infectious on [t_inf, t_rem), removed from
// t_rem on; SI records have no removal times.

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "clilm/csv.hpp"
#include "clilm/population.hpp"

namespace clilm {

struct EventTimes {
    std::string id;
    std::optional<int> t_inf;  // time the individual becomes infectious
    std::optional<int> t_rem;  // removal time, SIR only; t_rem > t_inf
};

class EpidemicRecord {
public:
    EpidemicRecord(std::vector<EventTimes> events, int t_max)
        : events_(std::move(events)), t_max_(t_max) {
        if (events_.empty()) throw std::invalid_argument("empty epidemic record");
        bool any_infected = false;
        for (const auto& e : events_) {
            if (e.t_rem && !e.t_inf) {
                throw std::invalid_argument("individual '" + e.id +
                                            "' has a removal time but no infection time");
            }
            if (e.t_inf) {
                any_infected = true;
                if (*e.t_inf < 1 || *e.t_inf > t_max_) {
                    throw std::invalid_argument("individual '" + e.id +
                                                "' has infectious time outside [1, t_max]");
                }
                if (e.t_rem && *e.t_rem - *e.t_inf < 1) {
                    throw std::invalid_argument("individual '" + e.id +
                                                "' has removal before or at infection");
                }
            }
        }
        if (!any_infected) throw std::invalid_argument("record has no infected individual");
    }

    std::size_t size() const { return events_.size(); }
    int t_max() const { return t_max_; }
    const EventTimes& operator[](std::size_t i) const { return events_[i]; }
    const std::vector<EventTimes>& events() const { return events_; }

    bool infectious_at(std::size_t i, int t) const {
        const auto& e = events_[i];
        return e.t_inf && *e.t_inf <= t && (!e.t_rem || t < *e.t_rem);
    }

    bool susceptible_at(std::size_t i, int t) const {
        const auto& e = events_[i];
        return !e.t_inf || t < *e.t_inf;
    }

    bool removed_at(std::size_t i, int t) const {
        const auto& e = events_[i];
        return e.t_rem && *e.t_rem <= t;
    }

    // Earliest infectious time (the initial case or cases).
    int first_infection_time() const {
        int t0 = std::numeric_limits<int>::max();
        for (const auto& e : events_) {
            if (e.t_inf) t0 = std::min(t0, *e.t_inf);
        }
        return t0;
    }

    std::vector<std::size_t> initial_cases() const {
        const int t0 = first_infection_time();
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < events_.size(); ++i) {
            if (events_[i].t_inf && *events_[i].t_inf == t0) out.push_back(i);
        }
        return out;
    }

    std::vector<std::size_t> infectious_set(int t) const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < events_.size(); ++i) {
            if (infectious_at(i, t)) out.push_back(i);
        }
        return out;
    }

    std::size_t infected_count() const {
        std::size_t n = 0;
        for (const auto& e : events_) {
            if (e.t_inf) ++n;
        }
        return n;
    }

private:
    std::vector<EventTimes> events_;
    int t_max_;
};

// Map population index -> record index by id; throws unless the id sets
// match. Fast path: identical ordering.
inline std::vector<std::size_t> aligned_indices(const EpidemicRecord& record,
                                                const Population& pop) {
    if (record.size() != pop.size()) {
        throw std::invalid_argument("record and population sizes differ");
    }
    std::vector<std::size_t> map(pop.size());
    bool identity = true;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (record[i].id == pop[i].id) {
            map[i] = i;
        } else {
            identity = false;
            break;
        }
    }
    if (identity) return map;
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t r = 0; r < record.size(); ++r) {
        by_id.emplace(record[r].id, r);
    }
    for (std::size_t i = 0; i < pop.size(); ++i) {
        auto it = by_id.find(pop[i].id);
        if (it == by_id.end()) {
            throw std::invalid_argument("record is missing individual '" + pop[i].id + "'");
        }
        map[i] = it->second;
    }
    return map;
}

// Record reordered to match the population's individual order.
inline EpidemicRecord align_record(const EpidemicRecord& record, const Population& pop) {
    const auto map = aligned_indices(record, pop);
    std::vector<EventTimes> events;
    events.reserve(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        events.push_back(record[map[i]]);
    }
    return EpidemicRecord(std::move(events), record.t_max());
}

// CSV format: a leading '# t_max=N' comment carries the observation
// horizon (it is not recoverable from the event columns when the epidemic
// ends early), then header id,t_inf,t_rem with empty fields for
// never-infected / never-removed individuals.
inline void write_epidemic_csv(const EpidemicRecord& record,
                               const std::filesystem::path& path) {
    csv::Writer w(path);
    w.comment(" t_max=" + std::to_string(record.t_max()));
    w.row({"id", "t_inf", "t_rem"});
    for (const auto& e : record.events()) {
        w.row({e.id, e.t_inf ? std::to_string(*e.t_inf) : std::string(),
               e.t_rem ? std::to_string(*e.t_rem) : std::string()});
    }
    w.close();
}

inline EpidemicRecord read_epidemic_csv(const std::filesystem::path& path) {
    const csv::File file = csv::read_file(path, {"id", "t_inf", "t_rem"});
    std::optional<int> t_max;
    for (const auto& comment : file.comments) {
        const std::string_view sv(comment);
        const auto pos = sv.find("t_max=");
        if (pos != std::string_view::npos) {
            t_max = std::stoi(std::string(sv.substr(pos + 6)));
        }
    }
    std::vector<EventTimes> events;
    events.reserve(file.records.size());
    int last_event = 0;
    for (const auto& rec : file.records) {
        EventTimes e;
        e.id = rec.fields[0];
        if (!rec.fields[1].empty()) {
            e.t_inf = static_cast<int>(csv::read_int(path, rec, 1, "t_inf"));
            last_event = std::max(last_event, *e.t_inf);
        }
        if (!rec.fields[2].empty()) {
            e.t_rem = static_cast<int>(csv::read_int(path, rec, 2, "t_rem"));
            last_event = std::max(last_event, *e.t_rem);
        }
        events.push_back(std::move(e));
    }
    return EpidemicRecord(std::move(events), t_max ? *t_max : last_event);
}

}  // namespace clilm
