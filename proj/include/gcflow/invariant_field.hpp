#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace gcflow {

// Why a cell left the valid set.
enum class CellCause : uint8_t {
    none = 0,
    boundary = 1,      // lost to domain-of-dependence erosion at the mask edge
    hyperbolicity = 2, // r - s crossed the floor from above
    overflow = 3,      // non-finite state or magnitude past the ceiling
};

// One time level of the weighted invariants and their scaled x-derivatives.
struct InvariantField {
    double t = 0.0;
    std::vector<double> xs;
    std::vector<double> r, s;
    std::vector<double> r_tilde, s_tilde;
    std::vector<uint8_t> valid;
    std::vector<uint8_t> cause;

    size_t n() const { return xs.size(); }
    size_t count_valid() const;
    // Largest max(|r|,|s|) over valid cells; 0 if none.
    double sup_state() const;
    // Smallest r - s over valid cells; +inf if none.
    double min_separation() const;

    void write_csv(const std::string& path) const;
};

InvariantField make_field(std::vector<double> xs, const std::vector<double>& r0,
                          const std::vector<double>& s0);

struct InvalidationEvent {
    double t = 0.0;
    double x = 0.0;
    CellCause cause = CellCause::none;
};

// Full record of a Cauchy evolution: requested snapshots plus bookkeeping.
struct Evolution {
    std::vector<InvariantField> snapshots;
    std::vector<InvalidationEvent> events; // hyperbolicity/overflow only, in time order
    double t_end = 0.0;
    size_t steps = 0;
    bool interior_survived = true; // no non-boundary invalidation happened
    double first_invalidation_time() const {
        return events.empty() ? std::numeric_limits<double>::infinity() : events.front().t;
    }
};

} // namespace gcflow
