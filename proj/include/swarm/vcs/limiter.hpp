#pragma once

#include "swarm/common/types.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace swarm::vcs {

/// Caps concurrent in-flight worktree creations in simulated time. Each creation
/// holds a slot for its modelled latency; requests arrive in non-decreasing time.
class CreationLimiter {
public:
    struct Grant {
        SimTime start = 0;
        SimTime end = 0;
    };

    CreationLimiter(std::size_t cap, SimTime timeout);

    /// Earliest slot for a request at `now` taking `latency`. Throws
    /// Error(rate_limited) when the wait would exceed the timeout.
    Grant acquire(SimTime now, SimTime latency);

    void set_cap(std::size_t cap);
    std::size_t cap() const { return cap_; }
    std::size_t in_flight(SimTime now) const;
    std::size_t max_observed() const { return max_observed_; }

private:
    std::size_t cap_;
    SimTime timeout_;
    std::vector<Grant> grants_;  // grants that may still be live
    std::size_t max_observed_ = 0;
};

/// Largest number of [start, end) intervals covering one instant.
std::size_t max_overlap(std::vector<std::pair<SimTime, SimTime>> intervals);

}  // namespace swarm::vcs
