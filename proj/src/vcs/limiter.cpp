#include "swarm/vcs/limiter.hpp"

#include "swarm/common/error.hpp"

#include <algorithm>

namespace swarm::vcs {

CreationLimiter::CreationLimiter(std::size_t cap, SimTime timeout) : cap_(cap), timeout_(timeout) {
    if (cap_ == 0) throw Error(Errc::invalid_argument, "creation cap must be at least 1");
}

void CreationLimiter::set_cap(std::size_t cap) {
    if (cap == 0) throw Error(Errc::invalid_argument, "creation cap must be at least 1");
    cap_ = cap;
}

std::size_t CreationLimiter::in_flight(SimTime now) const {
    return static_cast<std::size_t>(
        std::count_if(grants_.begin(), grants_.end(), [&](const Grant& g) { return g.start <= now && now < g.end; }));
}

CreationLimiter::Grant CreationLimiter::acquire(SimTime now, SimTime latency) {
    std::erase_if(grants_, [&](const Grant& g) { return g.end <= now; });
    // Granted intervals never exceed the cap at any instant, so the earliest
    // feasible start is the first point at which fewer than cap grants overlap
    // [start, start + latency). Candidate starts are `now` and grant ends.
    std::vector<SimTime> candidates{now};
    for (const auto& g : grants_) {
        if (g.end > now) candidates.push_back(g.end);
    }
    std::sort(candidates.begin(), candidates.end());
    for (auto start : candidates) {
        const auto end = start + latency;
        std::vector<std::pair<SimTime, SimTime>> overlapping;
        for (const auto& g : grants_) {
            if (g.start < end && start < g.end) overlapping.emplace_back(std::max(g.start, start), std::min(g.end, end));
        }
        overlapping.emplace_back(start, end);
        if (max_overlap(overlapping) <= cap_) {
            if (start - now > timeout_) {
                throw Error(Errc::rate_limited, "worktree creation would wait past the timeout");
            }
            grants_.push_back(Grant{start, end});
            std::vector<std::pair<SimTime, SimTime>> live;
            for (const auto& g : grants_) live.emplace_back(g.start, g.end);
            max_observed_ = std::max(max_observed_, max_overlap(live));
            return grants_.back();
        }
    }
    throw Error(Errc::rate_limited, "no creation slot available");
}

std::size_t max_overlap(std::vector<std::pair<SimTime, SimTime>> intervals) {
    std::vector<std::pair<SimTime, int>> edges;
    for (const auto& [s, e] : intervals) {
        if (e <= s) continue;
        edges.emplace_back(s, +1);
        edges.emplace_back(e, -1);
    }
    // Ends sort before starts at the same instant: [a, b) and [b, c) do not overlap.
    std::sort(edges.begin(), edges.end());
    int depth = 0;
    int best = 0;
    for (const auto& [_, delta] : edges) {
        depth += delta;
        best = std::max(best, depth);
    }
    return static_cast<std::size_t>(best);
}

}  // namespace swarm::vcs
