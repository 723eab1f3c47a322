#pragma once

#include "swarm/orchestrator/simulation.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace swarm::orchestrator {

struct TaskEntry {
    int blocked = 0;
    int failures = 0;
    SimTime not_before = 0;
    bool dropped = false;

    bool operator==(const TaskEntry&) const = default;
};

/// Scheduler state as far as it is observable from outside: the same value can be
/// read off a live simulation, off a checkpoint, or folded from the event log.
struct RunState {
    std::string phase = "running";
    SimTime clock = 0;  // time of the latest event
    std::uint64_t next_seq = 0;
    std::map<std::uint64_t, std::string> live;  // agent -> role
    std::map<std::string, std::int64_t> outcomes;
    std::int64_t spawned = 0;
    std::map<std::string, TaskEntry> tasks;  // pending task pool with backoff
    std::vector<std::uint64_t> queue;
    std::string main_head;
    std::int64_t merges = 0;
    std::int64_t concurrency = 0;
    std::int64_t batch_size = 1;

    bool operator==(const RunState&) const = default;
};

RunState project(const Simulation& sim);
/// Throws Error(corrupt_state) on a malformed checkpoint.
RunState project_checkpoint(const Json& checkpoint);
/// Folds one event. Events must arrive in seq order.
void apply_event(RunState& state, const Json& event);
RunState fold(const std::vector<Json>& events, RunState start = {});

Json to_json(const RunState& s);

/// Violations of the done invariant, empty when it holds or the run is not done.
std::vector<std::string> done_violations(const Simulation& sim);

}  // namespace swarm::orchestrator
