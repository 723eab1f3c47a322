#pragma once

#include "swarm/agents/policy.hpp"
#include "swarm/common/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <string>

namespace swarm::orchestrator {

using Json = nlohmann::json;

constexpr SimTime minutes(double m) { return seconds(m * 60.0); }
constexpr SimTime hours(double h) { return seconds(h * 3600.0); }

struct ScenarioParams {
    int chapters = 16;
    int def_targets_per_chapter = 1;
    int thm_targets_per_chapter = 8;
    int helpers_per_chapter = 13;
    int defs_per_chapter = 3;
    int exercise_targets = 4;
    int cited_targets = 2;
    int cited_helpers_per_chapter = 1;
    int duplicates = 3;
    int max_imports = 2;
    int max_deps = 3;
};

struct RunConfig {
    std::uint64_t seed = 1;
    ScenarioParams scenario;

    std::size_t concurrency = 16;
    std::size_t worktree_cap = 8;
    SimTime worktree_latency_min = seconds(5);
    SimTime worktree_latency_max = seconds(20);
    SimTime worktree_timeout = hours(6);
    SimTime tick = seconds(60);
    SimTime resume_jitter = seconds(30);
    SimTime think_mean = seconds(10);
    SimTime think_cap = seconds(25);
    SimTime call_latency = seconds(2);
    SimTime build_latency = seconds(30);

    bool dag_mode = false;
    std::size_t batch_size = 1;
    int max_revisions = 10;
    int conflict_retries = 3;
    double budget_sigma = 0.6;
    double revision_fraction = 0.25;
    std::map<std::string, int> max_turns;  // per role name; missing roles use the role default

    agents::PolicySettings policy;

    // Sweeping roles are spawned while their share of all spawns is below these ratios.
    double triage_ratio = 0.02;
    double scan_ratio = 0.01;
    double progress_ratio = 0.012;

    SimTime backoff_base = seconds(120);
    SimTime backoff_cap = hours(1);
    int max_task_failures = 6;  // non-blocked failures before a task is dropped

    SimTime max_sim_time = hours(24 * 30);

    int turn_cap(agents::Role role) const;
};

/// Keys missing from `j` keep their defaults; unknown keys throw Error(invalid_argument).
RunConfig config_from_json(const Json& j);
Json to_json(const RunConfig& c);

}  // namespace swarm::orchestrator
