#pragma once

#include "swarm/agents/policy.hpp"
#include "swarm/agents/roles.hpp"
#include "swarm/common/rng.hpp"
#include "swarm/toolhost/toolhost.hpp"

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swarm::agents {

/// Per-turn token synthesis. Each turn appends to the context and pays for all of it
/// again as input, so a session of T turns with mean append m reads about m*T*(T+1)/2.
struct TokenModel {
    double append_mean = 0;
    double out_mean = 0;
    double sigma = 0.5;

    /// Calibrated so a session of exactly `avg_turns` turns matches the profile's means.
    static TokenModel for_profile(const RoleProfile& p);
};

struct SessionLimits {
    int max_turns = 256;
    SimTime think_mean = seconds(10);
    SimTime think_cap = seconds(25);
    double budget_sigma = 0.6;
    double revision_fraction = 0.25;  // turn budget of a revision relative to a fresh session
};

struct TurnReport {
    SimTime duration = 0;
    std::string tool;  // empty on the terminal turn
    bool ok = true;
    std::optional<Errc> error;
    bool truncated = false;
    bool exploration = false;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    std::optional<Terminal> terminal;
    bool max_iterations = false;  // turn cap reached; no turn was taken
};

/// One agent's conversation: a plan to execute through the tool host, padded with
/// read-only exploration to a sampled turn budget.
class Session {
public:
    Session(AgentRecord record, TaskRef task, std::unique_ptr<Policy> policy, TokenModel tokens, double avg_turns,
            SessionLimits limits, Rng rng);

    const AgentRecord& record() const { return record_; }
    AgentRecord& record() { return record_; }
    const TaskRef& task() const { return task_; }
    const SessionLimits& limits() const { return limits_; }
    bool planned() const { return planned_; }
    std::size_t remaining_steps() const { return steps_.size(); }
    const std::vector<std::string>& created_issues() const { return created_; }
    std::int64_t context_tokens() const { return context_; }
    /// Stream the policy draws from; also saved with the session.
    Rng& rng() { return rng_; }

    /// Runs exactly one turn (or reports that the cap was hit).
    TurnReport step(const PlanContext& ctx, const toolhost::ToolHost& host, toolhost::ToolEnv& env);

    /// The session's PR came back; the next turn plans the revision.
    void revise(std::vector<std::string> feedback);

    Json save() const;
    /// Restores state saved by `save` into a session built with the same record, task and policy.
    void load(const Json& j);

private:
    void adopt(Plan plan, double budget_mean);
    toolhost::ToolCall exploration(const PlanContext& ctx);

    AgentRecord record_;
    TaskRef task_;
    std::unique_ptr<Policy> policy_;
    TokenModel tokens_;
    double avg_turns_;
    SessionLimits limits_;
    Rng rng_;

    bool planned_ = false;
    std::optional<std::vector<std::string>> feedback_;
    std::deque<Step> steps_;
    Terminal terminal_;
    bool replan_ = false;
    std::int64_t padding_ = 0;
    std::vector<std::string> created_;
    std::int64_t context_ = 0;
};

}  // namespace swarm::agents
