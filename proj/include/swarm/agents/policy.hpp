#pragma once

#include "swarm/agents/review.hpp"
#include "swarm/agents/roles.hpp"
#include "swarm/agents/scenario.hpp"
#include "swarm/checker/check.hpp"
#include "swarm/common/rng.hpp"
#include "swarm/common/types.hpp"
#include "swarm/issues/issue.hpp"
#include "swarm/vcs/repository.hpp"

#include <json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace swarm::agents {

using Json = nlohmann::json;

/// What a session was spawned to do.
struct TaskRef {
    std::string kind;  // "chapter", "issue", "review" or "sweep"
    std::string id;    // chapter id, issue id or PR id; empty for sweeps
    std::string subject;

    std::string label() const;
    bool operator==(const TaskRef&) const = default;
};
Json to_json(const TaskRef& t);
TaskRef task_from_json(const Json& j);

struct PolicySettings {
    double misbehavior_rate = 0.02;  // per opportunity, per kind
    double missed_task_rate = 0.1;   // sketcher forgets to file a proving task
    std::size_t triage_batch = 20;
    std::size_t report_blockers = 30;
    ReviewRules review;
};

/// Snapshot a reviewer works from. Both reviewers of one round get the same one.
struct ReviewView {
    PrId pr;
    std::string branch;
    vcs::Tree base;
    vcs::Tree head;
    std::vector<std::string> ticked;
};

/// Privileged, read-only view of the world a scripted policy plans from. Every
/// effect still goes through tool calls.
struct PlanContext {
    const vcs::VersionControl& repo;
    const Scenario& scenario;
    const checker::Analysis& main;
    const issues::IssueSet& main_issues;
    const std::string& branch;
    AgentId self;
    std::optional<PrId> pr;
    const ReviewView* review = nullptr;
    const PolicySettings& settings;
    Rng& rng;
};

struct Step {
    std::string tool;
    Json args = Json::object();
    bool operator==(const Step&) const = default;
};

enum class TerminalKind { submit, no_pr, blocked, verdict };
std::string_view terminal_name(TerminalKind k);

struct Terminal {
    TerminalKind kind = TerminalKind::no_pr;
    std::string reason;
    std::vector<std::string> refs;    // issue ids a blocked session points at
    bool cite_created = false;        // also reference issues created during the session
    Verdict verdict = Verdict::approve;
    std::vector<std::string> findings;
};
Json to_json(const Terminal& t);
Terminal terminal_from_json(const Json& j);

struct Plan {
    std::vector<Step> steps;
    Terminal terminal;
    bool replan = false;  // once the steps run, plan again instead of finishing
};

/// Decides what a session does. `plan` runs when the session starts; `revise`
/// when its PR comes back with findings.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Plan plan(const PlanContext& ctx) = 0;
    virtual Plan revise(const PlanContext& ctx, const std::vector<std::string>& feedback) = 0;
    virtual Json save() const { return Json::object(); }
    virtual void load(const Json&) {}
};

std::unique_ptr<Policy> make_scripted_policy(Role role, const TaskRef& task);

/// Placeholder for a model-backed policy. Every call throws Errc::unimplemented.
class LlmPolicy final : public Policy {
public:
    explicit LlmPolicy(std::string endpoint) : endpoint_(std::move(endpoint)) {}
    Plan plan(const PlanContext& ctx) override;
    Plan revise(const PlanContext& ctx, const std::vector<std::string>& feedback) override;

private:
    std::string endpoint_;
};

}  // namespace swarm::agents
