#pragma once

#include "swarm/agents/policy.hpp"
#include "swarm/agents/review.hpp"
#include "swarm/agents/roles.hpp"
#include "swarm/checker/check.hpp"
#include "swarm/common/types.hpp"
#include "swarm/vcs/repository.hpp"

#include <json.hpp>

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace swarm::pipeline {

using Json = nlohmann::json;

enum class PrState { in_review, returned, queued, merged, suppressed, failed_merge, abandoned, max_revisions };
std::string_view state_name(PrState s);
std::optional<PrState> parse_state(std::string_view s);
bool terminal_state(PrState s);

struct Review {
    AgentId reviewer;
    agents::Role role = agents::Role::math_reviewer;
    agents::Verdict verdict = agents::Verdict::approve;
    std::vector<std::string> findings;
};

struct PullRequest {
    PrId id;
    AgentId author;
    agents::Role author_role = agents::Role::prover;
    std::string branch;
    std::string task;
    PrState state = PrState::in_review;
    int revision_count = 0;
    int attempt = 0;  // merge attempts that hit a conflict
    int round = 0;    // review rounds started
    bool approved = false;
    vcs::CommitId base;
    vcs::CommitId head;
    std::vector<std::string> ticked;
    std::vector<Review> reviews;        // current round only
    std::vector<std::string> feedback;  // why it last came back
    SimTime submitted = 0;
    SimTime closed = 0;
};

struct PipelineConfig {
    int max_revisions = 10;
    int conflict_retries = 3;
    std::size_t batch_size = 1;  // 1 is a plain FIFO queue
};

enum class DecisionKind { queued, returned, suppressed, max_revisions };
std::string_view decision_name(DecisionKind k);

struct Decision {
    DecisionKind kind = DecisionKind::queued;
    std::vector<std::string> feedback;
};

enum class QueueOutcome { merged, conflict, build_failed, failed_merge, max_revisions };
std::string_view queue_outcome_name(QueueOutcome k);

struct QueueEvent {
    PrId pr;
    QueueOutcome outcome = QueueOutcome::merged;
    std::optional<vcs::MainAdvance> advance;
    std::vector<std::string> feedback;
};

struct QueueStep {
    std::vector<QueueEvent> events;
    std::size_t builds = 0;  // staging builds spent
};

/// Issue ids that are open in `base` and resolved in `head`.
std::vector<std::string> ticked_issues(const vcs::Tree& base, const vcs::Tree& head);

/// Review, decision and merge queue. The queue is the only writer to main.
class Pipeline {
public:
    Pipeline(vcs::VersionControl& repo, const checker::Checker& checker, PipelineConfig config = {});

    /// Opens a PR for `branch`, or resubmits a returned one. Throws Error(empty_diff)
    /// when the branch has no changes against its base.
    PullRequest& submit(PrId id, AgentId author, agents::Role role, const std::string& branch, const std::string& task,
                        SimTime now);
    agents::ReviewView review_view(PrId id) const;
    void record_review(PrId id, Review review);
    /// True once both reviewers answered, or one rejected.
    bool reviews_complete(PrId id) const;
    Decision decide(PrId id, SimTime now);
    /// The author gave up on a returned PR.
    void abandon(PrId id, SimTime now);

    bool queue_empty() const { return queue_.empty(); }
    std::vector<PrId> queue() const { return {queue_.begin(), queue_.end()}; }
    /// Processes the head of the queue: one PR, or one batch when batch_size > 1.
    QueueStep queue_step(SimTime now);

    const PullRequest& get(PrId id) const;
    bool has(PrId id) const { return prs_.count(id) > 0; }
    const std::map<PrId, PullRequest>& all() const { return prs_; }
    const PipelineConfig& config() const { return config_; }
    void set_batch_size(std::size_t b) { config_.batch_size = b == 0 ? 1 : b; }

    Json save() const;
    void load(const Json& j);

private:
    PullRequest& at(PrId id);
    /// Counts a conflict or build failure against the PR and sends it back.
    QueueEvent send_back(PullRequest& pr, QueueOutcome why, std::vector<std::string> feedback, SimTime now);
    QueueEvent merge_one(PullRequest& pr, SimTime now);
    QueueStep batch_step(SimTime now);

    vcs::VersionControl& repo_;
    const checker::Checker& checker_;
    PipelineConfig config_;
    std::map<PrId, PullRequest> prs_;
    std::deque<PrId> queue_;
};

}  // namespace swarm::pipeline
