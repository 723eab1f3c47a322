#pragma once

#include "swarm/accounting/report.hpp"
#include "swarm/agents/scenario.hpp"
#include "swarm/agents/session.hpp"
#include "swarm/checker/check.hpp"
#include "swarm/control/event_log.hpp"
#include "swarm/issues/issue.hpp"
#include "swarm/orchestrator/config.hpp"
#include "swarm/pipeline/pipeline.hpp"
#include "swarm/toolhost/toolhost.hpp"
#include "swarm/vcs/limiter.hpp"
#include "swarm/vcs/repository.hpp"

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

namespace swarm::orchestrator {

enum class Phase { running, paused, draining, done, stopped };
std::string_view phase_name(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

/// Operator commands: "pause", "resume", "drain", "stop", "set-concurrency" {value},
/// "set-batch-size" {value}, "spawn-status" (paused only) and "create-issue"
/// {title, body?, kind?, subject?}. They take effect at the next tick, each logged
/// as a `command` event first.
struct OperatorCommand {
    std::string name;
    Json args = Json::object();
};

struct CommandResult {
    bool accepted = false;
    std::string message;
    Errc code = Errc::invalid_argument;  // why it was rejected
};

struct ResumeOptions {
    bool resume_sessions = true;
};

/// One advance of main, with the audit taken right after it.
struct MergeRecord {
    PrId pr;
    AgentId author;
    agents::Role role = agents::Role::prover;
    std::string commit;
    SimTime time = 0;
    bool main_ok = false;
    vcs::DiffStat stat;
    std::size_t decls = 0;
    std::size_t sorries = 0;
    std::size_t proved_targets = 0;
};

enum class LiveState { waiting, creating, running, parked };
std::string_view live_state_name(LiveState s);

/// A session that has not ended yet, as shown to operators.
struct SessionInfo {
    agents::AgentRecord record;  // outcome not set yet
    LiveState state = LiveState::waiting;
    std::optional<PrId> pr;
    std::optional<PrId> reviewing;
};

/// Event-driven run of the whole swarm in simulated time. Single-threaded; the
/// only entry points that may be called from another thread are `submit_command`
/// and the event log.
class Simulation {
public:
    explicit Simulation(RunConfig config, std::shared_ptr<control::EventLog> log = nullptr);
    static std::unique_ptr<Simulation> resume(const Json& checkpoint, ResumeOptions options = {},
                                              std::shared_ptr<control::EventLog> log = nullptr);
    ~Simulation();

    /// Processes events until the run finishes or the next event lies past `until`.
    void run(std::optional<SimTime> until = std::nullopt);
    /// Processes one event. False when the run is over.
    bool step();

    SimTime now() const { return now_; }
    Phase phase() const { return phase_.load(); }
    bool finished() const {
        const auto p = phase_.load();
        return p == Phase::done || p == Phase::stopped;
    }

    CommandResult submit_command(OperatorCommand cmd);
    Json checkpoint() const;

    const RunConfig& config() const { return config_; }
    const agents::Scenario& scenario() const { return scenario_; }
    const vcs::InMemoryRepo& repo() const { return *repo_; }
    const pipeline::Pipeline& prs() const { return *pipeline_; }
    const std::vector<agents::AgentRecord>& records() const { return records_; }
    const std::vector<MergeRecord>& merges() const { return merges_; }
    const control::EventLog& log() const { return *log_; }
    std::shared_ptr<control::EventLog> shared_log() const { return log_; }

    /// Report over everything finished so far. Matches `accounting::report_from_log` on this run's log.
    accounting::RunReport report(const accounting::SeriesOptions& options = {}) const;
    std::uint64_t spawned() const { return spawned_total_; }

    std::vector<SessionInfo> sessions() const;

    std::size_t live_count() const { return slots_used_; }
    std::size_t session_count() const { return live_.size(); }
    std::map<std::string, std::size_t> sessions_by_state() const;
    std::size_t concurrency() const { return concurrency_; }
    checker::TargetSummary targets() const;
    /// Worktree creation intervals granted so far, [start, end).
    const std::vector<std::pair<SimTime, SimTime>>& worktree_intervals() const { return worktree_intervals_; }
    std::size_t max_concurrent_creations() const { return vcs::max_overlap(worktree_intervals_); }

private:
    struct Live {
        std::unique_ptr<agents::Session> session;
        agents::Role role = agents::Role::prover;
        LiveState state = LiveState::waiting;
        bool holds_slot = false;
        bool priority = false;
        std::uint64_t wait_order = 0;
        std::string branch;
        bool own_branch = true;  // reviewers read the author's branch
        std::optional<PrId> pr;  // reserved for authors
        std::optional<PrId> reviewing;
        int review_round = 0;
        int review_attempt = 1;
        bool cancelled = false;
        bool needs_worktree = false;
        bool worktree_ready = false;
        std::map<std::string, std::optional<std::string>> restore_dirty;
        SimTime not_before = 0;
        std::uint64_t epoch = 0;
        int worktree_attempts = 0;
        std::shared_ptr<agents::ReviewView> view;
    };

    enum class EvKind { tick, turn, worktree_ready, worktree_request, queue_step, admit };
    struct Ev {
        SimTime t = 0;
        std::uint64_t order = 0;
        EvKind kind = EvKind::tick;
        std::uint64_t agent = 0;
        std::uint64_t epoch = 0;
        bool operator>(const Ev& o) const { return t != o.t ? t > o.t : order > o.order; }
    };

    struct MainCache {
        vcs::CommitId head;
        std::shared_ptr<const checker::Analysis> analysis;
        std::shared_ptr<const issues::IssueSet> issues;
        checker::TargetSummary targets;
    };

    struct TaskBackoff {
        int blocked = 0;
        int failures = 0;
        SimTime not_before = 0;
        bool dropped = false;
    };

    struct Init {};
    Simulation(Init, RunConfig config, std::shared_ptr<control::EventLog> log);
    void setup_common();

    void schedule(SimTime t, EvKind kind, std::uint64_t agent = 0, std::uint64_t epoch = 0);
    void emit(std::string_view type, Json fields);
    const MainCache& main_cache();

    void on_tick();
    void on_turn(std::uint64_t agent);
    void on_worktree_ready(std::uint64_t agent);
    void on_worktree_request(std::uint64_t agent);
    void on_queue_step();

    void apply_command(const OperatorCommand& cmd);
    void plan_and_spawn();
    std::uint64_t spawn(agents::Role role, const agents::TaskRef& task, bool priority);
    void spawn_reviewers(PrId pr);
    void spawn_reviewer(PrId pr, agents::Role role, std::shared_ptr<agents::ReviewView> view, int attempt);
    void admit();
    void start_running(Live& l, std::uint64_t id);
    void suspend(Live& l);
    void park(Live& l);
    void wake(std::uint64_t agent, std::vector<std::string> feedback);
    void request_worktree(std::uint64_t agent);
    void run_status_inline();
    void file_operator_issue(const Json& args);

    void handle_terminal(std::uint64_t agent, const agents::Terminal& t);
    void decide(PrId pr);
    void ensure_queue_running(SimTime delay);
    void set_phase(Phase p, const std::string& reason);
    void stop_all(const std::string& reason);
    void cancel_reviewers(PrId pr, int round);
    agents::PlanContext plan_context(Live& l, std::uint64_t id, const MainCache& mc) const;
    void record_merge(const pipeline::PullRequest& pr, const vcs::MainAdvance& adv);
    void finalize(std::uint64_t agent, agents::OutcomeFacts facts, const std::string& reason,
                  const std::vector<std::string>& refs = {});
    void abandon_pr(PrId id);
    void settle_task(const Live& l, agents::Outcome outcome);
    void emit_outcome(const agents::AgentRecord& rec, const std::string& reason, const std::vector<std::string>& refs);
    void check_completion();

    Json save_repo() const;
    void load_repo(const Json& j);

    RunConfig config_;
    agents::Scenario scenario_;
    std::shared_ptr<control::EventLog> log_;
    std::unique_ptr<vcs::InMemoryRepo> repo_;
    checker::ToyChecker checker_;
    std::unique_ptr<toolhost::ToolHost> host_;
    std::unique_ptr<pipeline::Pipeline> pipeline_;
    std::unique_ptr<vcs::CreationLimiter> limiter_;
    issues::IdSource ids_;
    issues::TrackerConfig tracker_;

    SimTime now_ = 0;
    std::atomic<Phase> phase_ = Phase::running;
    std::size_t concurrency_ = 16;
    std::size_t slots_used_ = 0;
    std::uint64_t next_agent_ = kFirstAgentId;
    std::uint64_t next_pr_ = 1;
    std::uint64_t event_order_ = 0;
    std::uint64_t wait_counter_ = 0;
    int resumes_ = 0;
    std::optional<SimTime> queue_next_;
    bool tick_scheduled_ = false;
    int drain_sweeps_ = 0;
    std::string finish_reason_;

    std::priority_queue<Ev, std::vector<Ev>, std::greater<Ev>> events_;
    std::map<std::uint64_t, Live> live_;
    std::vector<agents::AgentRecord> records_;
    std::vector<MergeRecord> merges_;
    std::map<PrId, vcs::DiffStat> merged_stats_;
    std::map<std::string, TaskBackoff> tasks_;
    std::map<std::string, std::uint64_t> in_flight_;        // task label -> agent
    std::map<std::string, std::uint64_t> subjects_in_flight_;
    std::map<std::string, std::uint64_t> spawned_;           // by role name
    std::uint64_t spawned_total_ = 0;
    std::set<PrId> review_backlog_;
    std::vector<std::pair<SimTime, SimTime>> worktree_intervals_;
    std::optional<MainCache> cache_;
    std::map<std::string, std::size_t> position_;  // scenario order of decls and chapters

    mutable std::mutex commands_mutex_;
    std::vector<OperatorCommand> commands_;
};

}  // namespace swarm::orchestrator
