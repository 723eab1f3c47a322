#include "swarm/orchestrator/simulation.hpp"

#include "swarm/common/error.hpp"
#include "swarm/orchestrator/scenario.hpp"

#include <algorithm>
#include <cmath>

namespace swarm::orchestrator {

using agents::Outcome;
using agents::OutcomeFacts;
using agents::Role;
using agents::TaskRef;
using agents::TerminalKind;
using issues::IssueKind;
using pipeline::DecisionKind;
using pipeline::PrState;
using pipeline::QueueOutcome;

namespace {

constexpr Phase kPhases[] = {Phase::running, Phase::paused, Phase::draining, Phase::done, Phase::stopped};
constexpr LiveState kLiveStates[] = {LiveState::waiting, LiveState::creating, LiveState::running, LiveState::parked};

Json stat_json(const vcs::DiffStat& s) {
    return Json{{"added", s.added},         {"removed", s.removed},   {"code_files", s.code_files},
                {"coordination_files", s.coordination_files}, {"code_net", s.code_net},
                {"coordination_net", s.coordination_net}};
}

Json tree_delta(const vcs::Tree& from, const vcs::Tree& to) {
    Json out = Json::object();
    for (const auto& [path, text] : to) {
        auto it = from.find(path);
        if (it == from.end() || it->second != text) out[path] = text;
    }
    for (const auto& [path, text] : from) {
        if (!to.count(path)) out[path] = nullptr;
    }
    return out;
}

}  // namespace

std::string_view phase_name(Phase p) {
    switch (p) {
        case Phase::running: return "running";
        case Phase::paused: return "paused";
        case Phase::draining: return "draining";
        case Phase::done: return "done";
        case Phase::stopped: return "stopped";
    }
    return "?";
}

std::optional<Phase> parse_phase(std::string_view s) {
    for (auto p : kPhases) {
        if (phase_name(p) == s) return p;
    }
    return std::nullopt;
}

std::string_view live_state_name(LiveState s) {
    switch (s) {
        case LiveState::waiting: return "waiting";
        case LiveState::creating: return "creating";
        case LiveState::running: return "running";
        case LiveState::parked: return "parked";
    }
    return "?";
}

static std::optional<LiveState> parse_live_state(std::string_view s) {
    for (auto st : kLiveStates) {
        if (live_state_name(st) == s) return st;
    }
    return std::nullopt;
}

// --- construction ---

Simulation::Simulation(Init, RunConfig config, std::shared_ptr<control::EventLog> log)
    : config_(std::move(config)), log_(log ? std::move(log) : std::make_shared<control::EventLog>()), ids_(config_.seed) {
    concurrency_ = config_.concurrency;
    scenario_ = generate_scenario(config_.scenario, config_.seed);
    std::size_t pos = 0;
    for (const auto& ch : scenario_.chapters) {
        position_[ch.id] = pos++;
        for (const auto& d : ch.decls) position_[d.name] = pos++;
    }
}

void Simulation::setup_common() {
    toolhost::ToolHostConfig hc;
    hc.call_latency = config_.call_latency;
    hc.build_latency = config_.build_latency;
    host_ = std::make_unique<toolhost::ToolHost>(hc);
    toolhost::register_file_tools(*host_);
    toolhost::register_check_tools(*host_);
    toolhost::register_git_tools(*host_);
    toolhost::register_shell_tools(*host_);
    toolhost::register_issue_tools(*host_);
    pipeline_ = std::make_unique<pipeline::Pipeline>(
        *repo_, checker_, pipeline::PipelineConfig{config_.max_revisions, config_.conflict_retries, config_.batch_size});
    limiter_ = std::make_unique<vcs::CreationLimiter>(config_.worktree_cap, config_.worktree_timeout);
}

Simulation::Simulation(RunConfig config, std::shared_ptr<control::EventLog> log)
    : Simulation(Init{}, std::move(config), std::move(log)) {
    repo_ = std::make_unique<vcs::InMemoryRepo>(scenario_.initial, 0);
    setup_common();
    const auto summary = targets();
    emit("run_started", Json{{"seed", config_.seed},
                             {"config", to_json(config_)},
                             {"chapters", scenario_.chapters.size()},
                             {"targets", summary.total},
                             {"obligations", summary.obligations},
                             {"proved", summary.proved},
                             {"main", repo_->branch_head(vcs::kMainBranch).hex}});
    schedule(0, EvKind::tick);
}

Simulation::~Simulation() = default;

accounting::RunReport Simulation::report(const accounting::SeriesOptions& options) const {
    accounting::ReportInput in;
    in.seed = config_.seed;
    in.phase = std::string(phase_name(phase()));
    in.sim_time = log_->size() > 0 ? log_->since(log_->next_seq() - 1).back().at("t").get<SimTime>() : now_;
    const auto summary = targets();
    in.targets = static_cast<std::int64_t>(summary.total);
    in.obligations = static_cast<std::int64_t>(summary.obligations);
    in.proved = static_cast<std::int64_t>(summary.proved);
    in.spawned = static_cast<std::int64_t>(spawned_total_);
    in.records = records_;
    for (const auto& m : merges_) {
        in.merges.push_back(accounting::MergePoint{m.pr.value, m.time, m.role, m.main_ok, m.stat,
                                                   static_cast<std::int64_t>(m.decls),
                                                   static_cast<std::int64_t>(m.sorries),
                                                   static_cast<std::int64_t>(m.proved_targets)});
    }
    return accounting::build_report(in, options);
}

// --- event plumbing ---

void Simulation::schedule(SimTime t, EvKind kind, std::uint64_t agent, std::uint64_t epoch) {
    events_.push(Ev{t, event_order_++, kind, agent, epoch});
}

void Simulation::emit(std::string_view type, Json fields) { log_->append(type, now_, std::move(fields)); }

const Simulation::MainCache& Simulation::main_cache() {
    const auto head = repo_->branch_head(vcs::kMainBranch);
    if (!cache_ || cache_->head != head) {
        const auto tree = repo_->commit_object(head).tree;
        auto an = std::make_shared<checker::Analysis>(checker::analyze(*tree));
        const auto summary = checker::summarize(checker::target_status(*an, scenario_.targets));
        cache_ = MainCache{head, std::move(an), std::make_shared<issues::IssueSet>(issues::load_issues(*tree, tracker_)),
                           summary};
    }
    return *cache_;
}

checker::TargetSummary Simulation::targets() const {
    if (cache_ && cache_->head == repo_->branch_head(vcs::kMainBranch)) return cache_->targets;
    const auto analysis = checker::analyze(repo_->main().tree());
    return checker::summarize(checker::target_status(analysis, scenario_.targets));
}

std::vector<SessionInfo> Simulation::sessions() const {
    std::vector<SessionInfo> out;
    for (const auto& [id, l] : live_) out.push_back(SessionInfo{l.session->record(), l.state, l.pr, l.reviewing});
    return out;
}

std::map<std::string, std::size_t> Simulation::sessions_by_state() const {
    std::map<std::string, std::size_t> out;
    for (auto s : kLiveStates) out[std::string(live_state_name(s))] = 0;
    for (const auto& [id, l] : live_) ++out[std::string(live_state_name(l.state))];
    return out;
}

void Simulation::run(std::optional<SimTime> until) {
    while (!finished()) {
        if (events_.empty()) break;
        if (until && events_.top().t > *until) break;
        step();
    }
}

bool Simulation::step() {
    if (finished() || events_.empty()) return false;
    const auto ev = events_.top();
    events_.pop();
    now_ = std::max(now_, ev.t);
    switch (ev.kind) {
        case EvKind::tick: on_tick(); break;
        case EvKind::admit: admit(); break;
        case EvKind::queue_step:
            if (queue_next_ && *queue_next_ == ev.t) on_queue_step();
            break;
        case EvKind::turn:
        case EvKind::worktree_ready:
        case EvKind::worktree_request: {
            auto it = live_.find(ev.agent);
            if (it == live_.end() || it->second.epoch != ev.epoch) break;
            if (ev.kind == EvKind::turn) on_turn(ev.agent);
            else if (ev.kind == EvKind::worktree_ready) on_worktree_ready(ev.agent);
            else on_worktree_request(ev.agent);
            break;
        }
    }
    return !finished();
}

// --- operator commands ---

CommandResult Simulation::submit_command(OperatorCommand cmd) {
    static const std::set<std::string> kNames = {"pause",          "resume",       "drain",       "stop",
                                                 "set-concurrency", "set-batch-size", "spawn-status", "create-issue"};
    if (!kNames.count(cmd.name)) return {false, "unknown command '" + cmd.name + "'", Errc::not_found};
    if (finished()) return {false, "run is " + std::string(phase_name(phase())), Errc::wrong_phase};
    if (!cmd.args.is_object()) return {false, "arguments must be an object"};
    if (cmd.name == "create-issue") {
        auto text = [&](const char* key, bool required) {
            if (!cmd.args.contains(key)) return !required;
            const auto& v = cmd.args.at(key);
            return v.is_string() && (!required || !v.get<std::string>().empty());
        };
        if (!text("title", true)) return {false, "create-issue needs a non-empty title"};
        if (!text("body", false) || !text("subject", false)) return {false, "body and subject must be strings"};
        if (cmd.args.contains("kind") &&
            (!cmd.args.at("kind").is_string() || !issues::parse_kind(cmd.args.at("kind").get<std::string>()))) {
            return {false, "unknown issue kind"};
        }
    }
    if (cmd.name == "set-concurrency" || cmd.name == "set-batch-size") {
        if (!cmd.args.contains("value") || !cmd.args.at("value").is_number_integer() ||
            cmd.args.at("value").get<std::int64_t>() < 1) {
            return {false, cmd.name + " needs a positive integer value"};
        }
    }
    std::lock_guard lock(commands_mutex_);
    if (cmd.name == "spawn-status") {
        bool pausing = phase() == Phase::paused;
        for (const auto& c : commands_) {
            if (c.name == "pause") pausing = true;
            if (c.name == "resume" || c.name == "drain") pausing = false;
        }
        if (!pausing) return {false, "pause first", Errc::wrong_phase};
    }
    commands_.push_back(std::move(cmd));
    return {true, "queued for the next tick", Errc::invalid_argument};
}

void Simulation::set_phase(Phase p, const std::string& reason) {
    if (phase() == p) return;
    emit("phase", Json{{"from", phase_name(phase())}, {"to", phase_name(p)}, {"reason", reason}});
    phase_ = p;
}

void Simulation::apply_command(const OperatorCommand& cmd) {
    emit("command", Json{{"name", cmd.name}, {"args", cmd.args}});
    if (cmd.name == "pause") {
        if (phase() == Phase::running) set_phase(Phase::paused, "operator");
    } else if (cmd.name == "resume") {
        if (phase() == Phase::paused) set_phase(Phase::running, "operator");
    } else if (cmd.name == "drain") {
        set_phase(Phase::draining, "operator");
    } else if (cmd.name == "set-concurrency") {
        concurrency_ = cmd.args.at("value").get<std::size_t>();
    } else if (cmd.name == "set-batch-size") {
        pipeline_->set_batch_size(cmd.args.at("value").get<std::size_t>());
    } else if (cmd.name == "spawn-status") {
        if (phase() == Phase::paused) run_status_inline();
    } else if (cmd.name == "stop") {
        stop_all("operator stop");
    } else if (cmd.name == "create-issue") {
        file_operator_issue(cmd.args);
    }
}

void Simulation::file_operator_issue(const Json& args) {
    const PrId pr{next_pr_++};
    const auto branch = "operator/" + pr.str();
    repo_->create_worktree(branch, kOperator);
    issues::NewIssue spec;
    spec.title = args.at("title").get<std::string>();
    spec.body = args.value("body", std::string());
    spec.subject = args.value("subject", std::string());
    spec.kind = issues::parse_kind(args.value("kind", std::string("report"))).value();
    auto [issue, file] = issues::create_issue(repo_->worktree_tree(branch), ids_, kOperator, spec, tracker_);
    repo_->write_file(branch, kOperator, file.path, file.content);
    repo_->commit(branch, kOperator, "file issue " + issue.id, now_);
    repo_->remove_worktree(branch);
    pipeline_->submit(pr, kOperator, Role::maintainer, branch, "operator-issue", now_);
    emit("pr_submitted", Json{{"pr", pr.value}, {"agent", kOperator.value}, {"round", 1}, {"ticked", Json::array()}, {"issue", issue.id}});
    spawn_reviewers(pr);
}

// --- tick ---

void Simulation::on_tick() {
    std::vector<OperatorCommand> cmds;
    {
        std::lock_guard lock(commands_mutex_);
        cmds.swap(commands_);
    }
    for (const auto& c : cmds) {
        if (finished()) break;
        apply_command(c);
    }
    if (finished()) return;
    if (now_ >= config_.max_sim_time) {
        stop_all("time limit");
        return;
    }
    if (phase() != Phase::paused) {
        auto backlog = std::move(review_backlog_);
        review_backlog_.clear();
        for (auto pr : backlog) spawn_reviewers(pr);
    }
    plan_and_spawn();
    admit();
    check_completion();
    if (!finished()) schedule(now_ + config_.tick, EvKind::tick);
}

void Simulation::check_completion() {
    if (phase() == Phase::running && targets().complete()) set_phase(Phase::draining, "targets complete");
    if (phase() != Phase::draining) return;
    if (live_.empty() && pipeline_->queue_empty() && !queue_next_ && review_backlog_.empty()) {
        const auto summary = targets();
        // An operator drain before the targets are complete ends the run without reaching done.
        const auto end = summary.complete() ? Phase::done : Phase::stopped;
        set_phase(end, finish_reason_.empty() ? "drained" : finish_reason_);
        emit("run_finished", Json{{"reason", summary.complete() ? "done" : "drained"},
                                  {"merges", merges_.size()},
                                  {"agents", records_.size()},
                                  {"proved", summary.proved},
                                  {"obligations", summary.obligations}});
        log_->close();
    }
}

void Simulation::stop_all(const std::string& reason) {
    std::vector<std::uint64_t> ids;
    for (const auto& [id, l] : live_) ids.push_back(id);
    for (auto id : ids) {
        auto& l = live_.at(id);
        OutcomeFacts f;
        if (l.pr && pipeline_->has(*l.pr) && pipeline_->get(*l.pr).approved) {
            f.approved = true;
        } else {
            f.aborted = true;
        }
        if (l.pr) abandon_pr(*l.pr);
        finalize(id, f, reason);
    }
    const auto summary = targets();
    set_phase(Phase::stopped, reason);
    emit("run_finished", Json{{"reason", reason},
                              {"merges", merges_.size()},
                              {"agents", records_.size()},
                              {"proved", summary.proved},
                              {"obligations", summary.obligations}});
    log_->close();
}

void Simulation::plan_and_spawn() {
    const auto ph = phase();
    if (ph != Phase::running && ph != Phase::draining) return;
    const auto& mc = main_cache();
    const auto& an = *mc.analysis;

    if (ph == Phase::draining) {
        // Once the targets are in, only a final triage pass runs.
        if (drain_sweeps_ < 3 && !issues::triage(an, *mc.issues).empty() && !in_flight_.count("sweep:triage")) {
            ++drain_sweeps_;
            spawn(Role::triage, TaskRef{"sweep", "triage", ""}, false);
        }
        return;
    }

    std::size_t active = 0;
    for (const auto& [id, l] : live_) {
        if (l.state != LiveState::parked) ++active;
    }
    std::size_t budget = concurrency_ > active ? concurrency_ - active : 0;

    struct Candidate {
        Role role;
        TaskRef task;
        int failures;
        std::size_t pos;
    };
    std::vector<Candidate> cands;
    auto position = [&](const std::string& name) {
        auto it = position_.find(name);
        return it == position_.end() ? position_.size() : it->second;
    };
    auto eligible = [&](const TaskRef& t) -> std::optional<int> {
        if (in_flight_.count(t.label())) return std::nullopt;
        if (!t.subject.empty() && subjects_in_flight_.count(t.subject)) return std::nullopt;
        auto it = tasks_.find(t.label());
        if (it == tasks_.end()) return 0;
        if (it->second.dropped || it->second.not_before > now_) return std::nullopt;
        return it->second.failures;
    };

    for (const auto& ch : scenario_.chapters) {
        if (an.files.count(ch.path)) continue;
        if (config_.dag_mode) {
            bool ready = true;
            for (const auto& imp : ch.imports) ready = ready && an.files.count(scenario_.toy_path(imp)) > 0;
            if (!ready) continue;
        }
        TaskRef t{"chapter", ch.id, ""};
        if (auto f = eligible(t)) cands.push_back({Role::sketcher, t, *f, position(ch.id)});
    }
    for (const auto& [id, issue] : mc.issues->by_id) {
        if (!issue.open()) continue;
        TaskRef t{"issue", id, issue.subject};
        Role role = Role::maintainer;
        if (issue.kind == IssueKind::proving_task || issue.kind == IssueKind::blocker) {
            const auto* d = an.find(issue.subject);
            if (!d || d->assumed() || an.proved(issue.subject)) continue;
            if (const auto* spec = scenario_.find(issue.subject); spec && (spec->cited || spec->exercise)) continue;
            if (config_.dag_mode && !an.solvable(issue.subject)) continue;
            if (issue.kind == IssueKind::proving_task) role = Role::prover;
        }
        if (auto f = eligible(t)) cands.push_back({role, t, *f, position(issue.subject)});
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return a.failures != b.failures ? a.failures < b.failures : a.pos < b.pos;
    });

    // Sweeps first: they are rare and cheap to schedule.
    const std::pair<Role, double> sweeps[] = {
        {Role::triage, config_.triage_ratio}, {Role::scan, config_.scan_ratio}, {Role::progress, config_.progress_ratio}};
    for (const auto& [role, ratio] : sweeps) {
        if (budget == 0) break;
        TaskRef t{"sweep", std::string(agents::role_name(role)), ""};
        const auto done = spawned_[std::string(agents::role_name(role))];
        if (in_flight_.count(t.label())) continue;
        if (static_cast<double>(done) + 1.0 > ratio * static_cast<double>(spawned_total_ + 1)) continue;
        spawn(role, t, false);
        --budget;
    }
    for (const auto& c : cands) {
        if (budget == 0) break;
        if (!eligible(c.task)) continue;  // a subject may repeat across issues
        spawn(c.role, c.task, false);
        --budget;
    }
}

// --- sessions ---

std::uint64_t Simulation::spawn(Role role, const TaskRef& task, bool priority) {
    const auto id = next_agent_++;
    agents::AgentRecord rec;
    rec.id = AgentId{id};
    rec.role = role;
    rec.task = task.label();
    rec.start = now_;
    const auto profile = agents::default_profile(role);
    agents::SessionLimits lim;
    lim.max_turns = config_.turn_cap(role);
    lim.think_mean = config_.think_mean;
    lim.think_cap = config_.think_cap;
    lim.budget_sigma = config_.budget_sigma;
    lim.revision_fraction = config_.revision_fraction;
    Live l;
    l.session = std::make_unique<agents::Session>(rec, task, agents::make_scripted_policy(role, task),
                                                  agents::TokenModel::for_profile(profile), profile.avg_turns, lim,
                                                  Rng::derive(config_.seed, "agent", {id}));
    l.role = role;
    l.priority = priority;
    l.wait_order = wait_counter_++;
    l.branch = AgentId{id}.str();
    l.own_branch = !agents::is_reviewer(role);
    l.needs_worktree = l.own_branch;
    l.not_before = now_;
    if (agents::authors_prs(role)) l.pr = PrId{next_pr_++};
    spawned_[std::string(agents::role_name(role))] += 1;
    spawned_total_ += 1;
    in_flight_[task.label()] = id;
    if (!task.subject.empty() && !agents::is_reviewer(role)) subjects_in_flight_[task.subject] = id;
    Json ev{{"agent", id}, {"role", agents::role_name(role)}, {"task", task.label()}, {"subject", task.subject}};
    if (l.pr) ev["pr"] = l.pr->value;
    emit("spawn", std::move(ev));
    live_.emplace(id, std::move(l));
    return id;
}

void Simulation::spawn_reviewers(PrId pr) {
    if (phase() == Phase::paused) {
        review_backlog_.insert(pr);
        return;
    }
    const auto& p = pipeline_->get(pr);
    if (p.state != PrState::in_review) return;
    auto view = std::make_shared<agents::ReviewView>(pipeline_->review_view(pr));
    for (auto role : {Role::math_reviewer, Role::eng_reviewer}) spawn_reviewer(pr, role, view, 1);
}

void Simulation::spawn_reviewer(PrId pr, Role role, std::shared_ptr<agents::ReviewView> view, int attempt) {
    const auto& p = pipeline_->get(pr);
    std::string id = pr.str() + "/" + std::to_string(p.round) + "/" + std::string(agents::role_name(role));
    if (attempt > 1) id += "/" + std::to_string(attempt);
    const auto agent = spawn(role, TaskRef{"review", id, ""}, true);
    auto& l = live_.at(agent);
    l.branch = p.branch;
    l.reviewing = pr;
    l.review_round = p.round;
    l.review_attempt = attempt;
    l.view = std::move(view);
}

void Simulation::admit() {
    std::vector<std::uint64_t> ready;
    std::optional<SimTime> next_wake;
    const bool fresh_ok = phase() != Phase::paused;
    for (const auto& [id, l] : live_) {
        if (l.state != LiveState::waiting) continue;
        if (!l.priority && !fresh_ok) continue;
        if (l.not_before > now_) {
            next_wake = next_wake ? std::min(*next_wake, l.not_before) : l.not_before;
            continue;
        }
        ready.push_back(id);
    }
    std::sort(ready.begin(), ready.end(), [&](std::uint64_t a, std::uint64_t b) {
        const auto& la = live_.at(a);
        const auto& lb = live_.at(b);
        if (la.priority != lb.priority) return la.priority;
        return la.wait_order < lb.wait_order;
    });
    for (auto id : ready) {
        if (slots_used_ >= concurrency_) break;
        auto& l = live_.at(id);
        l.holds_slot = true;
        ++slots_used_;
        if (l.needs_worktree && !l.worktree_ready) {
            l.state = LiveState::creating;
            ++l.epoch;
            request_worktree(id);
        } else {
            start_running(l, id);
        }
    }
    if (next_wake) schedule(*next_wake, EvKind::admit);
}

void Simulation::start_running(Live& l, std::uint64_t id) {
    l.state = LiveState::running;
    ++l.epoch;
    schedule(now_, EvKind::turn, id, l.epoch);
}

void Simulation::suspend(Live& l) {
    if (l.holds_slot) {
        l.holds_slot = false;
        --slots_used_;
    }
    l.state = LiveState::waiting;
    l.priority = true;
    l.wait_order = wait_counter_++;
    ++l.epoch;
    emit("suspend", Json{{"agent", l.session->record().id.value}});
}

void Simulation::park(Live& l) {
    if (l.holds_slot) {
        l.holds_slot = false;
        --slots_used_;
    }
    l.state = LiveState::parked;
    ++l.epoch;
    emit("park", Json{{"agent", l.session->record().id.value}});
    schedule(now_, EvKind::admit);
}

void Simulation::wake(std::uint64_t agent, std::vector<std::string> feedback) {
    auto it = live_.find(agent);
    if (it == live_.end()) return;
    auto& l = it->second;
    emit("wake", Json{{"agent", agent}, {"feedback", feedback}});
    l.session->revise(std::move(feedback));
    l.state = LiveState::waiting;
    l.priority = true;
    l.wait_order = wait_counter_++;
    l.not_before = now_;
    ++l.epoch;
    schedule(now_, EvKind::admit);
}

void Simulation::request_worktree(std::uint64_t agent) {
    auto& l = live_.at(agent);
    ++l.worktree_attempts;
    auto rng = Rng::derive(config_.seed, "worktree", {agent, static_cast<std::uint64_t>(l.worktree_attempts)});
    const auto latency = rng.between(config_.worktree_latency_min, config_.worktree_latency_max);
    try {
        const auto g = limiter_->acquire(now_, latency);
        worktree_intervals_.emplace_back(g.start, g.end);
        emit("worktree", Json{{"agent", agent}, {"start", g.start}, {"end", g.end}});
        schedule(g.end, EvKind::worktree_ready, agent, l.epoch);
    } catch (const Error& e) {
        if (e.code() != Errc::rate_limited) throw;
        emit("worktree_retry", Json{{"agent", agent}, {"reason", e.what()}});
        schedule(now_ + config_.tick, EvKind::worktree_request, agent, l.epoch);
    }
}

void Simulation::on_worktree_request(std::uint64_t agent) { request_worktree(agent); }

void Simulation::on_worktree_ready(std::uint64_t agent) {
    auto& l = live_.at(agent);
    const AgentId owner{agent};
    if (repo_->has_branch(l.branch)) {
        repo_->attach_worktree(l.branch, owner);
    } else {
        repo_->create_worktree(l.branch, owner);
    }
    for (const auto& [path, content] : l.restore_dirty) repo_->write_file(l.branch, owner, path, content);
    l.restore_dirty.clear();
    l.worktree_ready = true;
    l.needs_worktree = false;
    if (slots_used_ > concurrency_) {
        suspend(l);
        schedule(now_, EvKind::admit);
        return;
    }
    start_running(l, agent);
}

agents::PlanContext Simulation::plan_context(Live& l, std::uint64_t id, const MainCache& mc) const {
    return agents::PlanContext{*repo_,   scenario_, *mc.analysis,    *mc.issues,    l.branch,
                               AgentId{id}, l.pr,    l.view.get(),     config_.policy, l.session->rng()};
}

void Simulation::on_turn(std::uint64_t agent) {
    auto& l = live_.at(agent);
    if (l.state != LiveState::running) return;
    if (l.cancelled) {
        finalize(agent, OutcomeFacts{}, "review no longer needed");
        return;
    }
    if (slots_used_ > concurrency_) {
        suspend(l);
        schedule(now_, EvKind::admit);
        return;
    }
    const auto& mc = main_cache();
    const auto ctx = plan_context(l, agent, mc);
    toolhost::ToolEnv env{*repo_, checker_, scenario_.reference, ids_, tracker_, l.pr, now_};
    const auto rep = l.session->step(ctx, *host_, env);
    if (rep.max_iterations) {
        if (l.pr) abandon_pr(*l.pr);
        OutcomeFacts f;
        f.turn_cap = true;
        const auto reviewing = l.reviewing;
        const auto role = l.role;
        const int round = l.review_round;
        const int attempt = l.review_attempt;
        auto view = l.view;
        finalize(agent, f, "turn cap reached");
        // A review that ran out of turns is handed to a fresh reviewer.
        if (reviewing && pipeline_->has(*reviewing)) {
            const auto& p = pipeline_->get(*reviewing);
            if (p.state == PrState::in_review && p.round == round) spawn_reviewer(*reviewing, role, view, attempt + 1);
        }
        return;
    }
    Json ev{{"agent", agent},
            {"turn", l.session->record().turns},
            {"tool", rep.tool},
            {"ok", rep.ok},
            {"tokens_in", rep.tokens_in},
            {"tokens_out", rep.tokens_out},
            {"duration", rep.duration}};
    if (rep.exploration) ev["exploration"] = true;
    if (rep.truncated) ev["truncated"] = true;
    if (rep.error) ev["error"] = errc_name(*rep.error);
    emit("turn", std::move(ev));
    if (rep.terminal) {
        handle_terminal(agent, *rep.terminal);
        return;
    }
    schedule(now_ + rep.duration, EvKind::turn, agent, l.epoch);
}

void Simulation::run_status_inline() {
    const auto id = spawn(Role::status, TaskRef{"sweep", "status", ""}, true);
    auto& l = live_.at(id);
    repo_->create_worktree(l.branch, AgentId{id});
    l.worktree_ready = true;
    l.needs_worktree = false;
    l.state = LiveState::running;
    while (true) {
        const auto& mc = main_cache();
        const auto ctx = plan_context(l, id, mc);
        toolhost::ToolEnv env{*repo_, checker_, scenario_.reference, ids_, tracker_, l.pr, now_};
        const auto rep = l.session->step(ctx, *host_, env);
        if (rep.max_iterations) {
            OutcomeFacts f;
            f.turn_cap = true;
            finalize(id, f, "turn cap reached");
            return;
        }
        emit("turn", Json{{"agent", id},
                          {"turn", l.session->record().turns},
                          {"tool", rep.tool},
                          {"ok", rep.ok},
                          {"tokens_in", rep.tokens_in},
                          {"tokens_out", rep.tokens_out},
                          {"duration", 0}});
        if (rep.terminal) {
            handle_terminal(id, *rep.terminal);
            return;
        }
    }
}

// --- terminals and decisions ---

void Simulation::handle_terminal(std::uint64_t agent, const agents::Terminal& t) {
    auto& l = live_.at(agent);
    switch (t.kind) {
        case TerminalKind::verdict: {
            const auto pr = *l.reviewing;
            bool decided = false;
            if (pipeline_->has(pr)) {
                const auto& p = pipeline_->get(pr);
                if (p.state == PrState::in_review && p.round == l.review_round) {
                    pipeline_->record_review(pr, pipeline::Review{AgentId{agent}, l.role, t.verdict, t.findings});
                    emit("review", Json{{"pr", pr.value},
                                        {"agent", agent},
                                        {"role", agents::role_name(l.role)},
                                        {"verdict", agents::verdict_name(t.verdict)},
                                        {"findings", t.findings}});
                    decided = pipeline_->reviews_complete(pr);
                }
            }
            const int round = l.review_round;
            finalize(agent, OutcomeFacts{}, "review: " + std::string(agents::verdict_name(t.verdict)));
            if (decided) {
                cancel_reviewers(pr, round);
                decide(pr);
            }
            return;
        }
        case TerminalKind::submit: {
            try {
                const auto& p =
                    pipeline_->submit(*l.pr, AgentId{agent}, l.role, l.branch, l.session->task().label(), now_);
                emit("pr_submitted",
                     Json{{"pr", p.id.value}, {"agent", agent}, {"round", p.round}, {"ticked", p.ticked}});
            } catch (const Error& e) {
                if (e.code() != Errc::empty_diff) throw;
                abandon_pr(*l.pr);
                finalize(agent, OutcomeFacts{}, "nothing to submit");
                return;
            }
            const auto pr = *l.pr;
            park(l);
            spawn_reviewers(pr);
            schedule(now_, EvKind::admit);
            return;
        }
        case TerminalKind::no_pr:
        case TerminalKind::blocked: {
            if (l.pr) abandon_pr(*l.pr);
            OutcomeFacts f;
            f.blocked = t.kind == TerminalKind::blocked;
            finalize(agent, f, t.reason, t.refs);
            return;
        }
    }
}

void Simulation::cancel_reviewers(PrId pr, int round) {
    std::vector<std::uint64_t> idle;
    for (auto& [id, l] : live_) {
        if (!l.reviewing || *l.reviewing != pr || l.review_round != round) continue;
        if (l.state == LiveState::running) {
            l.cancelled = true;
        } else {
            idle.push_back(id);
        }
    }
    for (auto id : idle) finalize(id, OutcomeFacts{}, "review no longer needed");
}

void Simulation::decide(PrId id) {
    const auto d = pipeline_->decide(id, now_);
    const auto& pr = pipeline_->get(id);
    emit("decision", Json{{"pr", id.value}, {"kind", pipeline::decision_name(d.kind)}, {"feedback", d.feedback}});
    const auto author = pr.author.value;
    if (!live_.count(author)) {
        if (d.kind == DecisionKind::returned) abandon_pr(id);
        else if (d.kind == DecisionKind::queued) ensure_queue_running(config_.build_latency);
        return;
    }
    switch (d.kind) {
        case DecisionKind::queued: ensure_queue_running(config_.build_latency); break;
        case DecisionKind::returned: wake(author, d.feedback); break;
        case DecisionKind::suppressed: {
            std::string reason = "rejected";
            if (!d.feedback.empty()) reason += ": " + d.feedback.front();
            finalize(author, OutcomeFacts{}, reason);
            break;
        }
        case DecisionKind::max_revisions: {
            OutcomeFacts f;
            f.revision_cap = true;
            finalize(author, f, "revision cap reached");
            break;
        }
    }
}

void Simulation::ensure_queue_running(SimTime delay) {
    if (queue_next_ || pipeline_->queue_empty()) return;
    queue_next_ = now_ + delay;
    schedule(*queue_next_, EvKind::queue_step);
}

void Simulation::on_queue_step() {
    queue_next_.reset();
    const auto st = pipeline_->queue_step(now_);
    for (const auto& ev : st.events) {
        const auto& pr = pipeline_->get(ev.pr);
        emit("queue", Json{{"pr", ev.pr.value},
                           {"outcome", pipeline::queue_outcome_name(ev.outcome)},
                           {"feedback", ev.feedback},
                           {"builds", st.builds}});
        const auto author = pr.author.value;
        switch (ev.outcome) {
            case QueueOutcome::merged: {
                record_merge(pr, *ev.advance);
                OutcomeFacts f;
                f.merged = true;
                if (live_.count(author)) finalize(author, f, "merged");
                break;
            }
            case QueueOutcome::conflict:
            case QueueOutcome::build_failed:
                if (live_.count(author)) wake(author, ev.feedback);
                else abandon_pr(ev.pr);
                break;
            case QueueOutcome::failed_merge: {
                OutcomeFacts f;
                f.approved = true;
                if (live_.count(author)) finalize(author, f, "merge retries exhausted");
                break;
            }
            case QueueOutcome::max_revisions: {
                OutcomeFacts f;
                f.revision_cap = true;
                if (live_.count(author)) finalize(author, f, "revision cap reached");
                break;
            }
        }
    }
    if (!pipeline_->queue_empty()) {
        queue_next_ = now_ + config_.build_latency * static_cast<SimTime>(std::max<std::size_t>(1, st.builds));
        schedule(*queue_next_, EvKind::queue_step);
    }
    check_completion();
}

void Simulation::record_merge(const pipeline::PullRequest& pr, const vcs::MainAdvance& adv) {
    const auto after = repo_->snapshot(adv.after);
    const auto before = repo_->snapshot(adv.before);
    const auto report = checker_.build(after.tree());
    const auto an = checker::analyze(after.tree());
    const auto summary = checker::summarize(checker::target_status(an, scenario_.targets));
    MergeRecord m;
    m.pr = pr.id;
    m.author = pr.author;
    m.role = pr.author_role;
    m.commit = adv.after.hex;
    m.time = now_;
    m.main_ok = report.ok;
    m.stat = adv.diff.stat();
    m.decls = report.decl_count;
    m.sorries = report.sorry_count;
    m.proved_targets = summary.proved;
    merged_stats_[pr.id] = m.stat;
    emit("merge", Json{{"pr", pr.id.value},
                       {"agent", pr.author.value},
                       {"role", agents::role_name(pr.author_role)},
                       {"commit", m.commit},
                       {"main_ok", m.main_ok},
                       {"decls", m.decls},
                       {"sorries", m.sorries},
                       {"proved_targets", m.proved_targets},
                       {"stat", stat_json(m.stat)}});
    merges_.push_back(m);

    const auto old_issues = issues::load_issues(before.tree(), tracker_);
    const auto new_issues = issues::load_issues(after.tree(), tracker_);
    for (const auto& [id, issue] : new_issues.by_id) {
        auto it = old_issues.by_id.find(id);
        const bool created = it == old_issues.by_id.end();
        const bool resolved = !issue.open() && (created || it->second.open());
        auto op = [&](const char* kind) {
            emit("issue_op", Json{{"op", kind},
                                  {"id", id},
                                  {"kind", issues::kind_name(issue.kind)},
                                  {"subject", issue.subject},
                                  {"agent", pr.author.value},
                                  {"role", agents::role_name(pr.author_role)},
                                  {"pr", pr.id.value}});
        };
        if (created) op("create");
        if (resolved) op("resolve");
    }
}

void Simulation::abandon_pr(PrId id) {
    if (!pipeline_->has(id)) return;
    const auto state = pipeline_->get(id).state;
    if (pipeline::terminal_state(state)) return;
    emit("pr_closed", Json{{"pr", id.value}, {"from", pipeline::state_name(state)}});
    pipeline_->abandon(id, now_);
}

void Simulation::settle_task(const Live& l, Outcome outcome) {
    const auto& task = l.session->task();
    if (task.kind == "review") return;
    const auto label = task.label();
    if (outcome == Outcome::merged) {
        if (tasks_.erase(label)) emit("task", Json{{"task", label}, {"cleared", true}});
        return;
    }
    auto& b = tasks_[label];
    if (outcome == Outcome::no_pr_blocked) {
        b.blocked += 1;
        const double factor = std::pow(2.0, std::min(b.blocked - 1, 30));
        b.not_before = now_ + std::min<SimTime>(config_.backoff_cap,
                                                static_cast<SimTime>(static_cast<double>(config_.backoff_base) * factor));
    } else {
        b.failures += 1;
        b.not_before = now_ + config_.backoff_base;
        if (b.failures >= config_.max_task_failures) b.dropped = true;
    }
    emit("task", Json{{"task", label},
                      {"blocked", b.blocked},
                      {"failures", b.failures},
                      {"not_before", b.not_before},
                      {"dropped", b.dropped}});
}

void Simulation::emit_outcome(const agents::AgentRecord& rec, const std::string& reason,
                              const std::vector<std::string>& refs) {
    emit("outcome", Json{{"agent", rec.id.value},
                         {"role", agents::role_name(rec.role)},
                         {"outcome", agents::outcome_name(rec.outcome)},
                         {"reason", reason},
                         {"refs", refs},
                         {"record", agents::to_json(rec)}});
}

void Simulation::finalize(std::uint64_t agent, OutcomeFacts facts, const std::string& reason,
                          const std::vector<std::string>& refs) {
    auto it = live_.find(agent);
    if (it == live_.end()) return;
    auto& l = it->second;
    auto rec = l.session->record();
    rec.outcome = agents::classify_outcome(facts);
    rec.end = now_;
    if (l.pr && pipeline_->has(*l.pr)) {
        const auto& pr = pipeline_->get(*l.pr);
        rec.pr = pr.id;
        rec.revisions = pr.revision_count;
        vcs::DiffStat st;
        if (auto m = merged_stats_.find(pr.id); m != merged_stats_.end()) {
            st = m->second;
        } else {
            st = repo_->diff_stats(pr.base, pr.head).stat();
        }
        rec.files_touched = agents::FileCounts{st.code_files, st.coordination_files};
        rec.code_net = st.code_net;
        rec.coordination_net = st.coordination_net;
    }
    if (l.holds_slot) {
        l.holds_slot = false;
        --slots_used_;
    }
    if (l.own_branch && repo_->has_branch(l.branch)) {
        const bool queued = l.pr && pipeline_->has(*l.pr) && pipeline_->get(*l.pr).state == PrState::queued;
        if (!queued) repo_->delete_branch(l.branch);
    }
    settle_task(l, rec.outcome);
    const auto label = l.session->task().label();
    if (auto f = in_flight_.find(label); f != in_flight_.end() && f->second == agent) in_flight_.erase(f);
    const auto& subject = l.session->task().subject;
    if (auto f = subjects_in_flight_.find(subject); f != subjects_in_flight_.end() && f->second == agent) {
        subjects_in_flight_.erase(f);
    }
    emit_outcome(rec, reason, refs);
    records_.push_back(std::move(rec));
    live_.erase(it);
    schedule(now_, EvKind::admit);
}

// --- checkpoints ---

Json Simulation::save_repo() const {
    const auto img = repo_->image();
    Json commits = Json::array();
    std::map<vcs::CommitId, const vcs::Tree*> trees;
    static const vcs::Tree kEmpty;
    for (const auto& c : img.commits) {
        const vcs::Tree* parent = c.parent ? trees.at(*c.parent) : &kEmpty;
        commits.push_back(Json{{"id", c.id.hex},
                               {"parent", c.parent ? Json(c.parent->hex) : Json(nullptr)},
                               {"message", c.message},
                               {"author", c.author.value},
                               {"time", c.time},
                               {"changes", tree_delta(*parent, *c.tree)}});
        trees[c.id] = c.tree.get();
    }
    Json branches = Json::array();
    for (const auto& b : img.branches) {
        Json ids = Json::array();
        for (const auto& c : b.commits) ids.push_back(c.hex);
        branches.push_back(Json{{"name", b.name}, {"owner", b.owner.value}, {"base", b.base.hex}, {"commits", ids}});
    }
    Json history = Json::array();
    for (const auto& c : img.main_history) history.push_back(c.hex);
    Json worktrees = Json::object();
    for (const auto& wt : repo_->worktrees()) {
        Json dirty = Json::object();
        for (const auto& [path, content] : wt.dirty_files) dirty[path] = content ? Json(*content) : Json(nullptr);
        worktrees[wt.branch] = dirty;
    }
    return Json{{"commits", commits}, {"branches", branches}, {"main_history", history}, {"worktrees", worktrees}};
}

void Simulation::load_repo(const Json& j) {
    vcs::InMemoryRepo::Image img;
    std::map<std::string, std::shared_ptr<const vcs::Tree>> trees;
    for (const auto& c : j.at("commits")) {
        vcs::Commit commit;
        commit.id = vcs::CommitId{c.at("id").get<std::string>()};
        vcs::Tree tree;
        if (!c.at("parent").is_null()) {
            commit.parent = vcs::CommitId{c.at("parent").get<std::string>()};
            auto it = trees.find(commit.parent->hex);
            if (it == trees.end()) throw Error(Errc::corrupt_state, "commit " + commit.id.hex + " precedes its parent");
            tree = *it->second;
        }
        for (const auto& [path, content] : c.at("changes").items()) {
            if (content.is_null()) {
                tree.erase(path);
            } else {
                tree[path] = content.get<std::string>();
            }
        }
        commit.tree = std::make_shared<const vcs::Tree>(std::move(tree));
        commit.message = c.at("message").get<std::string>();
        commit.author = AgentId{c.at("author").get<std::uint64_t>()};
        commit.time = c.at("time").get<SimTime>();
        trees[commit.id.hex] = commit.tree;
        img.commits.push_back(std::move(commit));
    }
    for (const auto& b : j.at("branches")) {
        vcs::InMemoryRepo::BranchRecord r;
        r.name = b.at("name").get<std::string>();
        r.owner = AgentId{b.at("owner").get<std::uint64_t>()};
        r.base = vcs::CommitId{b.at("base").get<std::string>()};
        for (const auto& c : b.at("commits")) r.commits.push_back(vcs::CommitId{c.get<std::string>()});
        img.branches.push_back(std::move(r));
    }
    for (const auto& c : j.at("main_history")) img.main_history.push_back(vcs::CommitId{c.get<std::string>()});
    repo_ = vcs::InMemoryRepo::from_image(img);
}

Json Simulation::checkpoint() const {
    Json sessions = Json::array();
    for (const auto& [id, l] : live_) {
        Json s{{"agent", id},
               {"role", agents::role_name(l.role)},
               {"task", agents::to_json(l.session->task())},
               {"record", agents::to_json(l.session->record())},
               {"session", l.session->save()},
               {"state", live_state_name(l.state)},
               {"priority", l.priority},
               {"wait_order", l.wait_order},
               {"branch", l.branch},
               {"own_branch", l.own_branch},
               {"review_round", l.review_round},
               {"review_attempt", l.review_attempt},
               {"cancelled", l.cancelled}};
        s["pr"] = l.pr ? Json(l.pr->value) : Json(nullptr);
        s["reviewing"] = l.reviewing ? Json(l.reviewing->value) : Json(nullptr);
        sessions.push_back(std::move(s));
    }
    Json records = Json::array();
    for (const auto& r : records_) records.push_back(agents::to_json(r));
    Json tasks = Json::object();
    for (const auto& [label, b] : tasks_) {
        tasks[label] = Json{{"blocked", b.blocked}, {"failures", b.failures}, {"not_before", b.not_before},
                            {"dropped", b.dropped}};
    }
    Json merges = Json::array();
    for (const auto& m : merges_) {
        merges.push_back(Json{{"pr", m.pr.value},
                              {"author", m.author.value},
                              {"role", agents::role_name(m.role)},
                              {"commit", m.commit},
                              {"time", m.time},
                              {"main_ok", m.main_ok},
                              {"stat", stat_json(m.stat)},
                              {"decls", m.decls},
                              {"sorries", m.sorries},
                              {"proved_targets", m.proved_targets}});
    }
    Json ids = Json::object();
    for (const auto& [agent, n] : ids_.counters()) ids[std::to_string(agent)] = n;
    Json commands = Json::array();
    {
        std::lock_guard lock(commands_mutex_);
        for (const auto& c : commands_) commands.push_back(Json{{"name", c.name}, {"args", c.args}});
    }
    Json backlog = Json::array();
    for (auto pr : review_backlog_) backlog.push_back(pr.value);
    Json intervals = Json::array();
    for (const auto& [a, b] : worktree_intervals_) intervals.push_back(Json::array({a, b}));
    return Json{{"version", 1},
                {"config", to_json(config_)},
                {"now", now_},
                {"phase", phase_name(phase())},
                {"concurrency", concurrency_},
                {"next_agent", next_agent_},
                {"next_pr", next_pr_},
                {"wait_counter", wait_counter_},
                {"resumes", resumes_},
                {"drain_sweeps", drain_sweeps_},
                {"queue_next", queue_next_ ? Json(*queue_next_) : Json(nullptr)},
                {"log_next_seq", log_->next_seq()},
                {"log_last_t", log_->size() > 0 ? log_->since(log_->next_seq() - 1).back().at("t").get<SimTime>() : now_},
                {"ids", ids},
                {"repo", save_repo()},
                {"pipeline", pipeline_->save()},
                {"sessions", sessions},
                {"records", records},
                {"tasks", tasks},
                {"spawned", spawned_},
                {"spawned_total", spawned_total_},
                {"review_backlog", backlog},
                {"merges", merges},
                {"worktree_intervals", intervals},
                {"commands", commands}};
}

std::unique_ptr<Simulation> Simulation::resume(const Json& cp, ResumeOptions options,
                                               std::shared_ptr<control::EventLog> log) {
    try {
        if (cp.value("version", 0) != 1) throw Error(Errc::corrupt_state, "unsupported checkpoint version");
        auto config = config_from_json(cp.at("config"));
        std::unique_ptr<Simulation> sim(new Simulation(Init{}, std::move(config), std::move(log)));
        auto& s = *sim;
        s.load_repo(cp.at("repo"));
        s.setup_common();
        s.pipeline_->load(cp.at("pipeline"));
        s.now_ = cp.at("now").get<SimTime>();
        s.phase_ = parse_phase(cp.at("phase").get<std::string>()).value();
        s.concurrency_ = cp.at("concurrency").get<std::size_t>();
        s.next_agent_ = cp.at("next_agent").get<std::uint64_t>();
        s.next_pr_ = cp.at("next_pr").get<std::uint64_t>();
        s.wait_counter_ = cp.at("wait_counter").get<std::uint64_t>();
        s.resumes_ = cp.at("resumes").get<int>() + 1;
        s.drain_sweeps_ = cp.at("drain_sweeps").get<int>();
        if (!cp.at("queue_next").is_null()) s.queue_next_ = cp.at("queue_next").get<SimTime>();
        if (s.log_->size() == 0 && s.log_->first_seq() == 0) s.log_->start_at(cp.at("log_next_seq").get<std::uint64_t>());
        std::map<std::uint64_t, std::uint64_t> counters;
        for (const auto& [k, v] : cp.at("ids").items()) counters[std::stoull(k)] = v.get<std::uint64_t>();
        s.ids_.restore(counters);
        for (const auto& r : cp.at("records")) s.records_.push_back(agents::record_from_json(r));
        for (const auto& [label, b] : cp.at("tasks").items()) {
            s.tasks_[label] = TaskBackoff{b.at("blocked").get<int>(), b.at("failures").get<int>(),
                                          b.at("not_before").get<SimTime>(), b.at("dropped").get<bool>()};
        }
        s.spawned_ = cp.at("spawned").get<std::map<std::string, std::uint64_t>>();
        s.spawned_total_ = cp.at("spawned_total").get<std::uint64_t>();
        for (const auto& pr : cp.at("review_backlog")) s.review_backlog_.insert(PrId{pr.get<std::uint64_t>()});
        for (const auto& iv : cp.at("worktree_intervals")) {
            s.worktree_intervals_.emplace_back(iv.at(0).get<SimTime>(), iv.at(1).get<SimTime>());
        }
        for (const auto& m : cp.at("merges")) {
            MergeRecord r;
            r.pr = PrId{m.at("pr").get<std::uint64_t>()};
            r.author = AgentId{m.at("author").get<std::uint64_t>()};
            r.role = agents::parse_role(m.at("role").get<std::string>()).value();
            r.commit = m.at("commit").get<std::string>();
            r.time = m.at("time").get<SimTime>();
            r.main_ok = m.at("main_ok").get<bool>();
            const auto& st = m.at("stat");
            auto n = [&](const char* k) { return st.at(k).get<std::int64_t>(); };
            r.stat = vcs::DiffStat{n("added"),    n("removed"),  n("code_files"),
                                   n("coordination_files"), n("code_net"), n("coordination_net")};
            r.decls = m.at("decls").get<std::size_t>();
            r.sorries = m.at("sorries").get<std::size_t>();
            r.proved_targets = m.at("proved_targets").get<std::size_t>();
            s.merged_stats_[r.pr] = r.stat;
            s.merges_.push_back(r);
        }
        for (const auto& c : cp.at("commands")) {
            s.commands_.push_back(OperatorCommand{c.at("name").get<std::string>(), c.at("args")});
        }
        const auto& worktrees = cp.at("repo").at("worktrees");

        s.emit("resumed", Json{{"resume", s.resumes_}, {"sessions", cp.at("sessions").size()},
                               {"resume_sessions", options.resume_sessions}});

        for (const auto& j : cp.at("sessions")) {
            const auto id = j.at("agent").get<std::uint64_t>();
            const auto role = agents::parse_role(j.at("role").get<std::string>()).value();
            const auto task = agents::task_from_json(j.at("task"));
            const auto profile = agents::default_profile(role);
            agents::SessionLimits lim;
            lim.max_turns = s.config_.turn_cap(role);
            lim.think_mean = s.config_.think_mean;
            lim.think_cap = s.config_.think_cap;
            lim.budget_sigma = s.config_.budget_sigma;
            lim.revision_fraction = s.config_.revision_fraction;
            Live l;
            l.session = std::make_unique<agents::Session>(
                agents::record_from_json(j.at("record")), task, agents::make_scripted_policy(role, task),
                agents::TokenModel::for_profile(profile), profile.avg_turns, lim, Rng::derive(s.config_.seed, "agent", {id}));
            l.session->load(j.at("session"));
            l.role = role;
            l.priority = j.at("priority").get<bool>();
            l.wait_order = j.at("wait_order").get<std::uint64_t>();
            l.branch = j.at("branch").get<std::string>();
            l.own_branch = j.at("own_branch").get<bool>();
            l.review_round = j.at("review_round").get<int>();
            l.review_attempt = j.value("review_attempt", 1);
            l.cancelled = j.at("cancelled").get<bool>();
            if (!j.at("pr").is_null()) l.pr = PrId{j.at("pr").get<std::uint64_t>()};
            if (!j.at("reviewing").is_null()) l.reviewing = PrId{j.at("reviewing").get<std::uint64_t>()};
            const auto saved_state = parse_live_state(j.at("state").get<std::string>()).value();
            if (l.own_branch && worktrees.contains(l.branch)) {
                for (const auto& [path, content] : worktrees.at(l.branch).items()) {
                    l.restore_dirty[path] = content.is_null() ? std::nullopt
                                                              : std::optional<std::string>(content.get<std::string>());
                }
            }
            l.needs_worktree = l.own_branch;
            if (saved_state == LiveState::parked) {
                l.state = LiveState::parked;
            } else {
                l.state = LiveState::waiting;
                auto rng = Rng::derive(s.config_.seed, "resume", {static_cast<std::uint64_t>(s.resumes_), id});
                l.not_before = s.now_ + rng.between(0, s.config_.resume_jitter);
                l.priority = true;
            }
            s.in_flight_[task.label()] = id;
            if (!task.subject.empty() && !agents::is_reviewer(role)) s.subjects_in_flight_[task.subject] = id;
            s.live_.emplace(id, std::move(l));
        }
        // Reviewers rebuild their snapshot; a review whose round moved on is moot.
        std::vector<std::uint64_t> stale;
        for (auto& [id, l] : s.live_) {
            if (!l.reviewing) continue;
            const bool current = s.pipeline_->has(*l.reviewing) &&
                                 s.pipeline_->get(*l.reviewing).state == PrState::in_review &&
                                 s.pipeline_->get(*l.reviewing).round == l.review_round;
            if (current) {
                l.view = std::make_shared<agents::ReviewView>(s.pipeline_->review_view(*l.reviewing));
            } else {
                stale.push_back(id);
            }
        }
        for (auto id : stale) s.finalize(id, OutcomeFacts{}, "review no longer needed");

        if (!options.resume_sessions) {
            std::vector<std::uint64_t> ids;
            for (const auto& [id, l] : s.live_) ids.push_back(id);
            for (auto id : ids) {
                auto& l = s.live_.at(id);
                OutcomeFacts f;
                if (l.pr && s.pipeline_->has(*l.pr) && s.pipeline_->get(*l.pr).approved) {
                    f.approved = true;
                } else {
                    f.aborted = true;
                }
                if (l.pr) s.abandon_pr(*l.pr);
                s.finalize(id, f, "not resumed");
            }
            if (s.queue_next_ && s.pipeline_->queue_empty()) s.queue_next_.reset();
        }

        if (!s.finished()) {
            const auto tick = s.config_.tick;
            s.schedule((s.now_ / tick + 1) * tick, EvKind::tick);
            if (s.queue_next_) {
                s.schedule(*s.queue_next_, EvKind::queue_step);
            } else {
                s.ensure_queue_running(s.config_.build_latency);
            }
            s.schedule(s.now_, EvKind::admit);
        }
        return sim;
    } catch (const Json::exception& e) {
        throw Error(Errc::corrupt_state, std::string("checkpoint: ") + e.what());
    } catch (const std::bad_optional_access&) {
        throw Error(Errc::corrupt_state, "checkpoint has an unknown enum value");
    }
}

}  // namespace swarm::orchestrator
