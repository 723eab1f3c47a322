#include "swarm/orchestrator/run_state.hpp"

#include "swarm/common/error.hpp"

#include <algorithm>

namespace swarm::orchestrator {

RunState project(const Simulation& sim) {
    RunState s;
    s.phase = std::string(phase_name(sim.phase()));
    const auto& log = sim.log();
    s.next_seq = log.next_seq();
    if (log.size() > 0) s.clock = log.since(s.next_seq - 1).back().at("t").get<SimTime>();
    const auto cp = sim.checkpoint();
    for (const auto& sess : cp.at("sessions")) {
        s.live[sess.at("agent").get<std::uint64_t>()] = sess.at("role").get<std::string>();
    }
    for (const auto& r : sim.records()) s.outcomes[std::string(agents::outcome_name(r.outcome))] += 1;
    s.spawned = static_cast<std::int64_t>(sim.spawned());
    for (const auto& [label, b] : cp.at("tasks").items()) {
        s.tasks[label] = TaskEntry{b.at("blocked").get<int>(), b.at("failures").get<int>(),
                                   b.at("not_before").get<SimTime>(), b.at("dropped").get<bool>()};
    }
    for (auto pr : sim.prs().queue()) s.queue.push_back(pr.value);
    s.main_head = sim.repo().branch_head(vcs::kMainBranch).hex;
    s.merges = static_cast<std::int64_t>(sim.merges().size());
    s.concurrency = static_cast<std::int64_t>(sim.concurrency());
    s.batch_size = static_cast<std::int64_t>(sim.prs().config().batch_size);
    return s;
}

RunState project_checkpoint(const Json& cp) {
    try {
        RunState s;
        s.phase = cp.at("phase").get<std::string>();
        s.next_seq = cp.at("log_next_seq").get<std::uint64_t>();
        s.clock = cp.at("log_last_t").get<SimTime>();
        for (const auto& sess : cp.at("sessions")) {
            s.live[sess.at("agent").get<std::uint64_t>()] = sess.at("role").get<std::string>();
        }
        for (const auto& r : cp.at("records")) s.outcomes[r.at("outcome").get<std::string>()] += 1;
        s.spawned = cp.at("spawned_total").get<std::int64_t>();
        for (const auto& [label, b] : cp.at("tasks").items()) {
            s.tasks[label] = TaskEntry{b.at("blocked").get<int>(), b.at("failures").get<int>(),
                                       b.at("not_before").get<SimTime>(), b.at("dropped").get<bool>()};
        }
        for (const auto& q : cp.at("pipeline").at("queue")) s.queue.push_back(q.get<std::uint64_t>());
        const auto& history = cp.at("repo").at("main_history");
        if (history.empty()) throw Error(Errc::corrupt_state, "checkpoint has no main history");
        s.main_head = history.back().get<std::string>();
        s.merges = static_cast<std::int64_t>(cp.at("merges").size());
        s.concurrency = cp.at("concurrency").get<std::int64_t>();
        s.batch_size = cp.at("pipeline").at("batch_size").get<std::int64_t>();
        return s;
    } catch (const Json::exception& e) {
        throw Error(Errc::corrupt_state, std::string("checkpoint: ") + e.what());
    }
}

void apply_event(RunState& s, const Json& e) {
    const auto type = e.at("type").get<std::string>();
    s.next_seq = e.at("seq").get<std::uint64_t>() + 1;
    s.clock = e.at("t").get<SimTime>();
    if (type == "run_started") {
        s.main_head = e.at("main").get<std::string>();
        const auto& c = e.at("config");
        s.concurrency = c.at("concurrency").get<std::int64_t>();
        s.batch_size = c.at("batch_size").get<std::int64_t>();
    } else if (type == "phase") {
        s.phase = e.at("to").get<std::string>();
    } else if (type == "spawn") {
        s.live[e.at("agent").get<std::uint64_t>()] = e.at("role").get<std::string>();
        s.spawned += 1;
    } else if (type == "outcome") {
        s.live.erase(e.at("agent").get<std::uint64_t>());
        s.outcomes[e.at("outcome").get<std::string>()] += 1;
    } else if (type == "task") {
        const auto label = e.at("task").get<std::string>();
        if (e.value("cleared", false)) {
            s.tasks.erase(label);
        } else {
            s.tasks[label] = TaskEntry{e.at("blocked").get<int>(), e.at("failures").get<int>(),
                                       e.at("not_before").get<SimTime>(), e.at("dropped").get<bool>()};
        }
    } else if (type == "decision") {
        if (e.at("kind") == "queued") s.queue.push_back(e.at("pr").get<std::uint64_t>());
    } else if (type == "queue" || type == "pr_closed") {
        std::erase(s.queue, e.at("pr").get<std::uint64_t>());
    } else if (type == "merge") {
        s.main_head = e.at("commit").get<std::string>();
        s.merges += 1;
    } else if (type == "command") {
        const auto name = e.at("name").get<std::string>();
        if (name == "set-concurrency") s.concurrency = e.at("args").at("value").get<std::int64_t>();
        if (name == "set-batch-size") s.batch_size = e.at("args").at("value").get<std::int64_t>();
    }
}

RunState fold(const std::vector<Json>& events, RunState start) {
    for (const auto& e : events) apply_event(start, e);
    return start;
}

Json to_json(const RunState& s) {
    Json live = Json::object();
    for (const auto& [id, role] : s.live) live[std::to_string(id)] = role;
    Json tasks = Json::object();
    for (const auto& [label, t] : s.tasks) {
        tasks[label] = Json{{"blocked", t.blocked}, {"failures", t.failures}, {"not_before", t.not_before},
                            {"dropped", t.dropped}};
    }
    return Json{{"phase", s.phase},       {"clock", s.clock},         {"next_seq", s.next_seq},
                {"live", live},           {"outcomes", s.outcomes},   {"spawned", s.spawned},
                {"tasks", tasks},         {"queue", s.queue},         {"main_head", s.main_head},
                {"merges", s.merges},     {"concurrency", s.concurrency}, {"batch_size", s.batch_size}};
}

std::vector<std::string> done_violations(const Simulation& sim) {
    std::vector<std::string> out;
    if (sim.phase() != Phase::done) return out;
    const auto t = sim.targets();
    if (!t.complete()) {
        out.push_back("done with " + std::to_string(t.obligations - t.proved) + " unproved targets");
    }
    if (!sim.prs().queue_empty()) out.push_back("done with a non-empty merge queue");
    if (sim.session_count() != 0) out.push_back("done with live sessions");
    return out;
}

}  // namespace swarm::orchestrator
