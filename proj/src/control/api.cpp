#include "swarm/control/api.hpp"

#include "swarm/accounting/report.hpp"
#include "swarm/common/error.hpp"
#include "swarm/orchestrator/run_state.hpp"

#include <chrono>
#include <limits>

namespace swarm::control {

using orchestrator::Simulation;

// --- LiveRun ---

LiveRun::LiveRun(std::unique_ptr<Simulation> sim) : sim_(std::move(sim)), log_(sim_->shared_log()) {}

LiveRun::~LiveRun() {
    stop();
    join();
}

void LiveRun::start(double pace) {
    if (thread_.joinable()) throw Error(Errc::invalid_argument, "run already started");
    stop_ = false;
    thread_ = std::thread([this, pace] {
        using clock = std::chrono::steady_clock;
        const auto wall0 = clock::now();
        SimTime sim0 = 0;
        {
            std::lock_guard lock(mutex_);
            sim0 = sim_->now();
        }
        while (!stop_) {
            {
                std::lock_guard lock(mutex_);
                if (sim_->finished()) break;
                const auto elapsed =
                    std::chrono::duration<double, std::milli>(clock::now() - wall0).count();
                const SimTime horizon = pace > 0 ? sim0 + static_cast<SimTime>(pace * elapsed)
                                                 : std::numeric_limits<SimTime>::max();
                int budget = 500;
                while (budget-- > 0 && !sim_->finished()) {
                    const auto before = sim_->now();
                    if (before > horizon) break;
                    if (!sim_->step()) break;
                }
            }
            if (pace > 0) std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    });
}

void LiveRun::stop() { stop_ = true; }

void LiveRun::join() {
    if (thread_.joinable()) thread_.join();
}

void LiveRun::advance(std::optional<SimTime> until) {
    std::lock_guard lock(mutex_);
    sim_->run(until);
}

orchestrator::CommandResult LiveRun::submit(orchestrator::OperatorCommand cmd) {
    return sim_->submit_command(std::move(cmd));
}

bool LiveRun::finished() const { return sim_->finished(); }

// --- helpers ---

ApiResponse api_error(int status, Errc code, const std::string& message) {
    return ApiResponse{status, Json{{"error", std::string(errc_name(code))}, {"message", message}}};
}

std::string sse_frame(const Json& event) {
    return "id: " + std::to_string(event.at("seq").get<std::uint64_t>()) + "\nevent: " +
           event.at("type").get<std::string>() + "\ndata: " + event.dump() + "\n\n";
}

namespace {

std::optional<std::string> param(const Query& q, const std::string& key) {
    auto it = q.find(key);
    if (it == q.end() || it->second.empty()) return std::nullopt;
    return it->second;
}

std::uint64_t number_param(const Query& q, const std::string& key, std::uint64_t fallback) {
    const auto v = param(q, key);
    if (!v) return fallback;
    std::size_t used = 0;
    std::uint64_t n = 0;
    try {
        n = std::stoull(*v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v->size() || v->front() == '-') throw Error(Errc::invalid_argument, key + " must be a nonnegative integer");
    return n;
}

Json session_json(const orchestrator::SessionInfo& s) {
    auto j = agents::to_json(s.record);
    j.erase("outcome");
    j["state"] = orchestrator::live_state_name(s.state);
    j["pr"] = s.pr ? Json(s.pr->value) : Json(nullptr);
    j["reviewing"] = s.reviewing ? Json(s.reviewing->value) : Json(nullptr);
    return j;
}

bool record_matches(const Json& rec, const Query& q) {
    if (auto r = param(q, "role"); r && rec.value("role", std::string()) != *r) return false;
    if (auto o = param(q, "outcome"); o && rec.value("outcome", std::string()) != *o) return false;
    if (auto s = param(q, "state"); s && rec.value("state", std::string("finished")) != *s) return false;
    return true;
}

void check_filters(const Query& q) {
    if (auto r = param(q, "role"); r && !agents::parse_role(*r)) throw Error(Errc::invalid_argument, "unknown role " + *r);
    if (auto o = param(q, "outcome"); o && !agents::parse_outcome(*o)) {
        throw Error(Errc::invalid_argument, "unknown outcome " + *o);
    }
}

Json issue_json(const issues::Issue& i) {
    return Json{{"id", i.id},
                {"title", i.title},
                {"status", issues::status_name(i.status)},
                {"kind", issues::kind_name(i.kind)},
                {"created_by", i.created_by.value},
                {"resolved_by", i.resolved_by ? Json(i.resolved_by->value) : Json(nullptr)},
                {"subject", i.subject}};
}

Json pr_json(const pipeline::PullRequest& pr) {
    return Json{{"pr", pr.id.value},
                {"author", pr.author.value},
                {"role", agents::role_name(pr.author_role)},
                {"task", pr.task},
                {"state", pipeline::state_name(pr.state)},
                {"revisions", pr.revision_count},
                {"attempt", pr.attempt},
                {"round", pr.round}};
}

Json targets_json(std::int64_t total, std::int64_t obligations, std::int64_t proved) {
    return Json{{"total", total}, {"obligations", obligations}, {"proved", proved}};
}

const std::map<std::string, std::string> kCommands = {
    {"pause", "pause"},
    {"resume", "resume"},
    {"stop-and-drain", "drain"},
    {"stop", "stop"},
    {"set-concurrency", "set-concurrency"},
    {"set-batch-size", "set-batch-size"},
    {"spawn-status", "spawn-status"},
    {"create-issue", "create-issue"},
};

}  // namespace

// --- ApiService ---

ApiService::ApiService(std::shared_ptr<LiveRun> live) : live_(std::move(live)), log_(live_->log()) {}

ApiService::ApiService(std::vector<Json> events) : log_(std::make_shared<EventLog>()) {
    if (!events.empty()) log_->start_at(events.front().at("seq").get<std::uint64_t>());
    for (auto& e : events) {
        if (e.at("seq").get<std::uint64_t>() != log_->next_seq()) {
            throw Error(Errc::corrupt_state, "replayed events must have consecutive seq numbers");
        }
        const auto type = e.at("type").get<std::string>();
        const auto t = e.at("t").get<SimTime>();
        log_->append(type, t, std::move(e));
    }
    log_->close();
}

ApiResponse ApiService::handle(const std::string& method, const std::string& path, const Query& query,
                               const std::string& body) const {
    try {
        if (method == "GET") return get(path, query);
        if (method == "POST") return post(path, body);
        return api_error(405, Errc::invalid_argument, "method " + method + " not allowed");
    } catch (const Error& e) {
        const int status = e.code() == Errc::invalid_argument ? 400 : e.code() == Errc::not_found ? 404 : 500;
        return api_error(status, e.code(), e.what());
    } catch (const Json::exception& e) {
        return api_error(400, Errc::invalid_argument, e.what());
    }
}

Json ApiService::replay_state() const {
    const auto state = orchestrator::fold(log_->all());
    return orchestrator::to_json(state);
}

ApiResponse ApiService::get(const std::string& path, const Query& q) const {
    if (path == "/api/events") {
        const auto from = number_param(q, "from", log_->first_seq());
        const auto limit = number_param(q, "limit", 1000);
        auto events = log_->since(from);
        if (events.size() > limit) events.resize(static_cast<std::size_t>(limit));
        const auto next = events.empty() ? std::max(from, log_->first_seq()) : events.back().at("seq").get<std::uint64_t>() + 1;
        return {200, Json{{"events", events}, {"next", next}, {"closed", log_->closed() && next >= log_->next_seq()}}};
    }

    if (!live_) {
        const auto events = log_->all();
        if (path == "/api/state") {
            auto s = replay_state();
            s["live"] = false;
            return {200, s};
        }
        if (path == "/api/agents") {
            check_filters(q);
            Json out = Json::array();
            for (const auto& e : events) {
                if (e.at("type") != "outcome") continue;
                if (record_matches(e.at("record"), q)) out.push_back(e.at("record"));
            }
            return {200, Json{{"agents", out}}};
        }
        if (path == "/api/queue") {
            const auto s = orchestrator::fold(events);
            return {200, Json{{"depth", s.queue.size()}, {"queue", s.queue}}};
        }
        if (path == "/api/issues") {
            std::map<std::string, Json> by_id;
            for (const auto& e : events) {
                if (e.at("type") != "issue_op") continue;
                const auto id = e.at("id").get<std::string>();
                if (e.at("op") == "create") {
                    by_id[id] = Json{{"id", id}, {"kind", e.at("kind")}, {"subject", e.at("subject")},
                                     {"status", "open"}, {"created_by", e.at("agent")}, {"resolved_by", nullptr}};
                }
                if (e.at("op") == "resolve" && by_id.count(id)) {
                    by_id[id]["status"] = "resolved";
                    by_id[id]["resolved_by"] = e.at("pr");
                }
            }
            Json out = Json::array();
            for (auto& [id, j] : by_id) {
                if (auto s = param(q, "status"); s && j.at("status") != *s) continue;
                if (auto k = param(q, "kind"); k && j.at("kind") != *k) continue;
                out.push_back(j);
            }
            return {200, Json{{"issues", out}}};
        }
        if (path == "/api/targets" || path == "/api/metrics") {
            const auto report = accounting::report_from_log(events);
            if (path == "/api/targets") {
                return {200, Json{{"summary", targets_json(report.targets, report.obligations, report.proved)},
                                  {"statuses", nullptr}}};
            }
            return {200, accounting::to_json(report)};
        }
        return api_error(404, Errc::not_found, "no endpoint " + path);
    }

    return live_->with([&](const Simulation& sim) -> ApiResponse {
        if (path == "/api/state") {
            const auto t = sim.targets();
            Json sessions = Json::object();
            for (const auto& [k, v] : sim.sessions_by_state()) sessions[k] = v;
            return {200, Json{{"live", true},
                              {"phase", orchestrator::phase_name(sim.phase())},
                              {"clock", sim.now()},
                              {"next_seq", sim.log().next_seq()},
                              {"concurrency", sim.concurrency()},
                              {"slots_used", sim.live_count()},
                              {"batch_size", sim.prs().config().batch_size},
                              {"sessions", sessions},
                              {"spawned", sim.spawned()},
                              {"finished_agents", sim.records().size()},
                              {"merges", sim.merges().size()},
                              {"queue_depth", sim.prs().queue().size()},
                              {"targets", targets_json(static_cast<std::int64_t>(t.total),
                                                       static_cast<std::int64_t>(t.obligations),
                                                       static_cast<std::int64_t>(t.proved))}}};
        }
        if (path == "/api/agents") {
            check_filters(q);
            Json out = Json::array();
            for (const auto& r : sim.records()) {
                auto j = agents::to_json(r);
                if (record_matches(j, q)) out.push_back(std::move(j));
            }
            for (const auto& s : sim.sessions()) {
                auto j = session_json(s);
                if (record_matches(j, q)) out.push_back(std::move(j));
            }
            return {200, Json{{"agents", out}}};
        }
        if (path == "/api/queue") {
            Json queue = Json::array(), review = Json::array();
            for (auto id : sim.prs().queue()) queue.push_back(pr_json(sim.prs().get(id)));
            for (const auto& [id, pr] : sim.prs().all()) {
                if (pr.state == pipeline::PrState::in_review) review.push_back(pr_json(pr));
            }
            return {200, Json{{"depth", queue.size()}, {"queue", queue}, {"in_review", review}}};
        }
        if (path == "/api/issues") {
            std::optional<issues::IssueStatus> status;
            std::optional<issues::IssueKind> kind;
            if (auto s = param(q, "status")) {
                status = issues::parse_status(*s);
                if (!status) throw Error(Errc::invalid_argument, "unknown status " + *s);
            }
            if (auto k = param(q, "kind")) {
                kind = issues::parse_kind(*k);
                if (!kind) throw Error(Errc::invalid_argument, "unknown kind " + *k);
            }
            const auto set = issues::load_issues(sim.repo().main().tree());
            Json out = Json::array();
            for (const auto* i : set.filter(status, kind)) out.push_back(issue_json(*i));
            return {200, Json{{"issues", out}, {"parse_errors", set.errors.size()}}};
        }
        if (path == "/api/targets") {
            const auto an = checker::analyze(sim.repo().main().tree());
            Json statuses = Json::object();
            for (const auto& [name, st] : checker::target_status(an, sim.scenario().targets)) {
                statuses[name] = checker::target_status_name(st);
            }
            const auto t = sim.targets();
            return {200, Json{{"summary", targets_json(static_cast<std::int64_t>(t.total),
                                                       static_cast<std::int64_t>(t.obligations),
                                                       static_cast<std::int64_t>(t.proved))},
                              {"statuses", statuses}}};
        }
        if (path == "/api/metrics") return {200, accounting::to_json(sim.report())};
        return api_error(404, Errc::not_found, "no endpoint " + path);
    });
}

ApiResponse ApiService::post(const std::string& path, const std::string& body) const {
    const std::string prefix = "/api/commands/";
    if (path.rfind(prefix, 0) != 0) return api_error(404, Errc::not_found, "no endpoint " + path);
    const auto name = path.substr(prefix.size());
    auto it = kCommands.find(name);
    if (it == kCommands.end()) return api_error(404, Errc::not_found, "unknown command " + name);
    if (!live_) return api_error(409, Errc::not_live, "the service is reading a log; commands need a live run");
    Json args = Json::object();
    if (!body.empty()) {
        try {
            args = Json::parse(body);
        } catch (const Json::exception& e) {
            return api_error(400, Errc::invalid_argument, std::string("body is not JSON: ") + e.what());
        }
        if (!args.is_object()) return api_error(400, Errc::invalid_argument, "body must be a JSON object");
    }
    const auto res = live_->submit(orchestrator::OperatorCommand{it->second, args});
    if (!res.accepted) {
        const int status = res.code == Errc::invalid_argument ? 400 : res.code == Errc::not_found ? 404 : 409;
        return api_error(status, res.code, res.message);
    }
    return {202, Json{{"accepted", true}, {"command", it->second}, {"message", res.message}}};
}

}  // namespace swarm::control
