#include <doctest.h>

#include "swarm/common/error.hpp"
#include "swarm/orchestrator/run_state.hpp"
#include "swarm/orchestrator/scenario.hpp"
#include "swarm/orchestrator/simulation.hpp"
#include "swarm/vcs/diff.hpp"
#include "swarm/vcs/limiter.hpp"

#include <set>

using namespace swarm;
using namespace swarm::orchestrator;
using agents::Outcome;
using agents::Role;

namespace {

RunConfig small(std::uint64_t seed = 1, int chapters = 3) {
    RunConfig c;
    c.seed = seed;
    c.scenario.chapters = chapters;
    return c;
}

std::vector<Json> events_of(const Simulation& s, const std::string& type, std::uint64_t from = 0) {
    std::vector<Json> out;
    for (auto& e : s.log().since(from))
        if (e.at("type") == type) out.push_back(std::move(e));
    return out;
}

// Seq of the first event of `type` at or after `from` that matches `pred`.
template <class Pred>
std::optional<std::uint64_t> find_seq(const Simulation& s, const std::string& type, Pred pred, std::uint64_t from = 0) {
    for (const auto& e : s.log().since(from))
        if (e.at("type") == type && pred(e)) return e.at("seq").get<std::uint64_t>();
    return std::nullopt;
}

void check_partition(const Simulation& s) {
    std::map<Outcome, std::int64_t> by;
    for (const auto& r : s.records()) by[r.outcome] += 1;
    std::int64_t sum = 0;
    for (auto o : agents::kAllOutcomes) sum += by[o];
    CHECK(sum == static_cast<std::int64_t>(s.spawned()) - static_cast<std::int64_t>(s.session_count()));
    CHECK(by.size() <= agents::kAllOutcomes.size());
    std::set<std::uint64_t> ids;
    for (const auto& r : s.records()) ids.insert(r.id.value);
    CHECK(ids.size() == s.records().size());
}

}  // namespace

TEST_CASE("generated corpora are valid") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        CHECK(validate_scenario(generate_scenario(ScenarioParams{}, seed)).empty());
        CHECK(validate_scenario(generate_scenario(small(seed).scenario, seed)).empty());
    }
    auto sc = generate_scenario(small().scenario, 1);
    SUBCASE("a duplicated declaration is reported") {
        sc.chapters[1].decls.push_back(sc.chapters[0].decls.front());
        CHECK_FALSE(validate_scenario(sc).empty());
    }
    SUBCASE("a dependency out of scope is reported") {
        sc.chapters[0].decls.back().deps.push_back(sc.chapters[2].decls.back().name);
        CHECK_FALSE(validate_scenario(sc).empty());
    }
}

TEST_CASE("a small run proves every provable target and never schedules excluded ones") {
    Simulation sim(small(2));
    sim.run();
    REQUIRE(sim.phase() == Phase::done);
    const auto t = sim.targets();
    CHECK(t.complete());
    CHECK(t.excluded > 0);
    CHECK(done_violations(sim).empty());
    CHECK_FALSE(sim.merges().empty());
    for (const auto& m : sim.merges()) CHECK(m.main_ok);

    std::set<std::string> excluded;
    for (const auto& ch : sim.scenario().chapters)
        for (const auto& d : ch.decls)
            if (d.cited || d.exercise) excluded.insert(d.name);
    REQUIRE_FALSE(excluded.empty());
    for (const auto& e : events_of(sim, "spawn")) CHECK(excluded.count(e.at("subject").get<std::string>()) == 0);
    CHECK(sim.session_count() == 0);
    check_partition(sim);
    const auto finished = events_of(sim, "run_finished");
    REQUIRE(finished.size() == 1);
    CHECK(finished[0].at("reason") == "done");
}

TEST_CASE("identical config and seed give identical logs") {
    Simulation a(small(5)), b(small(5)), c(small(6));
    a.run();
    b.run();
    c.run();
    CHECK(a.log().jsonl() == b.log().jsonl());
    CHECK(a.log().jsonl() != c.log().jsonl());
}

TEST_CASE("final main is the ordered replay of merged diffs") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        Simulation sim(small(seed));
        sim.run();
        const auto main = sim.repo().main();
        const auto& h = main.history;
        REQUIRE(h.size() == sim.merges().size() + 1);
        CHECK(sim.repo().snapshot(h.front()).tree() == sim.scenario().initial);
        vcs::Tree replay = sim.scenario().initial;
        for (std::size_t k = 1; k < h.size(); ++k) {
            CHECK(sim.merges()[k - 1].commit == h[k].hex);
            const auto d = sim.repo().diff_stats(h[k - 1], h[k]);
            CHECK(d.added_lines == sim.merges()[k - 1].stat.added);
            CHECK(d.removed_lines == sim.merges()[k - 1].stat.removed);
            replay = vcs::apply_diff(d, replay);
        }
        CHECK(replay == main.tree());
    }
}

TEST_CASE("pause stops spawning and resume restarts it") {
    Simulation sim(small(3));
    sim.run(hours(1));
    REQUIRE_FALSE(sim.finished());
    const auto asked = sim.now();
    REQUIRE(sim.submit_command({"pause"}).accepted);
    sim.run(hours(3));
    const auto paused = find_seq(sim, "phase", [](const Json& e) { return e.at("to") == "paused"; });
    REQUIRE(paused);
    const auto ev = sim.log().since(*paused).front();
    CHECK(ev.at("t").get<SimTime>() - asked <= sim.config().tick);
    const auto cmd = find_seq(sim, "command", [](const Json& e) { return e.at("name") == "pause"; });
    REQUIRE(cmd);
    CHECK(*cmd < *paused);
    CHECK(events_of(sim, "spawn", *paused).empty());
    CHECK(sim.phase() == Phase::paused);

    CHECK(sim.submit_command({"pause"}).accepted);  // idempotent
    REQUIRE(sim.submit_command({"resume"}).accepted);
    const auto mark = sim.log().next_seq();
    sim.run(hours(4));
    CHECK(sim.phase() == Phase::running);
    CHECK_FALSE(events_of(sim, "spawn", mark).empty());
}

TEST_CASE("lowering concurrency drains within one tick") {
    Simulation sim(small(4, 6));
    sim.run(minutes(90));
    REQUIRE(sim.live_count() > 4);
    REQUIRE(sim.submit_command({"set-concurrency", Json{{"value", 4}}}).accepted);
    const auto mark = sim.log().next_seq();
    // The command takes effect at the next tick; sessions over the cap stop at their next turn boundary.
    sim.run(sim.now() + 2 * sim.config().tick);
    CHECK(sim.concurrency() == 4);
    for (int i = 0; i < 60 && !sim.finished(); ++i) {
        CHECK(sim.live_count() <= 4);
        sim.run(sim.now() + minutes(1));
    }
    CHECK_FALSE(events_of(sim, "suspend", mark).empty());
}

TEST_CASE("drain finishes in-flight work and stops") {
    Simulation sim(small(5, 6));
    sim.run(hours(1));
    REQUIRE(sim.submit_command({"drain"}).accepted);
    sim.run();
    CHECK(sim.phase() == Phase::stopped);
    const auto draining = find_seq(sim, "phase", [](const Json& e) { return e.at("to") == "draining"; });
    REQUIRE(draining);
    for (const auto& e : events_of(sim, "spawn", *draining)) {
        const auto role = e.at("role").get<std::string>();
        CHECK((role == "triage" || role == "math-reviewer" || role == "eng-reviewer"));
    }
    const auto fin = events_of(sim, "run_finished");
    REQUIRE(fin.size() == 1);
    CHECK(fin[0].at("reason") == "drained");
    CHECK(sim.session_count() == 0);
    CHECK(done_violations(sim).empty());
    check_partition(sim);
    CHECK(sim.submit_command({"resume"}).code == Errc::wrong_phase);
}

TEST_CASE("stop aborts every live session") {
    Simulation sim(small(6));
    sim.run(hours(1));
    const auto live = sim.session_count();
    REQUIRE(live > 0);
    REQUIRE(sim.submit_command({"stop"}).accepted);
    sim.run();
    CHECK(sim.phase() == Phase::stopped);
    CHECK(sim.session_count() == 0);
    CHECK(sim.records().size() == sim.spawned());
}

TEST_CASE("command payloads are validated") {
    Simulation sim(small(1));
    CHECK(sim.submit_command({"reboot"}).code == Errc::not_found);
    CHECK(sim.submit_command({"set-concurrency", Json{{"value", 0}}}).code == Errc::invalid_argument);
    CHECK(sim.submit_command({"set-concurrency", Json{{"value", "8"}}}).code == Errc::invalid_argument);
    CHECK(sim.submit_command({"create-issue", Json{{"body", "no title"}}}).code == Errc::invalid_argument);
    CHECK(sim.submit_command({"create-issue", Json{{"title", "t"}, {"kind", "wish"}}}).code == Errc::invalid_argument);
    CHECK(sim.submit_command({"spawn-status"}).code == Errc::wrong_phase);
    CHECK(sim.submit_command({"pause", Json::array()}).code == Errc::invalid_argument);
}

TEST_CASE("an operator issue lands on main through a reviewed PR") {
    Simulation sim(small(7));
    sim.run(hours(1));
    REQUIRE(sim.submit_command({"create-issue", Json{{"title", "check the glossary"}, {"kind", "report"}}}).accepted);
    sim.run();
    REQUIRE(sim.phase() == Phase::done);
    bool merged = false;
    for (const auto& m : sim.merges()) merged = merged || m.author == kOperator;
    CHECK(merged);
    bool found = false;
    for (const auto& [path, text] : sim.repo().main().tree())
        found = found || (path.rfind("issues/", 0) == 0 && text.find("check the glossary") != std::string::npos);
    CHECK(found);
    const auto submitted = events_of(sim, "pr_submitted");
    bool op = false;
    for (const auto& e : submitted) op = op || (e.at("agent") == kOperator.value && e.contains("issue"));
    CHECK(op);
}

TEST_CASE("a status agent runs inline while paused") {
    Simulation sim(small(8));
    sim.run(hours(1));
    REQUIRE(sim.submit_command({"pause"}).accepted);
    sim.run(sim.now() + 2 * sim.config().tick);
    REQUIRE(sim.phase() == Phase::paused);
    const auto mark = sim.log().next_seq();
    REQUIRE(sim.submit_command({"spawn-status"}).accepted);
    sim.run(sim.now() + 2 * sim.config().tick);
    const auto spawns = events_of(sim, "spawn", mark);
    REQUIRE(spawns.size() == 1);
    CHECK(spawns[0].at("role") == "status");
    const auto id = spawns[0].at("agent").get<std::uint64_t>();
    CHECK(sim.phase() == Phase::paused);
    // Its report goes through review like any other PR, once the run resumes.
    const auto submitted = find_seq(sim, "pr_submitted", [&](const Json& e) { return e.at("agent") == id; }, mark);
    CHECK(submitted);
    REQUIRE(sim.submit_command({"resume"}).accepted);
    sim.run();
    std::optional<Outcome> outcome;
    for (const auto& r : sim.records())
        if (r.id.value == id) outcome = r.outcome;
    REQUIRE(outcome);
    CHECK(*outcome == Outcome::merged);
}

TEST_CASE("revision cap is hit at exactly the tenth request") {
    auto c = small(2);
    c.policy.review.mode = agents::ReviewMode::always_request_changes;
    c.max_turns = {{"sketcher", 4096}, {"prover", 4096}, {"maintainer", 4096}};
    c.max_sim_time = hours(24);
    Simulation sim(c);
    sim.run();
    CHECK(sim.merges().empty());
    std::size_t capped = 0;
    for (const auto& r : sim.records()) {
        CHECK(r.revisions <= 10);
        if (r.outcome == Outcome::max_revisions) {
            ++capped;
            CHECK(r.revisions == 10);
        }
    }
    CHECK(capped > 0);
    check_partition(sim);
}

TEST_CASE("resume with 200 pending agents respects the worktree cap") {
    auto c = small(3, 200);
    c.concurrency = 200;
    Simulation sim(c);
    sim.run(seconds(1));
    const auto cp = sim.checkpoint();
    REQUIRE(cp.at("sessions").size() == 200);
    auto r = Simulation::resume(cp);
    const auto first = r->log().next_seq();
    std::set<std::uint64_t> pending, ran;
    for (const auto& s : cp.at("sessions")) pending.insert(s.at("agent").get<std::uint64_t>());
    std::uint64_t at = first;
    for (int i = 0; i < 120 && ran.size() < pending.size(); ++i) {
        r->run(r->now() + minutes(1));
        for (const auto& e : r->log().since(at)) {
            const auto type = e.at("type").get<std::string>();
            if ((type == "turn" || type == "outcome") && pending.count(e.at("agent").get<std::uint64_t>()))
                ran.insert(e.at("agent").get<std::uint64_t>());
        }
        at = r->log().next_seq();
    }
    CHECK(ran == pending);
    std::vector<std::pair<SimTime, SimTime>> creations;
    for (const auto& e : events_of(*r, "worktree", first))
        creations.emplace_back(e.at("start").get<SimTime>(), e.at("end").get<SimTime>());
    CHECK(creations.size() >= 200);
    CHECK(vcs::max_overlap(creations) == 8);
}

TEST_CASE("resume without sessions ends each one as aborted or approved") {
    Simulation sim(small(4, 4));
    sim.run(hours(2));
    const auto cp = sim.checkpoint();
    REQUIRE_FALSE(cp.at("sessions").empty());
    auto r = Simulation::resume(cp, ResumeOptions{false});
    r->run(r->now());
    std::map<std::uint64_t, Outcome> ended;
    for (const auto& rec : r->records()) ended[rec.id.value] = rec.outcome;
    for (const auto& s : cp.at("sessions")) {
        const auto id = s.at("agent").get<std::uint64_t>();
        REQUIRE(ended.count(id));
        CHECK((ended[id] == Outcome::aborted || ended[id] == Outcome::approved));
    }
    r->run();
    CHECK(r->phase() == Phase::done);
    CHECK(done_violations(*r).empty());
}

TEST_CASE("resuming a finished run is immediately done") {
    Simulation sim(small(5));
    sim.run();
    REQUIRE(sim.phase() == Phase::done);
    auto r = Simulation::resume(sim.checkpoint());
    const auto first = r->log().next_seq();
    r->run();
    CHECK(r->phase() == Phase::done);
    CHECK(events_of(*r, "spawn", first).empty());
}

TEST_CASE("state folded from the log matches the live and resumed runs") {
    Simulation sim(small(3, 5));
    for (auto cut : {hours(1), hours(3), hours(5)}) {
        sim.run(cut);
        if (sim.finished()) break;
        const auto cp = sim.checkpoint();
        const auto live = project(sim);
        CHECK(live == project_checkpoint(cp));
        CHECK(live == fold(sim.log().since(0)));

        auto r = Simulation::resume(cp);
        CHECK(r->log().first_seq() == live.next_seq);
        r->run(r->now() + hours(1));
        CHECK(project(*r) == fold(r->log().since(0), project_checkpoint(cp)));
        r->run();
        CHECK(r->phase() == Phase::done);
        CHECK(done_violations(*r).empty());
    }
}
