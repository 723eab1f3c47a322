#include <doctest.h>

#include "swarm/accounting/report.hpp"
#include "swarm/common/error.hpp"
#include "swarm/control/api.hpp"
#include "swarm/control/event_log.hpp"
#include "swarm/orchestrator/config.hpp"
#include "swarm/orchestrator/simulation.hpp"

#include <httplib.h>

#include <set>
#include <thread>

using namespace swarm;
using namespace swarm::control;
using orchestrator::hours;

namespace {

orchestrator::RunConfig small(std::uint64_t seed = 1) {
    orchestrator::RunConfig c;
    c.seed = seed;
    c.scenario.chapters = 3;
    return c;
}

const std::vector<Json>& finished_log() {
    static const std::vector<Json> events = [] {
        orchestrator::Simulation sim(small(2));
        sim.run();
        return sim.log().all();
    }();
    return events;
}

std::string line(std::uint64_t seq, const std::string& type = "spawn") {
    return Json{{"seq", seq}, {"v", kSchemaVersion}, {"type", type}, {"t", 0}}.dump() + "\n";
}

// Events read back from the text of an SSE response.
std::vector<Json> parse_sse(const std::string& body) {
    std::vector<Json> out;
    std::size_t pos = 0;
    while (true) {
        const auto end = body.find("\n\n", pos);
        if (end == std::string::npos) break;
        const auto frame = body.substr(pos, end - pos);
        pos = end + 2;
        std::uint64_t id = 0;
        std::string type;
        Json data;
        std::size_t p = 0;
        while (p < frame.size()) {
            auto nl = frame.find('\n', p);
            if (nl == std::string::npos) nl = frame.size();
            const auto l = frame.substr(p, nl - p);
            p = nl + 1;
            if (l.rfind("id: ", 0) == 0) id = std::stoull(l.substr(4));
            if (l.rfind("event: ", 0) == 0) type = l.substr(7);
            if (l.rfind("data: ", 0) == 0) data = Json::parse(l.substr(6));
        }
        if (data.is_null()) continue;  // keep-alive comment
        CHECK(data.at("seq") == id);
        CHECK(data.at("type") == type);
        out.push_back(std::move(data));
    }
    return out;
}

}  // namespace

TEST_CASE("event log numbers, stores and fans out events") {
    EventLog log;
    std::vector<std::string> lines;
    log.add_sink([&](const std::string& l) { lines.push_back(l); });
    CHECK(log.append("a", 5, Json{{"x", 1}}) == 0);
    CHECK(log.append("b", 6) == 1);
    REQUIRE(lines.size() == 2);
    const auto e = Json::parse(lines[0]);
    CHECK(e.at("seq") == 0);
    CHECK(e.at("type") == "a");
    CHECK(e.at("t") == 5);
    CHECK(e.at("v") == kSchemaVersion);
    CHECK(e.at("x") == 1);
    CHECK(log.since(1).size() == 1);
    CHECK(log.jsonl() == lines[0] + lines[1]);
    CHECK_THROWS_AS(log.start_at(10), Error);

    EventLog resumed;
    resumed.start_at(40);
    CHECK(resumed.append("c", 0) == 40);
    CHECK(resumed.since(0).size() == 1);
    CHECK(resumed.since(41).empty());

    CHECK_FALSE(log.wait_for(2, std::chrono::milliseconds(10)));
    std::thread writer([&] { log.append("c", 7); });
    CHECK(log.wait_for(2, std::chrono::seconds(5)));
    writer.join();
    log.close();
    CHECK(log.closed());
    CHECK_FALSE(log.wait_for(3, std::chrono::seconds(5)));  // returns at once when closed
}

TEST_CASE("concurrent appends get unique consecutive seq numbers") {
    EventLog log;
    std::vector<std::thread> ts;
    for (int k = 0; k < 4; ++k)
        ts.emplace_back([&] {
            for (int i = 0; i < 500; ++i) log.append("x", i);
        });
    for (auto& t : ts) t.join();
    const auto parsed = parse_jsonl(log.jsonl());
    CHECK(parsed.size() == 2000);
}

TEST_CASE("jsonl parsing rejects malformed logs") {
    CHECK(parse_jsonl(line(0) + line(1) + "\n").size() == 2);
    CHECK_THROWS_AS(parse_jsonl(line(0) + "{not json\n"), Error);
    CHECK_THROWS_AS(parse_jsonl("[1,2]\n"), Error);
    CHECK_THROWS_AS(parse_jsonl(Json{{"seq", 0}, {"type", "x"}}.dump() + "\n"), Error);
    CHECK_THROWS_AS(parse_jsonl(Json{{"seq", 0}, {"v", kSchemaVersion + 1}, {"type", "x"}, {"t", 0}}.dump()), Error);
    CHECK_THROWS_AS(parse_jsonl(line(0) + line(2)), Error);
    CHECK(parse_jsonl(line(0) + line(2), true).size() == 2);
    CHECK_THROWS_AS(parse_jsonl(line(3) + line(2), true), Error);
    CHECK_THROWS_AS(parse_jsonl(line(3) + line(3), true), Error);
    CHECK(parse_jsonl(line(7)).front().at("seq") == 7);
}

TEST_CASE("run config round trips and rejects unknown keys") {
    auto c = small(9);
    c.concurrency = 12;
    c.batch_size = 4;
    c.max_turns = {{"prover", 300}};
    c.policy.review.mode = agents::ReviewMode::always_approve;
    const auto j = orchestrator::to_json(c);
    CHECK(orchestrator::to_json(orchestrator::config_from_json(j)) == j);

    const auto partial = orchestrator::config_from_json(Json{{"seed", 4}});
    CHECK(partial.seed == 4);
    CHECK(partial.concurrency == orchestrator::RunConfig{}.concurrency);
    CHECK_THROWS_AS(orchestrator::config_from_json(Json{{"sede", 4}}), Error);
    CHECK_THROWS_AS(orchestrator::config_from_json(Json{{"scenario", {{"chapterz", 2}}}}), Error);
    CHECK_THROWS_AS(orchestrator::config_from_json(Json{{"concurrency", "many"}}), Error);
}

TEST_CASE("sse frames carry id, type and data") {
    const auto e = Json{{"seq", 12}, {"type", "merge"}, {"v", 1}, {"t", 3}};
    const auto f = sse_frame(e);
    CHECK(f == "id: 12\nevent: merge\ndata: " + e.dump() + "\n\n");
    const auto back = parse_sse(f);
    REQUIRE(back.size() == 1);
    CHECK(back[0] == e);
}

TEST_CASE("live API reads state and takes commands") {
    auto live = std::make_shared<LiveRun>(std::make_unique<orchestrator::Simulation>(small(3)));
    live->advance(hours(1));
    ApiService api(live);
    REQUIRE(api.live());

    auto get = [&](const std::string& path, Query q = {}) { return api.handle("GET", path, q, ""); };
    auto post = [&](const std::string& name, const std::string& body = "{}") {
        return api.handle("POST", "/api/commands/" + name, {}, body);
    };

    const auto state = get("/api/state");
    CHECK(state.status == 200);
    CHECK(state.body.at("live") == true);
    CHECK(state.body.at("phase") == "running");
    CHECK(state.body.at("concurrency") == 16);

    const auto provers = get("/api/agents", {{"role", "prover"}});
    CHECK(provers.status == 200);
    for (const auto& a : provers.body.at("agents")) CHECK(a.at("role") == "prover");
    CHECK(get("/api/agents", {{"role", "manager"}}).status == 400);
    CHECK(get("/api/queue").status == 200);
    CHECK(get("/api/issues", {{"status", "open"}}).status == 200);
    CHECK(get("/api/targets").body.at("statuses").is_object());
    CHECK(get("/api/metrics").body.at("conserved") == true);
    CHECK(get("/api/nothing").status == 404);
    CHECK(api.handle("DELETE", "/api/state", {}, "").status == 405);

    const auto page = get("/api/events", {{"from", "0"}, {"limit", "10"}});
    REQUIRE(page.body.at("events").size() == 10);
    CHECK(page.body.at("next") == 10);
    CHECK(page.body.at("closed") == false);
    CHECK(get("/api/events", {{"from", "-1"}}).status == 400);

    CHECK(post("pause", "{not json").status == 400);
    CHECK(post("pause", "[1]").status == 400);
    CHECK(post("teleport").status == 404);
    CHECK(post("set-concurrency", R"({"value":0})").status == 400);
    const auto mark = live->log()->next_seq();
    const auto ok = post("pause");
    CHECK(ok.status == 202);
    CHECK(ok.body.at("accepted") == true);
    live->advance(live->with([](const auto& s) { return s.now(); }) + 2 * small().tick);
    CHECK(get("/api/state").body.at("phase") == "paused");
    // The command is logged before the phase change it causes.
    std::optional<std::uint64_t> cmd, phase;
    for (const auto& e : live->log()->since(mark)) {
        if (!cmd && e.at("type") == "command") cmd = e.at("seq").get<std::uint64_t>();
        if (!phase && e.at("type") == "phase") phase = e.at("seq").get<std::uint64_t>();
    }
    REQUIRE(cmd);
    REQUIRE(phase);
    CHECK(*cmd < *phase);

    CHECK(post("stop-and-drain").status == 202);
    live->advance();
    CHECK(get("/api/state").body.at("phase") == "stopped");
    const auto late = post("resume");
    CHECK(late.status == 409);
    CHECK(late.body.at("error") == "wrong-phase");
}

TEST_CASE("replay API serves a finished log read-only") {
    const auto& events = finished_log();
    ApiService api(events);
    CHECK_FALSE(api.live());
    const auto state = api.handle("GET", "/api/state", {}, "");
    CHECK(state.body.at("live") == false);
    CHECK(state.body.at("phase") == "done");

    const auto denied = api.handle("POST", "/api/commands/pause", {}, "{}");
    CHECK(denied.status == 409);
    CHECK(denied.body.at("error") == "not-live");

    std::int64_t outcomes = 0;
    for (const auto& e : events) outcomes += e.at("type") == "outcome";
    CHECK(static_cast<std::int64_t>(api.handle("GET", "/api/agents", {}, "").body.at("agents").size()) == outcomes);
    const auto metrics = api.handle("GET", "/api/metrics", {}, "").body;
    CHECK(metrics == accounting::to_json(accounting::report_from_log(events)));
    CHECK(api.handle("GET", "/api/targets", {}, "").body.at("statuses").is_null());

    // Paging through the events returns the whole log once.
    std::vector<Json> seen;
    std::uint64_t from = 0;
    while (true) {
        const auto page = api.handle("GET", "/api/events", {{"from", std::to_string(from)}, {"limit", "700"}}, "").body;
        for (const auto& e : page.at("events")) seen.push_back(e);
        from = page.at("next").get<std::uint64_t>();
        if (page.at("closed") == true) break;
    }
    CHECK(seen == events);

    auto gapped = events;
    gapped.erase(gapped.begin() + 5);
    CHECK_THROWS_AS(ApiService{gapped}, Error);
}

TEST_CASE("event stream resumes without gaps") {
    const auto& events = finished_log();
    auto api = std::make_shared<ApiService>(events);
    HttpServer server(api);
    const int port = server.start("127.0.0.1", 0);
    REQUIRE(port > 0);
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(30, 0);

    const auto state = client.Get("/api/state");
    REQUIRE(state);
    CHECK(state->status == 200);
    CHECK(Json::parse(state->body).at("phase") == "done");
    const auto denied = client.Post("/api/commands/pause", "{}", "application/json");
    REQUIRE(denied);
    CHECK(denied->status == 409);

    const auto all = client.Get("/api/stream?from=0");
    REQUIRE(all);
    CHECK(all->get_header_value("Content-Type").find("text/event-stream") != std::string::npos);
    const auto full = parse_sse(all->body);
    CHECK(full == events);

    const std::uint64_t cut = events.size() / 3;
    const auto tail = client.Get("/api/stream?from=" + std::to_string(cut));
    REQUIRE(tail);
    const auto rest = parse_sse(tail->body);
    REQUIRE_FALSE(rest.empty());
    CHECK(rest.front().at("seq") == cut);
    CHECK(rest.size() == events.size() - cut);

    // A reconnecting browser sends the last id it saw.
    const auto again = client.Get("/api/stream", httplib::Headers{{"Last-Event-ID", std::to_string(cut - 1)}});
    REQUIRE(again);
    CHECK(parse_sse(again->body) == rest);
    CHECK(client.Get("/api/stream?from=x")->status == 400);
    server.stop();
}

TEST_CASE("event stream follows a live run to the end") {
    auto live = std::make_shared<LiveRun>(std::make_unique<orchestrator::Simulation>(small(4)));
    auto api = std::make_shared<ApiService>(live);
    HttpServer server(api);
    const int port = server.start("127.0.0.1", 0);
    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(120, 0);

    // Read the first part while the run is still going, then reconnect.
    std::string first;
    live->start(0);
    std::uint64_t cut = 0;
    const auto head = client.Get("/api/stream?from=0", [&](const char* data, std::size_t n) {
        first.append(data, n);
        const auto got = parse_sse(first.substr(0, first.rfind("\n\n") + 2));
        cut = got.empty() ? 0 : got.back().at("seq").get<std::uint64_t>() + 1;
        return cut < 200;
    });
    const auto part = parse_sse(first.substr(0, first.rfind("\n\n") + 2));
    REQUIRE(part.size() >= 200);
    const auto rest = client.Get("/api/stream?from=" + std::to_string(part.size()));
    REQUIRE(rest);
    live->join();
    auto joined = part;
    for (auto& e : parse_sse(rest->body)) joined.push_back(std::move(e));
    const auto logged = live->log()->all();
    CHECK(joined.size() == logged.size());
    CHECK(joined == logged);
    server.stop();
}
