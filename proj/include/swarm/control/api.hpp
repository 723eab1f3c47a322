#pragma once

#include "swarm/control/event_log.hpp"
#include "swarm/orchestrator/simulation.hpp"

#include <json.hpp>

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace swarm::control {

/// A simulation plus the lock that API readers take. Either driven by `advance`
/// from the caller's thread or by a background thread after `start`.
class LiveRun {
public:
    explicit LiveRun(std::unique_ptr<orchestrator::Simulation> sim);
    ~LiveRun();
    LiveRun(const LiveRun&) = delete;
    LiveRun& operator=(const LiveRun&) = delete;

    /// Runs until finished. `pace` is simulated ms per wall ms; 0 runs flat out.
    void start(double pace = 0);
    void stop();
    void join();
    void advance(std::optional<SimTime> until = std::nullopt);

    template <class F>
    auto with(F&& f) const {
        std::lock_guard lock(mutex_);
        return f(static_cast<const orchestrator::Simulation&>(*sim_));
    }
    orchestrator::CommandResult submit(orchestrator::OperatorCommand cmd);
    std::shared_ptr<EventLog> log() const { return log_; }
    bool finished() const;

private:
    mutable std::mutex mutex_;
    std::unique_ptr<orchestrator::Simulation> sim_;
    std::shared_ptr<EventLog> log_;
    std::thread thread_;
    std::atomic<bool> stop_{false};
};

struct ApiResponse {
    int status = 200;
    Json body;
};

using Query = std::map<std::string, std::string>;

/// Endpoints, all JSON:
///
///   GET  /api/state                      phase, clock, capacity, counts
///   GET  /api/agents?role=&outcome=&state=   finished and live sessions
///   GET  /api/queue                      merge queue entries and PRs in review
///   GET  /api/issues?status=&kind=
///   GET  /api/targets
///   GET  /api/metrics                    the run report with tables and series
///   GET  /api/events?from=N&limit=M      a page of the event log
///   GET  /api/stream?from=N              server-sent events (HTTP server only)
///   POST /api/commands/<name>            pause, resume, stop-and-drain, stop,
///                                        set-concurrency, set-batch-size,
///                                        spawn-status, create-issue
///
/// Errors carry {"error": <code>, "message": ...}. Writes against a loaded log are
/// rejected with 409 "not-live"; malformed bodies get 400 "invalid-argument".
class ApiService {
public:
    explicit ApiService(std::shared_ptr<LiveRun> live);
    /// Read-only service over a finished or partial log. Seq numbers must be consecutive.
    explicit ApiService(std::vector<Json> events);

    bool live() const { return live_ != nullptr; }
    std::shared_ptr<EventLog> log() const { return log_; }
    ApiResponse handle(const std::string& method, const std::string& path, const Query& query,
                       const std::string& body) const;

private:
    ApiResponse get(const std::string& path, const Query& q) const;
    ApiResponse post(const std::string& path, const std::string& body) const;
    Json replay_state() const;

    std::shared_ptr<LiveRun> live_;
    std::shared_ptr<EventLog> log_;
};

ApiResponse api_error(int status, Errc code, const std::string& message);

/// Formats one event as a server-sent-events frame (id, event, data).
std::string sse_frame(const Json& event);

/// HTTP front end for an ApiService.
class HttpServer {
public:
    explicit HttpServer(std::shared_ptr<ApiService> api);
    ~HttpServer();

    /// Binds and serves on a background thread. Port 0 picks a free port. Returns the port.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    void stop();
    /// Serves on the calling thread until stop().
    void run(const std::string& host, int port);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace swarm::control
