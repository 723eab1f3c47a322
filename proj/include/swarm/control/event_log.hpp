#pragma once

#include "swarm/common/types.hpp"

#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace swarm::control {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Append-only run log. Every event carries `seq` (dense, from 0), `v` (schema
/// version), `type` and `t` (simulated ms). Safe to read while another thread appends.
class EventLog {
public:
    using Sink = std::function<void(const std::string& line)>;

    /// Returns the seq given to the event.
    std::uint64_t append(std::string_view type, SimTime t, Json fields = Json::object());

    std::vector<Json> since(std::uint64_t from) const;
    std::vector<Json> all() const { return since(0); }
    std::uint64_t next_seq() const;
    std::size_t size() const;
    /// Events before `first_seq` were written by an earlier process (resume).
    void start_at(std::uint64_t first_seq);
    std::uint64_t first_seq() const;
    void add_sink(Sink sink);

    /// Blocks until an event with seq >= `seq` exists or the timeout elapses.
    bool wait_for(std::uint64_t seq, std::chrono::milliseconds timeout) const;
    void close();
    bool closed() const;

    std::string jsonl() const;

private:
    mutable std::mutex mutex_;
    mutable std::condition_variable cv_;
    std::vector<Json> events_;
    std::uint64_t first_ = 0;
    std::vector<Sink> sinks_;
    bool closed_ = false;
};

/// One event per line. Throws Error(corrupt_state) on a malformed line, a schema
/// mismatch or, unless `allow_gaps`, a gap in `seq`. Seq must always increase.
std::vector<Json> parse_jsonl(std::string_view text, bool allow_gaps = false);

std::string dump_line(const Json& event);

}  // namespace swarm::control
