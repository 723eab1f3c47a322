#include "swarm/control/event_log.hpp"

#include "swarm/common/error.hpp"

namespace swarm::control {

std::string dump_line(const Json& event) { return event.dump() + "\n"; }

std::uint64_t EventLog::append(std::string_view type, SimTime t, Json fields) {
    std::vector<Sink> sinks;
    std::string line;
    std::uint64_t seq = 0;
    {
        std::lock_guard lock(mutex_);
        seq = first_ + events_.size();
        fields["seq"] = seq;
        fields["v"] = kSchemaVersion;
        fields["type"] = std::string(type);
        fields["t"] = t;
        events_.push_back(std::move(fields));
        if (!sinks_.empty()) {
            line = dump_line(events_.back());
            sinks = sinks_;
        }
    }
    for (auto& s : sinks) s(line);
    cv_.notify_all();
    return seq;
}

std::vector<Json> EventLog::since(std::uint64_t from) const {
    std::lock_guard lock(mutex_);
    std::vector<Json> out;
    const auto start = from > first_ ? from - first_ : 0;
    for (std::size_t i = static_cast<std::size_t>(start); i < events_.size(); ++i) out.push_back(events_[i]);
    return out;
}

std::uint64_t EventLog::next_seq() const {
    std::lock_guard lock(mutex_);
    return first_ + events_.size();
}

std::size_t EventLog::size() const {
    std::lock_guard lock(mutex_);
    return events_.size();
}

void EventLog::start_at(std::uint64_t first_seq) {
    std::lock_guard lock(mutex_);
    if (!events_.empty()) throw Error(Errc::invalid_argument, "log already has events");
    first_ = first_seq;
}

std::uint64_t EventLog::first_seq() const {
    std::lock_guard lock(mutex_);
    return first_;
}

void EventLog::add_sink(Sink sink) {
    std::lock_guard lock(mutex_);
    sinks_.push_back(std::move(sink));
}

bool EventLog::wait_for(std::uint64_t seq, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return cv_.wait_for(lock, timeout, [&] { return first_ + events_.size() > seq || closed_; }) &&
           first_ + events_.size() > seq;
}

void EventLog::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

bool EventLog::closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
}

std::string EventLog::jsonl() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& e : events_) out += dump_line(e);
    return out;
}

std::vector<Json> parse_jsonl(std::string_view text, bool allow_gaps) {
    std::vector<Json> out;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::exception& e) {
            throw Error(Errc::corrupt_state, "log line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("seq") || !j.contains("type") || !j.contains("v")) {
            throw Error(Errc::corrupt_state, "log line " + std::to_string(line_no) + " is not an event");
        }
        if (j.at("v") != kSchemaVersion) {
            throw Error(Errc::corrupt_state, "log line " + std::to_string(line_no) + " has schema version " +
                                                 j.at("v").dump());
        }
        const auto seq = j.at("seq").get<std::uint64_t>();
        const auto expect = out.empty() ? seq : out.back().at("seq").get<std::uint64_t>() + 1;
        if (allow_gaps ? seq < expect : seq != expect) {
            throw Error(Errc::corrupt_state, "log line " + std::to_string(line_no) + " breaks the seq order");
        }
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace swarm::control
