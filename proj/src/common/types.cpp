#include "swarm/common/types.hpp"

#include "swarm/common/error.hpp"

#include <charconv>

namespace swarm {

namespace {

std::uint64_t parse_suffix(const std::string& text, std::string_view prefix) {
    if (text.size() <= prefix.size() || text.compare(0, prefix.size(), prefix) != 0) {
        throw Error(Errc::invalid_argument, "expected id of form " + std::string(prefix) + "N, got '" + text + "'");
    }
    std::uint64_t value = 0;
    const char* first = text.data() + prefix.size();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw Error(Errc::invalid_argument, "malformed id '" + text + "'");
    }
    return value;
}

}  // namespace

AgentId parse_agent_id(const std::string& text) { return AgentId{parse_suffix(text, "agent-")}; }

PrId parse_pr_id(const std::string& text) { return PrId{parse_suffix(text, "pr-")}; }

}  // namespace swarm
