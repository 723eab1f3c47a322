#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace swarm {

/// Simulated time in milliseconds since run start.
using SimTime = std::int64_t;

constexpr SimTime seconds(double s) { return static_cast<SimTime>(s * 1000.0); }

struct AgentId {
    std::uint64_t value = 0;

    auto operator<=>(const AgentId&) const = default;
    std::string str() const { return "agent-" + std::to_string(value); }
};

/// Pseudo-agent that owns writes to main.
inline constexpr AgentId kMergeQueue{0};
/// Pseudo-agent for operator-filed changes.
inline constexpr AgentId kOperator{1};
/// First id handed out to real agent sessions.
inline constexpr std::uint64_t kFirstAgentId = 100;

AgentId parse_agent_id(const std::string& text);

struct PrId {
    std::uint64_t value = 0;

    auto operator<=>(const PrId&) const = default;
    std::string str() const { return "pr-" + std::to_string(value); }
};

PrId parse_pr_id(const std::string& text);

}  // namespace swarm

template <>
struct std::hash<swarm::AgentId> {
    std::size_t operator()(const swarm::AgentId& id) const noexcept { return std::hash<std::uint64_t>{}(id.value); }
};
