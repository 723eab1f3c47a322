#pragma once

#include "swarm/agents/roles.hpp"
#include "swarm/vcs/diff.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace swarm::accounting {

using Json = nlohmann::json;

/// One advance of main as seen by accounting.
struct MergePoint {
    std::uint64_t pr = 0;
    SimTime time = 0;
    agents::Role role = agents::Role::prover;
    bool main_ok = false;
    vcs::DiffStat stat;
    std::int64_t decls = 0;
    std::int64_t sorries = 0;
    std::int64_t proved = 0;

    bool operator==(const MergePoint&) const = default;
};

/// Fixed-width bins keyed by their lower edge.
struct Histogram {
    std::int64_t width = 1;
    std::map<std::int64_t, std::int64_t> bins;
    std::int64_t total = 0;

    void add(std::int64_t value);
    bool operator==(const Histogram&) const = default;
};

struct ShareWindow {
    std::size_t first = 0;  // agent indices in completion order, [first, last)
    std::size_t last = 0;
    bool partial = false;   // fewer agents than the window size
    std::array<double, 7> share{};  // token share by outcome, in kAllOutcomes order

    bool operator==(const ShareWindow&) const = default;
};

/// Distributions over one authoring role's merged PRs.
struct RoleChange {
    Histogram code_files;
    Histogram coordination_files;
    Histogram code_net;
    Histogram coordination_net;

    bool operator==(const RoleChange&) const = default;
};

struct Gap {
    std::uint64_t after_seq = 0;
    std::uint64_t next_seq = 0;

    bool operator==(const Gap&) const = default;
};

struct SeriesOptions {
    std::size_t window = 400;
    std::size_t stride = 100;
    std::int64_t line_bin = 10;
    std::int64_t net_bin = 10;
};

struct Series {
    std::vector<SimTime> merge_time;
    std::vector<std::int64_t> cumulative_added;
    std::vector<std::int64_t> cumulative_removed;
    std::vector<std::int64_t> decls;
    std::vector<std::int64_t> proved;

    std::size_t window = 0;
    std::vector<ShareWindow> shares;

    Histogram added;
    Histogram removed;
    Histogram net;
    RoleChange prover;
    RoleChange maintainer;

    std::vector<Gap> gaps;

    bool operator==(const Series&) const = default;
};

/// Line histograms cover every merge. Role distributions cover merged authors of that role.
Series build_series(const std::vector<MergePoint>& merges, const std::vector<agents::AgentRecord>& records,
                    const SeriesOptions& options = {});

Json to_json(const Histogram& h);
Json to_json(const Series& s);

/// CSV tables keyed by file stem: churn, shares, lines, role_changes.
std::map<std::string, std::string> series_csv(const Series& s);

}  // namespace swarm::accounting
