#pragma once

#include "swarm/accounting/ledger.hpp"
#include "swarm/accounting/series.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace swarm::accounting {

struct ReportInput {
    std::uint64_t seed = 0;
    std::string phase;
    SimTime sim_time = 0;
    std::int64_t targets = 0;
    std::int64_t obligations = 0;
    std::int64_t proved = 0;
    std::int64_t spawned = 0;
    std::vector<agents::AgentRecord> records;
    std::vector<MergePoint> merges;
    std::vector<Gap> gaps;
};

struct RunReport {
    std::uint64_t seed = 0;
    std::string phase;
    SimTime sim_time = 0;
    std::int64_t targets = 0;
    std::int64_t obligations = 0;
    std::int64_t proved = 0;
    std::int64_t spawned = 0;
    std::int64_t agents = 0;
    std::int64_t merges = 0;
    std::int64_t merges_main_ok = 0;
    Table by_role;
    Table by_outcome;
    Series series;

    bool operator==(const RunReport&) const = default;
};

RunReport build_report(const ReportInput& input, const SeriesOptions& options = {});

/// Rebuilds the report from a run's events alone. Seq gaps become gap markers.
/// Throws Error(corrupt_state) when the log has no run_started event.
RunReport report_from_log(const std::vector<Json>& events, const SeriesOptions& options = {});
ReportInput input_from_log(const std::vector<Json>& events);

/// By-role total, by-outcome total and the row sums all agree.
bool conserved(const RunReport& r);

Json to_json(const Table& t);
Json to_json(const RunReport& r);

/// Output files by name: report.json, by_role.csv, by_outcome.csv and the series tables.
std::map<std::string, std::string> report_files(const RunReport& r);

}  // namespace swarm::accounting
