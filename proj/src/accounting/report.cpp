#include "swarm/accounting/report.hpp"

#include "swarm/common/error.hpp"

namespace swarm::accounting {

namespace {

bool same_sums(const TableRow& a, const TableRow& b) {
    return a.count == b.count && a.tokens_in == b.tokens_in && a.tokens_out == b.tokens_out && a.turns == b.turns;
}

TableRow row_sum(const Table& t) {
    TableRow s;
    for (const auto& r : t.rows) {
        s.count += r.count;
        s.tokens_in += r.tokens_in;
        s.tokens_out += r.tokens_out;
        s.turns += r.turns;
    }
    return s;
}

Json row_json(const TableRow& r) {
    return Json{{"label", r.label},     {"count", r.count}, {"tokens_in", r.tokens_in},
                {"tokens_out", r.tokens_out}, {"turns", r.turns}, {"cells", render_cells(r)}};
}

vcs::DiffStat stat_from_json(const Json& j) {
    auto g = [&](const char* k) { return j.at(k).get<std::int64_t>(); };
    return vcs::DiffStat{g("added"), g("removed"), g("code_files"), g("coordination_files"), g("code_net"),
                         g("coordination_net")};
}

}  // namespace

RunReport build_report(const ReportInput& in, const SeriesOptions& options) {
    RunReport r;
    r.seed = in.seed;
    r.phase = in.phase;
    r.sim_time = in.sim_time;
    r.targets = in.targets;
    r.obligations = in.obligations;
    r.proved = in.proved;
    r.spawned = in.spawned;
    r.agents = static_cast<std::int64_t>(in.records.size());
    r.merges = static_cast<std::int64_t>(in.merges.size());
    for (const auto& m : in.merges) r.merges_main_ok += m.main_ok ? 1 : 0;
    r.by_role = aggregate(in.records, GroupBy::role);
    r.by_outcome = aggregate(in.records, GroupBy::outcome);
    r.series = build_series(in.merges, in.records, options);
    r.series.gaps = in.gaps;
    return r;
}

ReportInput input_from_log(const std::vector<Json>& events) {
    ReportInput in;
    bool started = false;
    std::optional<std::uint64_t> prev;
    try {
        for (const auto& e : events) {
            const auto seq = e.at("seq").get<std::uint64_t>();
            if (!prev && seq > 0) in.gaps.push_back(Gap{0, seq});
            if (prev && seq != *prev + 1) in.gaps.push_back(Gap{*prev, seq});
            prev = seq;
            in.sim_time = e.at("t").get<SimTime>();
            const auto type = e.at("type").get<std::string>();
            if (type == "run_started") {
                started = true;
                in.seed = e.at("seed").get<std::uint64_t>();
                in.targets = e.at("targets").get<std::int64_t>();
                in.obligations = e.at("obligations").get<std::int64_t>();
                in.proved = e.value("proved", std::int64_t{0});
                in.phase = "running";
            } else if (type == "phase") {
                in.phase = e.at("to").get<std::string>();
            } else if (type == "spawn") {
                in.spawned += 1;
            } else if (type == "outcome") {
                in.records.push_back(agents::record_from_json(e.at("record")));
            } else if (type == "merge") {
                MergePoint m;
                m.pr = e.at("pr").get<std::uint64_t>();
                m.time = e.at("t").get<SimTime>();
                m.role = agents::parse_role(e.at("role").get<std::string>()).value();
                m.main_ok = e.at("main_ok").get<bool>();
                m.stat = stat_from_json(e.at("stat"));
                m.decls = e.at("decls").get<std::int64_t>();
                m.sorries = e.at("sorries").get<std::int64_t>();
                m.proved = e.at("proved_targets").get<std::int64_t>();
                in.proved = m.proved;
                in.merges.push_back(m);
            }
        }
    } catch (const Json::exception& ex) {
        throw Error(Errc::corrupt_state, std::string("malformed event: ") + ex.what());
    } catch (const std::bad_optional_access&) {
        throw Error(Errc::corrupt_state, "malformed event: unknown role");
    }
    if (!started && (events.empty() || events.front().at("seq").get<std::uint64_t>() == 0)) {
        throw Error(Errc::corrupt_state, "log has no run_started event");
    }
    return in;
}

RunReport report_from_log(const std::vector<Json>& events, const SeriesOptions& options) {
    return build_report(input_from_log(events), options);
}

bool conserved(const RunReport& r) {
    return same_sums(r.by_role.total, r.by_outcome.total) && same_sums(row_sum(r.by_role), r.by_role.total) &&
           same_sums(row_sum(r.by_outcome), r.by_outcome.total) && r.by_role.total.count == r.agents;
}

Json to_json(const Table& t) {
    Json rows = Json::array();
    for (const auto& r : t.rows) rows.push_back(row_json(r));
    return Json{{"key", t.key}, {"header", table_header(t)}, {"rows", rows}, {"total", row_json(t.total)}};
}

Json to_json(const RunReport& r) {
    return Json{{"seed", r.seed},
                {"phase", r.phase},
                {"sim_time", r.sim_time},
                {"targets", r.targets},
                {"obligations", r.obligations},
                {"proved", r.proved},
                {"spawned", r.spawned},
                {"agents", r.agents},
                {"merges", r.merges},
                {"merges_main_ok", r.merges_main_ok},
                {"conserved", conserved(r)},
                {"by_role", to_json(r.by_role)},
                {"by_outcome", to_json(r.by_outcome)},
                {"series", to_json(r.series)}};
}

std::map<std::string, std::string> report_files(const RunReport& r) {
    std::map<std::string, std::string> out;
    out["report.json"] = to_json(r).dump(2) + "\n";
    out["by_role.csv"] = render_csv(r.by_role);
    out["by_outcome.csv"] = render_csv(r.by_outcome);
    for (auto& [stem, text] : series_csv(r.series)) out[stem + ".csv"] = std::move(text);
    return out;
}

}  // namespace swarm::accounting
