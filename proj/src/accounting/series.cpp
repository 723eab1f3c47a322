#include "swarm/accounting/series.hpp"

#include "swarm/common/error.hpp"

#include <sstream>

namespace swarm::accounting {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    auto q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

ShareWindow window_over(const std::vector<agents::AgentRecord>& records, std::size_t first, std::size_t last,
                        bool partial) {
    ShareWindow w{first, last, partial, {}};
    std::array<std::int64_t, 7> tokens{};
    std::int64_t total = 0;
    for (auto i = first; i < last; ++i) {
        const auto& r = records[i];
        const auto t = r.tokens_in + r.tokens_out;
        tokens[static_cast<std::size_t>(r.outcome)] += t;
        total += t;
    }
    if (total > 0) {
        for (std::size_t k = 0; k < tokens.size(); ++k)
            w.share[k] = static_cast<double>(tokens[k]) / static_cast<double>(total);
    }
    return w;
}

}  // namespace

void Histogram::add(std::int64_t value) {
    bins[floor_div(value, width) * width] += 1;
    total += 1;
}

Series build_series(const std::vector<MergePoint>& merges, const std::vector<agents::AgentRecord>& records,
                    const SeriesOptions& o) {
    if (o.window == 0 || o.stride == 0 || o.line_bin <= 0 || o.net_bin <= 0) {
        throw Error(Errc::invalid_argument, "series window, stride and bins must be positive");
    }
    Series s;
    s.added.width = s.removed.width = o.line_bin;
    s.net.width = o.net_bin;
    for (auto* rc : {&s.prover, &s.maintainer}) rc->code_net.width = rc->coordination_net.width = o.net_bin;

    std::int64_t added = 0, removed = 0;
    for (const auto& m : merges) {
        added += m.stat.added;
        removed += m.stat.removed;
        s.merge_time.push_back(m.time);
        s.cumulative_added.push_back(added);
        s.cumulative_removed.push_back(removed);
        s.decls.push_back(m.decls);
        s.proved.push_back(m.proved);
        s.added.add(m.stat.added);
        s.removed.add(m.stat.removed);
        s.net.add(m.stat.added - m.stat.removed);
    }

    s.window = o.window;
    const auto n = records.size();
    if (n < o.window) {
        if (n > 0) s.shares.push_back(window_over(records, 0, n, true));
    } else {
        std::size_t last = o.window;
        for (; last <= n; last += o.stride) s.shares.push_back(window_over(records, last - o.window, last, false));
        if (s.shares.back().last != n) s.shares.push_back(window_over(records, n - o.window, n, false));
    }

    for (const auto& r : records) {
        if (r.outcome != agents::Outcome::merged) continue;
        RoleChange* rc = r.role == agents::Role::prover       ? &s.prover
                         : r.role == agents::Role::maintainer ? &s.maintainer
                                                              : nullptr;
        if (!rc) continue;
        rc->code_files.add(r.files_touched.code);
        rc->coordination_files.add(r.files_touched.coordination);
        rc->code_net.add(r.code_net);
        rc->coordination_net.add(r.coordination_net);
    }
    return s;
}

Json to_json(const Histogram& h) {
    Json bins = Json::array();
    for (const auto& [lo, c] : h.bins) bins.push_back(Json::array({lo, c}));
    return Json{{"width", h.width}, {"total", h.total}, {"bins", bins}};
}

namespace {

Json role_change_json(const RoleChange& rc) {
    return Json{{"code_files", to_json(rc.code_files)},
                {"coordination_files", to_json(rc.coordination_files)},
                {"code_net", to_json(rc.code_net)},
                {"coordination_net", to_json(rc.coordination_net)}};
}

void histogram_rows(std::ostringstream& os, const std::string& name, const Histogram& h) {
    for (const auto& [lo, c] : h.bins) os << name << "," << lo << "," << lo + h.width << "," << c << "\n";
}

}  // namespace

Json to_json(const Series& s) {
    Json shares = Json::array();
    for (const auto& w : s.shares) {
        Json share = Json::object();
        for (std::size_t k = 0; k < agents::kAllOutcomes.size(); ++k)
            share[std::string(agents::outcome_name(agents::kAllOutcomes[k]))] = w.share[k];
        shares.push_back(Json{{"first", w.first}, {"last", w.last}, {"partial", w.partial}, {"share", share}});
    }
    Json gaps = Json::array();
    for (const auto& g : s.gaps) gaps.push_back(Json{{"after_seq", g.after_seq}, {"next_seq", g.next_seq}});
    return Json{{"merge_time", s.merge_time},
                {"cumulative_added", s.cumulative_added},
                {"cumulative_removed", s.cumulative_removed},
                {"decls", s.decls},
                {"proved", s.proved},
                {"window", s.window},
                {"shares", shares},
                {"added", to_json(s.added)},
                {"removed", to_json(s.removed)},
                {"net", to_json(s.net)},
                {"prover", role_change_json(s.prover)},
                {"maintainer", role_change_json(s.maintainer)},
                {"gaps", gaps}};
}

std::map<std::string, std::string> series_csv(const Series& s) {
    std::map<std::string, std::string> out;
    {
        std::ostringstream os;
        os << "merge,time_ms,cumulative_added,cumulative_removed,decls,proved\n";
        for (std::size_t i = 0; i < s.merge_time.size(); ++i) {
            os << i + 1 << "," << s.merge_time[i] << "," << s.cumulative_added[i] << "," << s.cumulative_removed[i]
               << "," << s.decls[i] << "," << s.proved[i] << "\n";
        }
        out["churn"] = os.str();
    }
    {
        std::ostringstream os;
        os << "first,last,partial";
        for (auto o : agents::kAllOutcomes) os << "," << agents::outcome_name(o);
        os << "\n";
        for (const auto& w : s.shares) {
            os << w.first << "," << w.last << "," << (w.partial ? 1 : 0);
            for (auto v : w.share) os << "," << v;
            os << "\n";
        }
        out["shares"] = os.str();
    }
    {
        std::ostringstream os;
        os << "series,lo,hi,count\n";
        histogram_rows(os, "added", s.added);
        histogram_rows(os, "removed", s.removed);
        histogram_rows(os, "net", s.net);
        out["lines"] = os.str();
    }
    {
        std::ostringstream os;
        os << "series,lo,hi,count\n";
        for (const auto& [role, rc] : {std::pair<std::string, const RoleChange*>{"prover", &s.prover},
                                       std::pair<std::string, const RoleChange*>{"maintainer", &s.maintainer}}) {
            histogram_rows(os, role + ".code_files", rc->code_files);
            histogram_rows(os, role + ".coordination_files", rc->coordination_files);
            histogram_rows(os, role + ".code_net", rc->code_net);
            histogram_rows(os, role + ".coordination_net", rc->coordination_net);
        }
        out["role_changes"] = os.str();
    }
    return out;
}

}  // namespace swarm::accounting
