#include "support/token_tables.hpp"

#include "swarm/control/event_log.hpp"

#include <algorithm>
#include <stdexcept>

namespace swarm::testing {

using control::Json;

namespace {

using i128 = __int128;

PrintedRow row(std::string label, std::array<std::string, 8> cells) { return {std::move(label), std::move(cells)}; }

struct Range {
    std::int64_t lo = 0;
    std::int64_t hi = -1;
    bool empty() const { return hi < lo; }
    Range operator&(const Range& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }
    std::int64_t mid() const { return lo + (hi - lo) / 2; }
};

std::int64_t ceil_div(i128 n, i128 d) {
    i128 q = n / d;
    if (n % d != 0 && n > 0) ++q;
    return static_cast<std::int64_t>(q);
}

// Integers v with round(v / scale, decimals) printed as `cell`, half away from zero.
Range shown_as(const std::string& cell, i128 scale) {
    const auto dot = cell.find('.');
    const int decimals = dot == std::string::npos ? 0 : static_cast<int>(cell.size() - dot - 1);
    std::string digits = cell;
    if (dot != std::string::npos) digits.erase(dot, 1);
    const i128 x = std::stoll(digits);
    i128 p = 1;
    for (int i = 0; i < decimals; ++i) p *= 10;
    const auto lo = ceil_div((2 * x - 1) * scale, 2 * p);
    const auto hi = ceil_div((2 * x + 1) * scale, 2 * p) - 1;
    return {std::max<std::int64_t>(lo, 0), hi};
}

std::int64_t count_of(const PrintedRow& r) { return std::stoll(r.cells[0]); }

struct Bounds {
    Range in, out, total, turns;
};

Bounds bounds(const PrintedRow& r, std::int64_t count) {
    Bounds b;
    const i128 n = count;
    b.in = shown_as(r.cells[1], 1'000'000) & shown_as(r.cells[4], n * 1000);
    b.out = shown_as(r.cells[2], 1'000'000) & shown_as(r.cells[5], n * 1000);
    b.total = shown_as(r.cells[3], 1'000'000);
    const auto turns = std::stoll(r.cells[6]);
    b.turns = Range{turns, turns} & shown_as(r.cells[7], n);
    return b;
}

// Values inside [lo_i, hi_i] that add up to `sum`.
std::vector<std::int64_t> distribute(const std::vector<Range>& r, std::int64_t sum) {
    std::vector<std::int64_t> v;
    std::int64_t left = sum;
    for (const auto& x : r) {
        v.push_back(x.lo);
        left -= x.lo;
    }
    for (std::size_t i = 0; i < r.size() && left > 0; ++i) {
        const auto add = std::min(left, r[i].hi - r[i].lo);
        v[i] += add;
        left -= add;
    }
    return v;
}

Range sum_of(const std::vector<Range>& r) {
    Range s{0, 0};
    for (const auto& x : r) {
        s.lo += x.lo;
        s.hi += x.hi;
    }
    return s;
}

}  // namespace

const PrintedTable& token_table_by_role() {
    static const PrintedTable t{
        accounting::GroupBy::role,
        {
            row("Sketcher", {"85", "6", "0.0", "6", "71", "0.4", "5084", "59.8"}),
            row("Prover", {"8704", "25012", "194.2", "25206", "2874", "22.3", "435471", "50.0"}),
            row("Maintainer", {"6467", "44770", "277.1", "45047", "6923", "42.9", "814363", "125.9"}),
            row("Math Reviewer", {"6797", "3759", "42.9", "3802", "553", "6.3", "147753", "21.7"}),
            row("Eng. Reviewer", {"6805", "1542", "20.7", "1563", "227", "3.0", "86118", "12.7"}),
            row("Triage", {"550", "2747", "13.1", "2760", "4994", "23.8", "68827", "125.1"}),
            row("Scan", {"307", "4395", "9.6", "4405", "14317", "31.3", "72170", "235.1"}),
            row("Progress", {"331", "944", "3.4", "948", "2853", "10.4", "15488", "46.8"}),
        },
        row("Total", {"30046", "83176", "561.2", "83737", "2768", "18.7", "1645274", "54.8"}),
    };
    return t;
}

const PrintedTable& token_table_by_outcome() {
    static const PrintedTable t{
        accounting::GroupBy::outcome,
        {
            row("Merged", {"3490", "16477", "96.4", "16574", "4721", "27.6", "299143", "85.7"}),
            row("Approved", {"589", "1298", "7.2", "1305", "2203", "12.2", "20832", "35.4"}),
            row("Max Revisions", {"976", "6935", "46.5", "6981", "7105", "47.7", "131609", "134.8"}),
            row("Max Iterations", {"11", "101", "0.8", "102", "9216", "70.4", "1408", "128.0"}),
            row("No PR", {"14192", "7448", "76.4", "7524", "525", "5.4", "259003", "18.2"}),
            row("No PR (blocked)", {"4668", "8012", "55.8", "8068", "1716", "12.0", "146026", "31.3"}),
            row("Aborted", {"6120", "42904", "278.0", "43182", "7011", "45.4", "787253", "128.6"}),
        },
        row("Total", {"29691", "80686", "542.7", "81228", "2718", "18.3", "1605312", "54.1"}),
    };
    return t;
}

Solution solve(const PrintedTable& t) {
    Solution s;
    std::vector<Range> in, out_free, total;
    auto fail = [&](std::string what) { s.conflicts.push_back(std::move(what)); };

    std::int64_t count_sum = 0, turns_sum = 0;
    for (const auto& r : t.rows) {
        const auto c = count_of(r);
        const auto b = bounds(r, c);
        if (b.turns.empty()) fail(r.label + ": turns and average turns disagree");
        // Room left for the input once the output takes its share of the total.
        const Range in_fit = b.in & Range{b.total.lo - b.out.hi, b.total.hi - b.out.lo};
        if (in_fit.empty() || b.out.empty()) {
            fail(r.label + ": no token split displays as printed");
            s.rows.clear();
            return s;
        }
        in.push_back(in_fit);
        out_free.push_back(b.out);
        total.push_back(b.total);
        s.rows.push_back(RowSums{c, 0, 0, b.turns.lo});
        count_sum += c;
        turns_sum += b.turns.lo;
    }

    const auto total_count = count_of(t.total);
    if (count_sum != total_count) {
        fail("total count " + std::to_string(total_count) + " but rows sum to " + std::to_string(count_sum));
    }
    const auto tb = bounds(t.total, count_sum);
    if (tb.turns.empty() || tb.turns.lo != turns_sum) {
        fail("total turns " + t.total.cells[6] + " but rows sum to " + std::to_string(turns_sum));
    }

    auto out_given = [&](std::size_t i, std::int64_t in_i) {
        return out_free[i] & Range{total[i].lo - in_i, total[i].hi - in_i};
    };

    Range sin = sum_of(in) & tb.in;
    const Range sout_free = sum_of(out_free) & tb.out;
    sin = sin & Range{tb.total.lo - sout_free.hi, tb.total.hi - sout_free.lo};
    if (sin.empty() || sout_free.empty()) fail("total tokens cannot display as printed");

    const bool fit_total = s.conflicts.empty();
    std::vector<std::int64_t> in_v;
    if (fit_total) {
        in_v = distribute(in, sin.mid());
    } else {
        for (const auto& r : in) in_v.push_back(r.mid());
    }
    std::vector<Range> out;
    for (std::size_t i = 0; i < in.size(); ++i) out.push_back(out_given(i, in_v[i]));
    std::vector<std::int64_t> out_v;
    if (fit_total) {
        const Range sout = sum_of(out) & tb.out & Range{tb.total.lo - sin.mid(), tb.total.hi - sin.mid()};
        if (sout.empty()) {
            fail("total output cannot display as printed");
        } else {
            out_v = distribute(out, sout.mid());
        }
    }
    if (out_v.empty()) {
        for (const auto& r : out) out_v.push_back(r.mid());
    }
    for (std::size_t i = 0; i < s.rows.size(); ++i) {
        s.rows[i].tokens_in = in_v[i];
        s.rows[i].tokens_out = out_v[i];
    }
    return s;
}

std::string fixture_log(const PrintedTable& t, const Solution& s) {
    if (s.rows.size() != t.rows.size()) throw std::invalid_argument("solution does not cover the table");
    control::EventLog log;
    log.append("run_started", 0,
               Json{{"seed", 0}, {"targets", 0}, {"obligations", 0}, {"proved", 0}, {"main", ""}});
    std::uint64_t id = kFirstAgentId;
    SimTime now = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& label = t.rows[i].label;
        agents::AgentRecord rec;
        rec.task = "fixture";
        bool found = false;
        if (t.key == accounting::GroupBy::role) {
            rec.outcome = agents::Outcome::merged;
            for (auto r : agents::kAllRoles) {
                if (agents::role_label(r) == label) rec.role = r, found = true;
            }
        } else {
            rec.role = agents::Role::prover;
            for (auto o : agents::kAllOutcomes) {
                if (agents::outcome_label(o) == label) rec.outcome = o, found = true;
            }
        }
        if (!found) throw std::invalid_argument("unknown row label " + label);
        const auto& sum = s.rows[i];
        for (std::int64_t k = 0; k < sum.count; ++k) {
            auto share = [&](std::int64_t total) { return total / sum.count + (k < total % sum.count ? 1 : 0); };
            rec.id = AgentId{id++};
            rec.tokens_in = share(sum.tokens_in);
            rec.tokens_out = share(sum.tokens_out);
            rec.turns = share(sum.turns);
            rec.start = now;
            rec.end = ++now;
            log.append("outcome", now, Json{{"agent", rec.id.value}, {"record", agents::to_json(rec)}});
        }
    }
    return log.jsonl();
}

std::vector<std::string> cell_mismatches(const PrintedTable& want, const accounting::Table& got) {
    std::vector<std::string> out;
    const auto header = accounting::table_header(got);
    auto compare = [&](const PrintedRow& w, const accounting::TableRow& g) {
        if (w.label != g.label) out.push_back(w.label + "/label: " + g.label);
        const auto cells = accounting::render_cells(g);
        for (std::size_t c = 0; c < w.cells.size(); ++c) {
            if (cells[c] != w.cells[c]) out.push_back(w.label + "/" + header[c + 1] + ": " + cells[c] + " vs " + w.cells[c]);
        }
    };
    if (got.rows.size() != want.rows.size()) {
        out.push_back("row count " + std::to_string(got.rows.size()) + " vs " + std::to_string(want.rows.size()));
    }
    for (std::size_t i = 0; i < std::min(got.rows.size(), want.rows.size()); ++i) compare(want.rows[i], got.rows[i]);
    compare(want.total, got.total);
    return out;
}

}  // namespace swarm::testing
