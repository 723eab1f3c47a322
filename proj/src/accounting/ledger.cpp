#include "swarm/accounting/ledger.hpp"

#include <cstdlib>
#include <map>
#include <sstream>

namespace swarm::accounting {

namespace {

void add(TableRow& row, const agents::AgentRecord& r) {
    row.count += 1;
    row.tokens_in += r.tokens_in;
    row.tokens_out += r.tokens_out;
    row.turns += r.turns;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Table aggregate(const std::vector<agents::AgentRecord>& records, GroupBy key) {
    Table t;
    t.key = key == GroupBy::role ? "role" : "outcome";
    t.total.label = "Total";
    std::map<int, TableRow> groups;
    for (const auto& r : records) {
        const int k = key == GroupBy::role ? static_cast<int>(r.role) : static_cast<int>(r.outcome);
        add(groups[k], r);
        add(t.total, r);
    }
    for (auto& [k, row] : groups) {
        row.label = key == GroupBy::role ? std::string(agents::role_label(static_cast<agents::Role>(k)))
                                         : std::string(agents::outcome_label(static_cast<agents::Outcome>(k)));
        t.rows.push_back(row);
    }
    return t;
}

std::string format_ratio(std::int64_t num, std::int64_t den, int decimals) {
    if (den == 0) return "-";
    if (den < 0) {
        num = -num;
        den = -den;
    }
    __int128 scale = 1;
    for (int i = 0; i < decimals; ++i) scale *= 10;
    const bool neg = num < 0;
    const __int128 n = static_cast<__int128>(neg ? -num : num) * scale;
    __int128 q = n / den;
    if ((n % den) * 2 >= den) q += 1;
    const auto whole = static_cast<std::int64_t>(q / scale);
    auto frac = static_cast<std::int64_t>(q % scale);
    std::string out = (neg && q != 0 ? "-" : "") + std::to_string(whole);
    if (decimals > 0) {
        std::string f = std::to_string(frac);
        out += "." + std::string(static_cast<std::size_t>(decimals) - f.size(), '0') + f;
    }
    return out;
}

std::vector<std::string> render_cells(const TableRow& row) {
    constexpr std::int64_t M = 1'000'000, K = 1'000;
    return {std::to_string(row.count),
            format_ratio(row.tokens_in, M, 0),
            format_ratio(row.tokens_out, M, 1),
            format_ratio(row.tokens_total(), M, 0),
            format_ratio(row.tokens_in, row.count * K, 0),
            format_ratio(row.tokens_out, row.count * K, 1),
            std::to_string(row.turns),
            format_ratio(row.turns, row.count, 1)};
}

std::vector<std::string> table_header(const Table& t) {
    return {t.key == "role" ? "Role" : "Outcome", "Count", "In (M)", "Out (M)", "Total (M)",
            "Avg In (K)", "Avg Out (K)", "Turns", "Avg Turns"};
}

std::string render_csv(const Table& t) {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << csv_field(cells[i]);
        os << "\n";
    };
    line(table_header(t));
    for (const auto& r : t.rows) {
        auto cells = render_cells(r);
        cells.insert(cells.begin(), r.label);
        line(cells);
    }
    auto cells = render_cells(t.total);
    cells.insert(cells.begin(), t.total.label);
    line(cells);
    return os.str();
}

std::string render_text(const Table& t) {
    std::vector<std::vector<std::string>> rows{table_header(t)};
    for (const auto& r : t.rows) {
        rows.push_back(render_cells(r));
        rows.back().insert(rows.back().begin(), r.label);
    }
    rows.push_back(render_cells(t.total));
    rows.back().insert(rows.back().begin(), t.total.label);
    std::vector<std::size_t> width(rows.front().size(), 0);
    for (const auto& r : rows)
        for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    std::ostringstream os;
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            const auto pad = std::string(width[i] - r[i].size(), ' ');
            if (i == 0) os << r[i] << pad;
            else os << "  " << pad << r[i];
        }
        os << "\n";
    }
    return os.str();
}

}  // namespace swarm::accounting
