#pragma once

#include "swarm/agents/roles.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace swarm::accounting {

/// One row of an aggregate table. All sums are exact integers.
struct TableRow {
    std::string label;
    std::int64_t count = 0;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    std::int64_t turns = 0;

    std::int64_t tokens_total() const { return tokens_in + tokens_out; }
    bool operator==(const TableRow&) const = default;
};

struct Table {
    std::string key;  // "role" or "outcome"
    std::vector<TableRow> rows;
    TableRow total;

    bool operator==(const Table&) const = default;
};

enum class GroupBy { role, outcome };

/// Rows follow the fixed role (or outcome) order; groups with no agents are left out.
/// Status agents are counted under their own row.
Table aggregate(const std::vector<agents::AgentRecord>& records, GroupBy key);

/// Display cells: Count, In (M), Out (M), Total (M), Avg In (K), Avg Out (K), Turns, Avg Turns.
/// Rounding happens only here.
std::vector<std::string> render_cells(const TableRow& row);
std::vector<std::string> table_header(const Table& t);
std::string render_csv(const Table& t);
std::string render_text(const Table& t);

/// Round-half-away-from-zero of num/den to `decimals` places, as text.
std::string format_ratio(std::int64_t num, std::int64_t den, int decimals);

}  // namespace swarm::accounting
