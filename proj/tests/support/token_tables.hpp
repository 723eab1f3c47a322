#pragma once

// Reference token tables and fixture logs that reproduce them.

#include "swarm/accounting/ledger.hpp"
#include "swarm/agents/roles.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace swarm::testing {

/// One printed row: label, then the eight display cells.
struct PrintedRow {
    std::string label;
    std::array<std::string, 8> cells;
};

struct PrintedTable {
    accounting::GroupBy key = accounting::GroupBy::role;
    std::vector<PrintedRow> rows;
    PrintedRow total;
};

const PrintedTable& token_table_by_role();
const PrintedTable& token_table_by_outcome();

/// Exact sums chosen for each row so that they display as printed.
struct RowSums {
    std::int64_t count = 0;
    std::int64_t tokens_in = 0;
    std::int64_t tokens_out = 0;
    std::int64_t turns = 0;
};

struct Solution {
    std::vector<RowSums> rows;
    /// Constraints that no integer choice can meet. Empty when the total row is
    /// consistent with the rows as well.
    std::vector<std::string> conflicts;
};

/// Picks row sums inside every display interval, then tries to make the row sums
/// also display as the printed total row.
Solution solve(const PrintedTable& t);

/// A schema-valid JSONL event log with one outcome event per agent.
std::string fixture_log(const PrintedTable& t, const Solution& s);

/// Cells of `got` that differ from `want`, as "label/column: got vs want".
std::vector<std::string> cell_mismatches(const PrintedTable& want, const accounting::Table& got);

}  // namespace swarm::testing
