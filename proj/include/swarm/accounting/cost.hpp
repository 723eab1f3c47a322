#pragma once

#include <cstdint>
#include <vector>

namespace swarm::accounting {

/// Prices in micro-dollars per million tokens.
struct Prices {
    std::int64_t c_in = 5'000'000;
    std::int64_t c_hit = 500'000;     // cache read
    std::int64_t c_store = 10'000'000;  // cache write
    std::int64_t c_out = 25'000'000;
};

struct CostParams {
    double agents = 0;        // N
    double avg_turns = 0;     // T
    double input_tokens = 0;  // C_in over all agents
    double output_tokens = 0;
    Prices prices;
};

/// Costs in dollars. Output cost is included in both totals.
struct CostEstimate {
    double append_mean = 0;    // m
    double final_context = 0;  // L
    double input_nocache = 0;
    double input_cache = 0;
    double output = 0;
    double nocache = 0;
    double cache = 0;
    double factor = 0;  // input_nocache / input_cache
};

/// Closed form for dialogs that append m tokens per turn and resend the prefix each turn.
/// Throws Error(invalid_argument) on nonpositive N, T or C_in, or negative output.
CostEstimate estimate_cache_cost(const CostParams& p);

/// Per-turn charge of one dialog, summed exactly. Returned in micro-dollars times 1e6
/// (that is, price units times tokens) so no rounding happens before the caller divides.
struct BruteForceCost {
    __int128 nocache = 0;
    __int128 cache = 0;

    double nocache_dollars() const;
    double cache_dollars() const;
};

/// `dialogs[i][t]` is the number of tokens turn t appends to dialog i.
/// Without caching every turn pays c_in on the whole context so far. With caching a
/// turn pays c_hit on the whole context plus (c_in + c_store) on what it appended.
BruteForceCost brute_force_cost(const std::vector<std::vector<std::int64_t>>& dialogs, const Prices& prices = {});

struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;
    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    bool operator==(const Rational&) const = default;
};

/// Smallest T beyond which caching is cheaper, reduced. 17/3 at the default prices.
Rational break_even_turns(const Prices& prices = {});

double savings_factor(double avg_turns, const Prices& prices = {});

}  // namespace swarm::accounting
