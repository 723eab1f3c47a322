#include "swarm/accounting/cost.hpp"

#include "swarm/common/error.hpp"

#include <cmath>
#include <numeric>

namespace swarm::accounting {

namespace {

constexpr double kPriceUnit = 1e12;  // micro-dollars per million tokens -> dollars per token

double dollars(double tokens, std::int64_t price) { return tokens * static_cast<double>(price) / kPriceUnit; }

// Per-dialog input price multipliers, in units of m times the price in micro-dollars per M.
double nocache_weight(double T, const Prices& p) { return static_cast<double>(p.c_in) * T * (T + 1) / 2; }
double cache_weight(double T, const Prices& p) {
    return static_cast<double>(p.c_hit) * T * (T + 1) / 2 + static_cast<double>(p.c_in + p.c_store) * T;
}

}  // namespace

CostEstimate estimate_cache_cost(const CostParams& p) {
    if (!(p.agents > 0)) throw Error(Errc::invalid_argument, "N must be positive");
    if (!(p.avg_turns > 0)) throw Error(Errc::invalid_argument, "T must be positive");
    if (!(p.input_tokens > 0)) throw Error(Errc::invalid_argument, "C_in must be positive");
    if (!(p.output_tokens >= 0)) throw Error(Errc::invalid_argument, "output tokens must not be negative");
    if (p.prices.c_in <= 0 || p.prices.c_hit < 0 || p.prices.c_store < 0 || p.prices.c_out < 0) {
        throw Error(Errc::invalid_argument, "prices must be nonnegative and c_in positive");
    }
    const double N = p.agents, T = p.avg_turns, C = p.input_tokens;
    CostEstimate e;
    e.append_mean = 2 * C / (N * T * (T + 1));
    e.final_context = 2 * C / (N * (T + 1));
    e.input_nocache = N * e.append_mean * nocache_weight(T, p.prices) / kPriceUnit;
    e.input_cache = N * e.append_mean * cache_weight(T, p.prices) / kPriceUnit;
    e.output = dollars(p.output_tokens, p.prices.c_out);
    e.nocache = e.input_nocache + e.output;
    e.cache = e.input_cache + e.output;
    e.factor = e.input_nocache / e.input_cache;
    return e;
}

double savings_factor(double avg_turns, const Prices& prices) {
    if (!(avg_turns > 0)) throw Error(Errc::invalid_argument, "T must be positive");
    return nocache_weight(avg_turns, prices) / cache_weight(avg_turns, prices);
}

double BruteForceCost::nocache_dollars() const { return static_cast<double>(nocache) / kPriceUnit; }
double BruteForceCost::cache_dollars() const { return static_cast<double>(cache) / kPriceUnit; }

BruteForceCost brute_force_cost(const std::vector<std::vector<std::int64_t>>& dialogs, const Prices& prices) {
    BruteForceCost out;
    for (const auto& turns : dialogs) {
        __int128 context = 0;
        for (auto appended : turns) {
            if (appended < 0) throw Error(Errc::invalid_argument, "a turn cannot append negative tokens");
            context += appended;
            out.nocache += context * prices.c_in;
            out.cache += context * prices.c_hit + static_cast<__int128>(appended) * (prices.c_in + prices.c_store);
        }
    }
    return out;
}

Rational break_even_turns(const Prices& p) {
    // c_in T(T+1)/2 = c_hit T(T+1)/2 + (c_in + c_store) T  =>  T = 2(c_in + c_store)/(c_in - c_hit) - 1
    const std::int64_t den = p.c_in - p.c_hit;
    if (den <= 0) throw Error(Errc::invalid_argument, "caching never pays off when c_hit >= c_in");
    std::int64_t num = 2 * (p.c_in + p.c_store) - den;
    const auto g = std::gcd(num, den);
    return Rational{num / g, den / g};
}

}  // namespace swarm::accounting
