#include "swarm/common/rng.hpp"

#include <cmath>
#include <sstream>
#include <cstring>

namespace swarm {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_string(std::string_view text) noexcept {
    // FNV-1a, finalised with splitmix to spread low-entropy tags.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return splitmix64(h);
}

Rng Rng::derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = splitmix64(seed);
    for (auto tag : tags) state = splitmix64(state ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
    return Rng(state);
}

Rng Rng::derive(std::uint64_t seed, std::string_view tag, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t state = splitmix64(seed ^ hash_string(tag));
    for (auto t : tags) state = splitmix64(state ^ splitmix64(t + 0x632be59bd9b4e019ULL));
    return Rng(state);
}

double Rng::uniform() {
    // 53 high bits -> [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t n) {
    // Rejection sampling keeps the result unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = 0;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

std::int64_t Rng::between(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    do {
        u = uniform();
    } while (u <= 0.0);
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double theta = 2.0 * M_PI * v;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

double Rng::lognormal_with_mean(double mean, double sigma) {
    if (mean <= 0.0) return 0.0;
    const double mu = std::log(mean) - 0.5 * sigma * sigma;
    return std::exp(mu + sigma * normal());
}

std::string Rng::save() const {
    std::ostringstream out;
    out << engine_ << ' ' << (has_spare_ ? 1 : 0) << ' ';
    std::uint64_t bits = 0;
    std::memcpy(&bits, &spare_, sizeof bits);
    out << bits;
    return out.str();
}

void Rng::load(const std::string& state) {
    std::istringstream in(state);
    int spare_flag = 0;
    std::uint64_t bits = 0;
    in >> engine_ >> spare_flag >> bits;
    has_spare_ = spare_flag != 0;
    std::memcpy(&spare_, &bits, sizeof bits);
}

}  // namespace swarm
