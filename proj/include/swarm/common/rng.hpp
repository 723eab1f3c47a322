#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <string_view>

namespace swarm {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seeded generator whose output sequence is fully specified (mt19937_64 plus
/// hand-written distributions), so logs are byte-stable across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    /// Independent stream keyed by a seed and a list of integer tags.
    static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);
    static Rng derive(std::uint64_t seed, std::string_view tag, std::initializer_list<std::uint64_t> tags = {});

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);
    std::int64_t between(std::int64_t lo, std::int64_t hi);
    bool bernoulli(double p) { return uniform() < p; }
    double normal();
    /// Lognormal parameterised by its mean and the sigma of the underlying normal.
    double lognormal_with_mean(double mean, double sigma);

    /// Opaque text form of the full generator state, for checkpoints.
    std::string save() const;
    void load(const std::string& state);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t hash_string(std::string_view text) noexcept;

}  // namespace swarm
