#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace mecq {

// splitmix64 step; used to derive independent stream seeds from one master
// seed so that unrelated random streams never share state.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t s = master;
    std::uint64_t a = splitmix64(s);
    s ^= stream * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(s);
    return a ^ (b + 0x165667b19e3779f9ULL);
}

// Seeded generator with hand-rolled draw transforms. std::* distributions are
// not bit-stable across standard libraries; the transforms below are, which
// keeps (scenario, seed) -> output reproducible everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // Uniform on the open interval (0, 1); never returns an exact endpoint,
    // so exponential gaps are strictly positive.
    double uniform01() {
        const std::uint64_t bits = eng_() >> 11;  // 53 random bits
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double exponential_rate(double rate) {
        if (rate <= 0.0) throw std::invalid_argument("exponential_rate: rate must be > 0");
        return -std::log(uniform01()) / rate;
    }

    double exponential_mean(double mean) {
        if (mean <= 0.0) throw std::invalid_argument("exponential_mean: mean must be > 0");
        return -std::log(uniform01()) * mean;
    }

    // Index drawn from a discrete pmf (row of a transition matrix).
    std::size_t pick(const std::vector<double>& pmf) {
        const double u = uniform01();
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
            acc += pmf[i];
            if (u < acc) return i;
        }
        return pmf.empty() ? 0 : pmf.size() - 1;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace mecq
