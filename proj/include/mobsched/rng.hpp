#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace mobsched {

// Deterministic random source. Every draw goes through stateless helpers on
// top of a mt19937_64 engine, so serializing the engine text restores the
// exact stream position (std distributions keep hidden state and would not).
class Rng {
public:
    Rng() : eng_(0x9e3779b97f4a7c15ull) {}
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Unbiased integer in [0, n); n == 0 yields 0.
    std::uint64_t below(std::uint64_t n) {
        if (n < 2) return 0;
        const std::uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
        std::uint64_t x = eng_();
        while (x < threshold) x = eng_();
        return x % n;
    }

    std::size_t index(std::size_t n) { return static_cast<std::size_t>(below(n)); }

    // [lo, hi] inclusive.
    std::int64_t range(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
    }

    double real01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return real01() < p; }

    std::string save() const {
        std::ostringstream os;
        os << eng_;
        return os.str();
    }

    void restore(const std::string& s) {
        std::istringstream is(s);
        is >> eng_;
    }

private:
    std::mt19937_64 eng_;
};

}  // namespace mobsched
