#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridcep {

inline constexpr const char* kEngineVersion = "0.1.0";

// Thrown for unrecoverable misuse of an API (bad arguments, broken
// preconditions). Data problems in case files are reported as
// Violation/CaseError lists instead.
class EngineError : public std::runtime_error {
public:
    EngineError(std::string rule, const std::string& message)
        : std::runtime_error(rule + ": " + message), rule_(std::move(rule)) {}
    const std::string& rule() const { return rule_; }

private:
    std::string rule_;
};

// One failed validation rule. Violations are data, not exceptions.
struct Violation {
    std::string element;
    std::string rule;
    std::string detail;

    friend bool operator==(const Violation& a, const Violation& b) {
        return a.element == b.element && a.rule == b.rule;
    }
};

// SplitMix64: tiny, documented PRNG so outage sampling is reproducible
// across platforms for a given seed.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) without modulo bias for the n we care about.
    std::uint64_t next_below(std::uint64_t n) {
        if (n == 0) throw EngineError("prng_range", "next_below(0)");
        std::uint64_t threshold = (~n + 1) % n;  // = 2^64 mod n
        for (;;) {
            std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    double next_double() {  // [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

// FNV-1a, used to derive per-element PRNG streams from a master seed.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// SHA-256 digest as lowercase hex; used for content hashes in run manifests.
std::string sha256_hex(const std::string& bytes);

// Render a double with enough digits to round-trip (shared by CSV/JSON writers).
std::string format_full(double v);

}  // namespace gridcep
