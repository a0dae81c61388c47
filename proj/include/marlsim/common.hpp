#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace marlsim {

// ---------------------------------------------------------------------------
// Error types shared across modules. All map to CLI exit codes in tools/.
// ---------------------------------------------------------------------------

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRange : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct VersionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CorruptFile : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoValidAction : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InsufficientData : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Deterministic hashing and seeding helpers.
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ull;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ull;

// Incremental FNV-1a. Stable across platforms and runs; used for state
// hashes and checkpoint checksums.
class Fnv1a {
public:
    void update(const void* data, std::size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            state_ = (state_ ^ p[i]) * kFnvPrime;
        }
    }
    void update_u64(std::uint64_t v) {
        unsigned char bytes[8];
        for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
        update(bytes, 8);
    }
    void update_i64(std::int64_t v) { update_u64(static_cast<std::uint64_t>(v)); }
    void update_double(double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        __builtin_memcpy(&bits, &v, 8);
        update_u64(bits);
    }
    std::uint64_t digest() const { return state_; }

private:
    std::uint64_t state_ = kFnvOffset;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Independent component streams derived from (base seed, episode, tag).
// Every stochastic piece of a run draws from such a stream, which makes
// sequential and parallel episode execution produce identical results.
enum class SeedTag : std::uint64_t {
    EnvState = 1,
    RedRedirect = 2,
    BlueRedirect = 3,
    RedPolicy = 4,
    BluePolicy = 5,
};

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t episode, SeedTag tag) {
    return splitmix64(splitmix64(base ^ (episode * 0x9e3779b97f4a7c15ull)) ^
                      static_cast<std::uint64_t>(tag));
}

// Bounded uniform draw with rejection; avoids the implementation-defined
// behavior of std::uniform_int_distribution.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = rng();
    while (v >= limit) v = rng();
    return v % n;
}

inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace marlsim
