#ifndef EEOPT_COMMON_HPP
#define EEOPT_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

namespace eeopt {

// Error taxonomy mirrored by the CLI exit codes.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// SplitMix64 mix step; full 64-bit avalanche.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic per-stream seed derivation: stream i of a master seed.
/// Used so batch loops can hand every realization an independent seed and
/// stay scheduling-order independent.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0xd1342543de82ef95ULL + 1));
}

/// Named seed streams (e.g. "case2/test") so train/validation/test draws can
/// never collide by construction.
inline std::uint64_t derive_seed(std::uint64_t master, const std::string& purpose) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : purpose) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return derive_seed(master, h);
}

/// FNV-1a 64 over raw bytes; the checksum used for parameter and file hashes.
inline std::uint64_t fnv1a(std::span<const std::byte> bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (std::byte b : bytes) {
        h ^= static_cast<std::uint64_t>(b);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ULL) {
    return fnv1a(std::span<const std::byte>(static_cast<const std::byte*>(data), n), h);
}

inline double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w / 1e-3); }

}  // namespace eeopt

#endif
