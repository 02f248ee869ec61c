#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace hdrest {

/// splitmix64 finalizer; used both as a hash and to step seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a root seed and a path of stream
/// keys: seed_k = splitmix64(seed_{k-1} ^ splitmix64(key_k)), seed_0 = root.
/// Every task that needs randomness names its stream by its position in the
/// work (replicate index, iteration, ...), so results never depend on the
/// order in which tasks are executed.
inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = splitmix64(root);
    for (std::uint64_t key : path) s = splitmix64(s ^ splitmix64(key + 0x632be59bd9b4e019ULL));
    return s;
}

using Rng = std::mt19937_64;

}  // namespace hdrest
